// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace jwdm {

/// Seeded random stream with a serializable state.
///
/// Distributions are implemented here rather than taken from <random> so that
/// the whole state lives in the engine and round-trips through checkpoints.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; one value per call, nothing cached.
    double normal();

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n);

    std::string state() const;
    void set_state(const std::string& state);

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

private:
    std::mt19937_64 engine_;
};

/// Derives an independent seed for a named stream (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace jwdm
