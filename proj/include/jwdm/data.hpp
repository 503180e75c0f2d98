// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jwdm/autodiff.hpp"
#include "jwdm/rng.hpp"

namespace jwdm::data {

using ad::Tensor;

enum class DomainKind { gauss_mix, ring, two_moons_affine };

std::string_view to_string(DomainKind kind);
DomainKind parse_domain_kind(std::string_view name);

/// Planar affine map y = A x + t, A row-major 2x2.
struct AffineMap {
    std::array<double, 4> a{1.0, 0.0, 0.0, 1.0};
    std::array<double, 2> t{0.0, 0.0};

    static AffineMap rotation_scale(double degrees, double scale);

    std::array<double, 2> apply(double x0, double x1) const;
    AffineMap inverse() const;
    /// Applies the map to every row of an [n x 2] tensor.
    Tensor apply(const Tensor& points) const;

    bool operator==(const AffineMap&) const = default;
};

/// Generator parameters. Unused fields are ignored by kinds that do not need
/// them.
struct DomainSpec {
    DomainKind kind = DomainKind::ring;
    std::size_t n = 2000;
    std::uint64_t seed = 0;
    std::size_t components = 8;   // mixture components (gauss-mix, ring)
    double radius = 1.0;          // ring / blob-layout radius
    double stddev = 0.05;         // component standard deviation
    double band = 0.2;            // ring samples kept within [radius - band, radius + band]
    double rotation_deg = 90.0;   // target map: rotation ...
    double scale = 0.5;           // ... and isotropic scale
    double moon_noise = 0.05;     // two-moons Gaussian jitter
    /// Full affine target map; overrides rotation/scale when set.
    std::optional<AffineMap> affine;
    /// Paired mode: y_i = map(x_i) instead of the map of a fresh sample.
    bool paired = false;

    AffineMap target_map() const;

    /// Flat key/value view used by config files and the spec.json sidecar.
    std::map<std::string, std::string> to_fields() const;
    static DomainSpec from_fields(const std::map<std::string, std::string>& fields);

    bool operator==(const DomainSpec&) const = default;
};

/// Two unpaired point sets. The ground-truth map is metadata for evaluation
/// only; the trainer never sees an alignment between x and y rows.
struct DomainDataset {
    Tensor x;  // [n x d]
    Tensor y;  // [m x d]
    std::optional<AffineMap> map;
    std::optional<DomainSpec> spec;
};

/// Samples the base distribution of a kind.
Tensor sample_base(const DomainSpec& spec, std::size_t count, Rng& rng);

DomainDataset gen_domain_pair(const DomainSpec& spec);

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Writes `dim0,dim1,...` header then one row per point, 17 significant digits.
void save_points_csv(const Tensor& points, const std::filesystem::path& path);
/// Reads a points file; errors name the offending line.
Tensor load_points_csv(const std::filesystem::path& path);

/// Writes x.csv, y.csv and (when present) spec.json into `dir`.
void save_csv(const DomainDataset& dataset, const std::filesystem::path& dir);
/// Reads x.csv and y.csv (and spec.json if present) from `dir`.
DomainDataset load_csv(const std::filesystem::path& dir);

struct BatchIndices {
    std::vector<std::size_t> x;
    std::vector<std::size_t> y;
};

/// One epoch of minibatches: independent shuffles per domain, final short
/// batch dropped.
std::vector<BatchIndices> make_batches(std::size_t n_x, std::size_t n_y, std::size_t batch_size,
                                       Rng& epoch_rng);

/// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

}  // namespace jwdm::data
