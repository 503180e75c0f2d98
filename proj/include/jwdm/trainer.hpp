// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jwdm/data.hpp"
#include "jwdm/model.hpp"
#include "jwdm/nn.hpp"
#include "jwdm/rng.hpp"

namespace jwdm {

/// Full experiment configuration.
struct TrainConfig {
    int epochs = 200;        // total epochs; the learning rate reaches zero here
    int decay_start = 100;   // linear decay begins at this epoch
    double lr = 2e-4;
    std::size_t batch_size = 64;
    LossWeights weights;     // lambda_x = lambda_y = lambda_z = 0.1 by default
    Architecture arch;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t disc_steps = 1;  // discriminator ascents per generator descent
    std::uint64_t seed = 0;
    data::DomainSpec dataset;
    std::string output_dir;  // empty: keep everything in memory

    void validate() const;

    nn::LrSchedule schedule() const { return {lr, decay_start, epochs}; }

    /// Flat key/value form; dataset fields carry a "data." prefix.
    std::map<std::string, std::string> to_fields() const;
    /// Starts from defaults and overrides the given keys. Unknown keys throw.
    static TrainConfig from_fields(const std::map<std::string, std::string>& fields);

    std::string to_ini() const;
    static TrainConfig from_ini(const std::string& text);
    static TrainConfig load(const std::filesystem::path& path);

    /// FNV-1a hash of every training-relevant field (output_dir excluded).
    std::uint64_t hash() const;
};

/// Everything needed to continue training bit-identically.
struct TrainingState {
    ModelBundle bundle;
    nn::AdamState gen_opt;
    nn::AdamState disc_opt;
    int epoch = 0;            // completed epochs
    std::uint64_t step = 0;   // completed generator updates
    Rng shuffle_rng;
    Rng prior_rng;

    bool operator==(const TrainingState&) const = default;
};

struct Checkpoint {
    TrainConfig config;
    std::uint64_t config_hash = 0;
    TrainingState state;
};

inline constexpr char kCheckpointMagic[9] = "JWDM0001";

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);
/// Writes through a temporary file and renames it into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct LogRow {
    int epoch = 0;
    std::uint64_t step = 0;  // global generator step, 0-based
    double lr = 0.0;
    LossBreakdown losses;
};

std::string log_csv_header();
std::string log_csv_row(const LogRow& row);
void write_log_csv(const std::vector<LogRow>& rows, const std::filesystem::path& path, bool append);

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(const std::string& what, std::string term)
        : std::runtime_error(what), term_(std::move(term)) {}
    const std::string& term() const { return term_; }

private:
    std::string term_;
};

struct TrainResult {
    TrainingState state;
    std::vector<LogRow> log;

    Checkpoint checkpoint(const TrainConfig& config) const;
};

/// Fresh state: initialized bundle, zeroed optimizers, seeded RNG streams.
TrainingState initial_state(const TrainConfig& config);

/// Alternating optimization: per minibatch, `disc_steps` ascents of the
/// weighted discriminator objective, then one descent of the generator
/// objective. Runs epochs [0, until_epoch) where until_epoch defaults to
/// config.epochs. Writes checkpoint.bin and train_log.csv into
/// config.output_dir after every epoch when it is set.
TrainResult train(const TrainConfig& config, const data::DomainDataset& dataset,
                  std::optional<int> until_epoch = std::nullopt);

/// Continues from a checkpoint for `extra_epochs`. The supplied config must
/// hash to the checkpoint's config hash.
TrainResult resume(const Checkpoint& checkpoint, const TrainConfig& config,
                   const data::DomainDataset& dataset, int extra_epochs);

/// One optimization step on explicit batches; exposed for tests.
LogRow train_step(TrainingState& state, const TrainConfig& config, const Tensor& batch_x,
                  const Tensor& batch_y, double lr, int epoch);

}  // namespace jwdm
