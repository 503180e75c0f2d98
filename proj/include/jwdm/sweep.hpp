// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jwdm/metrics.hpp"
#include "jwdm/trainer.hpp"

namespace jwdm {

struct SweepOptions {
    /// Tasks to run; empty means the config's own dataset kind.
    std::vector<data::DomainKind> tasks;
    EvalConfig eval;
    /// Worker threads; each run owns its bundle, RNG streams and output directory.
    std::size_t jobs = 1;
};

struct SweepRow {
    double lambda_z = 0.0;
    std::string task;
    EvalReport report;
    ModelBundle bundle;
};

/// Trains and evaluates one model per (task, lambda_z) pair, tasks outermost.
/// When config.output_dir is set each run writes into
/// <output_dir>/<task>_lz<value>/.
std::vector<SweepRow> lambda_z_sweep(const TrainConfig& config, const std::vector<double>& values,
                                     const SweepOptions& options = {});

std::string sweep_csv(const std::vector<SweepRow>& rows);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace jwdm
