// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "jwdm/data.hpp"
#include "jwdm/model.hpp"

namespace jwdm {

/// x_to_y: G2(E1(x)) against Y. y_to_x: G1(E2(y)) against X.
enum class Direction { x_to_y, y_to_x };

/// Translates every row of `points` in the given direction.
Tensor translate(const ModelBundle& bundle, const Tensor& points, Direction dir);
/// Full cycle back into the source domain, e.g. G1(E2(G2(E1(x)))) for x_to_y.
Tensor cycle(const ModelBundle& bundle, const Tensor& points, Direction dir);

/// Frechet distance between Gaussians fitted to two samples (unbiased
/// covariances). The 2-D case uses the closed-form trace of the product's
/// square root; other dimensions go through an eigendecomposition.
double gaussian_frechet(const Tensor& a, const Tensor& b);

/// Root mean squared distance between translated points and their images under
/// the ground-truth map (its inverse for y_to_x). Needs dataset.map.
double correspondence_rmse(const ModelBundle& bundle, const data::DomainDataset& dataset,
                           Direction dir);

/// Exact squared-L2 optimal transport cost between the first `sample_n`
/// translated points and the first `sample_n` real points of the target domain.
double ot_distribution_distance(const ModelBundle& bundle, const data::DomainDataset& dataset,
                                Direction dir, std::size_t sample_n);

/// Mean per-sample L1 norm of points - cycle(points).
double cycle_l1(const ModelBundle& bundle, const Tensor& points, Direction dir);

struct EvalConfig {
    std::size_t eval_n = 1000;      // held-out sample size per domain
    std::size_t ot_sample_n = 64;   // 0 disables the OT columns
    std::uint64_t seed = 0;
};

struct EvalReport {
    double frechet_x = 0.0;  // G1(E2(y)) vs real X
    double frechet_y = 0.0;  // G2(E1(x)) vs real Y
    std::optional<double> correspondence_rmse;
    double cycle_l1_x = 0.0;
    double cycle_l1_y = 0.0;
    std::optional<double> w2_x;
    std::optional<double> w2_y;

    static std::string csv_header();
    std::string csv_row(double lambda_z, const std::string& task) const;
};

/// Held-out evaluation sample: the dataset's generator spec re-run in paired
/// mode under a seed stream derived from both seeds. Datasets without a spec
/// are returned as-is.
data::DomainDataset held_out(const data::DomainDataset& dataset, const EvalConfig& config);

/// Evaluates on held_out(dataset, config).
EvalReport evaluate(const ModelBundle& bundle, const data::DomainDataset& dataset,
                    const EvalConfig& config);
/// Evaluates on exactly the given points.
EvalReport evaluate_on(const ModelBundle& bundle, const data::DomainDataset& eval_set,
                       std::size_t ot_sample_n);

}  // namespace jwdm
