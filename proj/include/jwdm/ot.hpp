// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Discrete optimal transport: exact solvers (Hungarian assignment and a
// transportation network simplex), log-domain Sinkhorn, and the joint-space
// transport used to check how a cost c = c1 + c2 on pair spaces decomposes.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jwdm/autodiff.hpp"
#include "jwdm/rng.hpp"

namespace jwdm::ot {

using ad::Tensor;

enum class Metric { l1, l2, squared_l2 };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view name);

/// Weighted point set; points are [n x d].
class DiscreteDistribution {
public:
    /// Validates: n >= 1, weights nonnegative and summing to 1 within 1e-12.
    DiscreteDistribution(Tensor points, std::vector<double> weights);
    static DiscreteDistribution uniform(Tensor points);

    const Tensor& points() const { return points_; }
    std::span<const double> weights() const { return weights_; }
    std::size_t size() const { return weights_.size(); }
    std::size_t dim() const { return points_.cols(); }
    bool is_uniform() const;

private:
    Tensor points_;
    std::vector<double> weights_;
};

struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major
    Metric metric = Metric::l1;

    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    double max() const;
    CostMatrix transposed() const;
};

/// Dense transport plan.
struct Coupling {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> plan;  // row-major

    double operator()(std::size_t i, std::size_t j) const { return plan[i * cols + j]; }
    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
    /// Largest absolute deviation of the marginals from (a, b).
    double marginal_error(std::span<const double> a, std::span<const double> b) const;
};

struct TransportResult {
    double value = 0.0;
    Coupling coupling;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double violation)
        : std::runtime_error(what), violation_(violation) {}
    double violation() const { return violation_; }

private:
    double violation_;
};

/// Pairwise distances C[i][j] = metric(a_i, b_j) between row-major point sets.
CostMatrix cost_matrix(const Tensor& a, const Tensor& b, Metric metric);

/// <P, C>, summed in row-major order.
double transport_cost(const Coupling& p, const CostMatrix& c);

/// Optimal assignment for a square cost matrix; returns column per row.
std::vector<std::size_t> solve_assignment(const CostMatrix& c);

/// Exact OT between uniform measures of equal size via assignment.
TransportResult hungarian(const CostMatrix& c);

/// Exact OT for arbitrary weights via the primal network simplex on the
/// transportation polytope.
TransportResult network_simplex(std::span<const double> a, std::span<const double> b,
                                const CostMatrix& c);

/// Dispatches to hungarian() for equal-size uniform measures and to
/// network_simplex() otherwise.
TransportResult exact_wasserstein(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                                  const CostMatrix& c);

struct SinkhornOptions {
    double epsilon = 0.01;
    std::size_t max_iters = 100000;
    double tol = 1e-6;
    /// Geometric epsilon-scaling factor for warm starts; 1 disables scaling.
    double scaling = 0.5;
    /// Throw ConvergenceError instead of returning an unconverged plan.
    bool require_convergence = true;
};

struct SinkhornResult {
    double value = 0.0;  // <P, C>, entropy term excluded
    Coupling coupling;
    bool converged = false;
    double marginal_error = 0.0;  // L1 row-marginal violation at exit
    std::size_t iterations = 0;
};

SinkhornResult sinkhorn(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                        const CostMatrix& c, const SinkhornOptions& options = {});

/// Discrete joint law over pairs (first, second) drawn from two spaces.
class JointPairDistribution {
public:
    /// first: [k x d1], second: [k x d2], weights: k entries summing to 1.
    JointPairDistribution(Tensor first, Tensor second, std::vector<double> weights);

    /// Product measure of two marginals, support enumerated row-major.
    static JointPairDistribution product(const DiscreteDistribution& first,
                                         const DiscreteDistribution& second);

    const Tensor& first() const { return first_; }
    const Tensor& second() const { return second_; }
    std::span<const double> weights() const { return weights_; }
    std::size_t size() const { return weights_.size(); }

    /// Marginals with coinciding support points merged.
    DiscreteDistribution first_marginal() const;
    DiscreteDistribution second_marginal() const;

    /// True iff every pair weight equals the product of its marginal weights
    /// within `tol`.
    bool is_product(double tol = 1e-12) const;

private:
    Tensor first_;
    Tensor second_;
    std::vector<double> weights_;
};

/// Joint cost c1(x, x') + c2(y', y) between two pair supports.
CostMatrix joint_cost_matrix(const JointPairDistribution& pa, const JointPairDistribution& pb,
                             Metric first_metric, Metric second_metric);

TransportResult joint_wasserstein(const JointPairDistribution& pa,
                                  const JointPairDistribution& pb, Metric first_metric,
                                  Metric second_metric);

struct DecompositionReport {
    double joint = 0.0;   // W_c(PA, PB)
    double first = 0.0;   // W_c1 between first marginals
    double second = 0.0;  // W_c2 between second marginals
    double gap = 0.0;     // joint - (first + second)
    bool independent = false;

    static std::string csv_header();
    std::string csv_row(std::size_t instance) const;
    std::string text() const;
};

DecompositionReport decomposition_report(const JointPairDistribution& pa,
                                         const JointPairDistribution& pb, Metric first_metric,
                                         Metric second_metric);

// Random instance generators used by the theorem checks.

struct InstanceSpec {
    std::size_t max_support = 6;  // cap on joint support size
    std::size_t first_dim = 1;
    std::size_t second_dim = 1;
    /// Integer grid coordinates in [0, grid) make coinciding points likely.
    int grid = 4;
};

/// Joint whose second coordinate is a deterministic function of the first.
JointPairDistribution random_deterministic_joint(Rng& rng, const InstanceSpec& spec);
/// Joint with arbitrary random support pairs and weights.
JointPairDistribution random_joint(Rng& rng, const InstanceSpec& spec);
/// Product of two random marginals with total support <= max_support.
JointPairDistribution random_product_joint(Rng& rng, const InstanceSpec& spec);

}  // namespace jwdm::ot
