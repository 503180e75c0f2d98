// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "jwdm/ot.hpp"

namespace jwdm::ot {

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::l1: return "l1";
        case Metric::l2: return "l2";
        case Metric::squared_l2: return "sqeuclidean";
    }
    return "l1";
}

Metric parse_metric(std::string_view name) {
    if (name == "l1") return Metric::l1;
    if (name == "l2") return Metric::l2;
    if (name == "sqeuclidean" || name == "squared_l2") return Metric::squared_l2;
    throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

DiscreteDistribution::DiscreteDistribution(Tensor points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.rank() != 2)
        throw std::invalid_argument("DiscreteDistribution: points must be [n x d], got " +
                                    ad::to_string(points_.shape()));
    if (weights_.empty() || weights_.size() != points_.rows())
        throw std::invalid_argument("DiscreteDistribution: need one weight per point (" +
                                    std::to_string(points_.rows()) + " points, " +
                                    std::to_string(weights_.size()) + " weights)");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("DiscreteDistribution: weights must be finite and >= 0");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteDistribution: weights sum to " +
                                    std::to_string(total) + ", expected 1");
}

DiscreteDistribution DiscreteDistribution::uniform(Tensor points) {
    const std::size_t n = points.rows();
    if (n == 0) throw std::invalid_argument("DiscreteDistribution: empty point set");
    return DiscreteDistribution(std::move(points),
                                std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

bool DiscreteDistribution::is_uniform() const {
    const double w = 1.0 / static_cast<double>(weights_.size());
    return std::all_of(weights_.begin(), weights_.end(), [w](double x) { return x == w; });
}

double CostMatrix::max() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

CostMatrix CostMatrix::transposed() const {
    CostMatrix t{cols, rows, std::vector<double>(values.size()), metric};
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) t.values[j * rows + i] = values[i * cols + j];
    return t;
}

std::vector<double> Coupling::row_sums() const {
    std::vector<double> s(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) s[i] += plan[i * cols + j];
    return s;
}

std::vector<double> Coupling::col_sums() const {
    std::vector<double> s(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) s[j] += plan[i * cols + j];
    return s;
}

double Coupling::marginal_error(std::span<const double> a, std::span<const double> b) const {
    double err = 0.0;
    const auto rs = row_sums();
    const auto cs = col_sums();
    for (std::size_t i = 0; i < rows && i < a.size(); ++i) err = std::max(err, std::fabs(rs[i] - a[i]));
    for (std::size_t j = 0; j < cols && j < b.size(); ++j) err = std::max(err, std::fabs(cs[j] - b[j]));
    return err;
}

CostMatrix cost_matrix(const Tensor& a, const Tensor& b, Metric metric) {
    if (a.rank() != 2 || b.rank() != 2)
        throw std::invalid_argument("cost_matrix: point sets must be [n x d]");
    if (a.cols() != b.cols())
        throw std::invalid_argument("cost_matrix: dimension mismatch (" +
                                    std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) +
                                    ")");
    const std::size_t n = a.rows(), m = b.rows(), d = a.cols();
    CostMatrix c{n, m, std::vector<double>(n * m, 0.0), metric};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = a.at(i, k) - b.at(j, k);
                acc += metric == Metric::l1 ? std::fabs(diff) : diff * diff;
            }
            c.values[i * m + j] = metric == Metric::l2 ? std::sqrt(acc) : acc;
        }
    }
    return c;
}

double transport_cost(const Coupling& p, const CostMatrix& c) {
    if (p.rows != c.rows || p.cols != c.cols)
        throw std::invalid_argument("transport_cost: plan and cost shapes differ");
    // Compensated dot product: rounding errors of every product and partial
    // sum are carried separately, so plans with equal exact cost agree.
    double sum = 0.0, err = 0.0;
    for (std::size_t k = 0; k < p.plan.size(); ++k) {
        const double prod = p.plan[k] * c.values[k];
        const double prod_err = std::fma(p.plan[k], c.values[k], -prod);
        const double t = sum + prod;
        const double z = t - sum;
        err += (sum - (t - z)) + (prod - z) + prod_err;
        sum = t;
    }
    return sum + err;
}

TransportResult exact_wasserstein(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                                  const CostMatrix& c) {
    if (c.rows != mu.size() || c.cols != nu.size())
        throw std::invalid_argument("exact_wasserstein: cost matrix is " + std::to_string(c.rows) +
                                    "x" + std::to_string(c.cols) + " but measures have " +
                                    std::to_string(mu.size()) + " and " +
                                    std::to_string(nu.size()) + " points");
    if (mu.size() == nu.size() && mu.is_uniform() && nu.is_uniform()) return hungarian(c);
    return network_simplex(mu.weights(), nu.weights(), c);
}

}  // namespace jwdm::ot
