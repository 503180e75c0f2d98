// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "jwdm/ot.hpp"

namespace jwdm::ot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct LogSinkhorn {
    const CostMatrix& c;
    std::vector<double> log_a, log_b;
    std::vector<double> f, g;
    std::vector<double> scratch;

    LogSinkhorn(const CostMatrix& cost, std::span<const double> a, std::span<const double> b)
        : c(cost), f(a.size(), 0.0), g(b.size(), 0.0) {
        for (double w : a) log_a.push_back(w > 0.0 ? std::log(w) : kNegInf);
        for (double w : b) log_b.push_back(w > 0.0 ? std::log(w) : kNegInf);
        scratch.resize(std::max(a.size(), b.size()));
    }

    static double log_sum_exp(std::span<const double> x) {
        double mx = kNegInf;
        for (double v : x) mx = std::max(mx, v);
        if (mx == kNegInf) return kNegInf;
        double s = 0.0;
        for (double v : x)
            if (v != kNegInf) s += std::exp(v - mx);
        return mx + std::log(s);
    }

    void update_f(double eps) {
        const std::size_t n = c.rows, m = c.cols;
        for (std::size_t i = 0; i < n; ++i) {
            if (log_a[i] == kNegInf) {
                f[i] = kNegInf;
                continue;
            }
            for (std::size_t j = 0; j < m; ++j)
                scratch[j] = g[j] == kNegInf ? kNegInf : (g[j] - c(i, j)) / eps;
            f[i] = eps * (log_a[i] - log_sum_exp(std::span(scratch.data(), m)));
        }
    }

    void update_g(double eps) {
        const std::size_t n = c.rows, m = c.cols;
        for (std::size_t j = 0; j < m; ++j) {
            if (log_b[j] == kNegInf) {
                g[j] = kNegInf;
                continue;
            }
            for (std::size_t i = 0; i < n; ++i)
                scratch[i] = f[i] == kNegInf ? kNegInf : (f[i] - c(i, j)) / eps;
            g[j] = eps * (log_b[j] - log_sum_exp(std::span(scratch.data(), n)));
        }
    }

    double plan_entry(std::size_t i, std::size_t j, double eps) const {
        if (f[i] == kNegInf || g[j] == kNegInf) return 0.0;
        return std::exp((f[i] + g[j] - c(i, j)) / eps);
    }

    // L1 violation of the row marginal (columns are exact after update_g).
    double row_violation(std::span<const double> a, double eps) const {
        double err = 0.0;
        for (std::size_t i = 0; i < c.rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < c.cols; ++j) s += plan_entry(i, j, eps);
            err += std::fabs(s - a[i]);
        }
        return err;
    }
};

}  // namespace

SinkhornResult sinkhorn(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                        const CostMatrix& c, const SinkhornOptions& opt) {
    if (!(opt.epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive");
    if (!(opt.scaling > 0.0 && opt.scaling <= 1.0))
        throw std::invalid_argument("sinkhorn: scaling factor must lie in (0, 1]");
    if (c.rows != mu.size() || c.cols != nu.size())
        throw std::invalid_argument("sinkhorn: cost matrix shape does not match the measures");

    LogSinkhorn state(c, mu.weights(), nu.weights());
    SinkhornResult r;

    // Warm start through a decreasing epsilon ladder.
    double eps = opt.scaling < 1.0 ? std::max(opt.epsilon, c.max()) : opt.epsilon;
    while (eps > opt.epsilon && r.iterations < opt.max_iters) {
        for (int k = 0; k < 200 && r.iterations < opt.max_iters; ++k, ++r.iterations) {
            state.update_f(eps);
            state.update_g(eps);
            if (state.row_violation(mu.weights(), eps) < 1e-4) break;
        }
        eps = std::max(opt.epsilon, eps * opt.scaling);
    }
    eps = opt.epsilon;
    while (r.iterations < opt.max_iters) {
        state.update_f(eps);
        state.update_g(eps);
        ++r.iterations;
        r.marginal_error = state.row_violation(mu.weights(), eps);
        if (r.marginal_error < opt.tol) {
            r.converged = true;
            break;
        }
    }

    r.coupling = Coupling{c.rows, c.cols, std::vector<double>(c.rows * c.cols, 0.0)};
    for (std::size_t i = 0; i < c.rows; ++i)
        for (std::size_t j = 0; j < c.cols; ++j)
            r.coupling.plan[i * c.cols + j] = state.plan_entry(i, j, eps);
    r.value = transport_cost(r.coupling, c);
    if (!r.converged && opt.require_convergence)
        throw ConvergenceError("sinkhorn: no convergence after " + std::to_string(r.iterations) +
                                   " iterations (marginal violation " +
                                   std::to_string(r.marginal_error) + ")",
                               r.marginal_error);
    return r;
}

}  // namespace jwdm::ot
