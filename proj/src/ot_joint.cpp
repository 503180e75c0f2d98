// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "jwdm/ot.hpp"

namespace jwdm::ot {

namespace {

std::vector<double> row_of(const Tensor& t, std::size_t i) {
    const std::size_t d = t.cols();
    return {t.data().begin() + static_cast<std::ptrdiff_t>(i * d),
            t.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * d)};
}

// Distinct rows in first-occurrence order, and the class of every row.
struct RowClasses {
    std::vector<std::vector<double>> distinct;
    std::vector<std::size_t> class_of;
};

RowClasses classify_rows(const Tensor& t) {
    RowClasses rc;
    std::map<std::vector<double>, std::size_t> index;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        auto row = row_of(t, i);
        auto [it, inserted] = index.emplace(row, rc.distinct.size());
        if (inserted) rc.distinct.push_back(std::move(row));
        rc.class_of.push_back(it->second);
    }
    return rc;
}

DiscreteDistribution merged_marginal(const Tensor& points, std::span<const double> weights) {
    const auto rc = classify_rows(points);
    const std::size_t d = points.cols();
    std::vector<double> w(rc.distinct.size(), 0.0);
    for (std::size_t i = 0; i < rc.class_of.size(); ++i) w[rc.class_of[i]] += weights[i];
    std::vector<double> flat;
    flat.reserve(rc.distinct.size() * d);
    for (const auto& r : rc.distinct) flat.insert(flat.end(), r.begin(), r.end());
    // Re-normalize away summation drift so the marginal passes validation.
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    return DiscreteDistribution(Tensor({rc.distinct.size(), d}, std::move(flat)), std::move(w));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

JointPairDistribution::JointPairDistribution(Tensor first, Tensor second,
                                             std::vector<double> weights)
    : first_(std::move(first)), second_(std::move(second)), weights_(std::move(weights)) {
    if (first_.rank() != 2 || second_.rank() != 2)
        throw std::invalid_argument("JointPairDistribution: supports must be [k x d]");
    if (first_.rows() != second_.rows() || weights_.size() != first_.rows() || weights_.empty())
        throw std::invalid_argument("JointPairDistribution: support and weight counts differ");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw std::invalid_argument("JointPairDistribution: negative weight");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw std::invalid_argument("JointPairDistribution: weights sum to " +
                                    std::to_string(total));
}

JointPairDistribution JointPairDistribution::product(const DiscreteDistribution& first,
                                                     const DiscreteDistribution& second) {
    const std::size_t p = first.size(), q = second.size();
    const std::size_t d1 = first.dim(), d2 = second.dim();
    std::vector<double> a, b, w;
    a.reserve(p * q * d1);
    b.reserve(p * q * d2);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < q; ++j) {
            auto ra = row_of(first.points(), i);
            auto rb = row_of(second.points(), j);
            a.insert(a.end(), ra.begin(), ra.end());
            b.insert(b.end(), rb.begin(), rb.end());
            w.push_back(first.weights()[i] * second.weights()[j]);
        }
    }
    return JointPairDistribution(Tensor({p * q, d1}, std::move(a)), Tensor({p * q, d2}, std::move(b)),
                                 std::move(w));
}

DiscreteDistribution JointPairDistribution::first_marginal() const {
    return merged_marginal(first_, weights_);
}

DiscreteDistribution JointPairDistribution::second_marginal() const {
    return merged_marginal(second_, weights_);
}

bool JointPairDistribution::is_product(double tol) const {
    const auto fa = classify_rows(first_);
    const auto fb = classify_rows(second_);
    const std::size_t p = fa.distinct.size(), q = fb.distinct.size();
    std::vector<double> joint(p * q, 0.0), pa(p, 0.0), pb(q, 0.0);
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        joint[fa.class_of[k] * q + fb.class_of[k]] += weights_[k];
        pa[fa.class_of[k]] += weights_[k];
        pb[fb.class_of[k]] += weights_[k];
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < q; ++j)
            if (std::fabs(joint[i * q + j] - pa[i] * pb[j]) > tol) return false;
    return true;
}

CostMatrix joint_cost_matrix(const JointPairDistribution& pa, const JointPairDistribution& pb,
                             Metric first_metric, Metric second_metric) {
    if (pa.first().cols() != pb.first().cols() || pa.second().cols() != pb.second().cols())
        throw std::invalid_argument("joint_wasserstein: pair spaces have different dimensions");
    CostMatrix c1 = cost_matrix(pa.first(), pb.first(), first_metric);
    const CostMatrix c2 = cost_matrix(pa.second(), pb.second(), second_metric);
    for (std::size_t k = 0; k < c1.values.size(); ++k) c1.values[k] += c2.values[k];
    return c1;
}

TransportResult joint_wasserstein(const JointPairDistribution& pa,
                                  const JointPairDistribution& pb, Metric first_metric,
                                  Metric second_metric) {
    const CostMatrix c = joint_cost_matrix(pa, pb, first_metric, second_metric);
    const std::vector<double> wa(pa.weights().begin(), pa.weights().end());
    const std::vector<double> wb(pb.weights().begin(), pb.weights().end());
    const DiscreteDistribution mu(pa.first(), wa);
    const DiscreteDistribution nu(pb.first(), wb);
    return exact_wasserstein(mu, nu, c);
}

DecompositionReport decomposition_report(const JointPairDistribution& pa,
                                         const JointPairDistribution& pb, Metric first_metric,
                                         Metric second_metric) {
    DecompositionReport r;
    r.joint = joint_wasserstein(pa, pb, first_metric, second_metric).value;

    const auto fa = pa.first_marginal(), fb = pb.first_marginal();
    r.first = exact_wasserstein(fa, fb, cost_matrix(fa.points(), fb.points(), first_metric)).value;
    const auto sa = pa.second_marginal(), sb = pb.second_marginal();
    r.second =
        exact_wasserstein(sa, sb, cost_matrix(sa.points(), sb.points(), second_metric)).value;

    r.gap = r.joint - (r.first + r.second);
    r.independent = pa.is_product(1e-12) && pb.is_product(1e-12);
    return r;
}

std::string DecompositionReport::csv_header() { return "instance,W_c,W_c1,W_c2,gap,independent"; }

std::string DecompositionReport::csv_row(std::size_t instance) const {
    return std::to_string(instance) + "," + format_double(joint) + "," + format_double(first) +
           "," + format_double(second) + "," + format_double(gap) + "," +
           (independent ? "true" : "false");
}

std::string DecompositionReport::text() const {
    std::ostringstream os;
    os << "joint transport   W_c  = " << format_double(joint) << '\n'
       << "first marginals   W_c1 = " << format_double(first) << '\n'
       << "second marginals  W_c2 = " << format_double(second) << '\n'
       << "gap W_c - (W_c1 + W_c2) = " << format_double(gap) << '\n'
       << "product joints: " << (independent ? "yes" : "no") << '\n';
    return os.str();
}

namespace {

std::vector<double> random_weights(Rng& rng, std::size_t k) {
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& x : w) {
        x = rng.uniform(0.05, 1.0);
        total += x;
    }
    for (auto& x : w) x /= total;
    return w;
}

std::vector<double> random_grid_point(Rng& rng, std::size_t dim, int grid) {
    std::vector<double> p(dim);
    for (auto& x : p) x = static_cast<double>(rng.index(static_cast<std::uint64_t>(grid)));
    return p;
}

std::size_t random_support(Rng& rng, std::size_t max_support) {
    return 1 + static_cast<std::size_t>(rng.index(std::max<std::size_t>(1, max_support)));
}

}  // namespace

JointPairDistribution random_deterministic_joint(Rng& rng, const InstanceSpec& spec) {
    const std::size_t k = random_support(rng, spec.max_support);
    std::map<std::vector<double>, std::vector<double>> table;
    std::vector<double> a, b;
    for (std::size_t i = 0; i < k; ++i) {
        auto x = random_grid_point(rng, spec.first_dim, spec.grid);
        auto it = table.find(x);
        if (it == table.end())
            it = table.emplace(x, random_grid_point(rng, spec.second_dim, spec.grid)).first;
        a.insert(a.end(), x.begin(), x.end());
        b.insert(b.end(), it->second.begin(), it->second.end());
    }
    return JointPairDistribution(Tensor({k, spec.first_dim}, std::move(a)),
                                 Tensor({k, spec.second_dim}, std::move(b)), random_weights(rng, k));
}

JointPairDistribution random_joint(Rng& rng, const InstanceSpec& spec) {
    const std::size_t k = random_support(rng, spec.max_support);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < k; ++i) {
        auto x = random_grid_point(rng, spec.first_dim, spec.grid);
        auto y = random_grid_point(rng, spec.second_dim, spec.grid);
        a.insert(a.end(), x.begin(), x.end());
        b.insert(b.end(), y.begin(), y.end());
    }
    return JointPairDistribution(Tensor({k, spec.first_dim}, std::move(a)),
                                 Tensor({k, spec.second_dim}, std::move(b)), random_weights(rng, k));
}

JointPairDistribution random_product_joint(Rng& rng, const InstanceSpec& spec) {
    const std::size_t cap = std::max<std::size_t>(1, spec.max_support);
    const std::size_t p = random_support(rng, cap);
    const std::size_t q = random_support(rng, cap / p);
    auto marginal = [&](std::size_t count, std::size_t dim) {
        std::vector<double> pts;
        for (std::size_t i = 0; i < count; ++i) {
            auto x = random_grid_point(rng, dim, spec.grid);
            pts.insert(pts.end(), x.begin(), x.end());
        }
        return DiscreteDistribution(Tensor({count, dim}, std::move(pts)), random_weights(rng, count));
    };
    const auto first = marginal(p, spec.first_dim);
    const auto second = marginal(q, spec.second_dim);
    return JointPairDistribution::product(first, second);
}

}  // namespace jwdm::ot
