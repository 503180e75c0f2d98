// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include "jwdm/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "jwdm/ot.hpp"

namespace jwdm {

namespace {

constexpr std::uint64_t kEvalStream = 0x6576616cULL;
constexpr double kEigenFloor = 1e-12;

void moments(const Tensor& s, std::vector<double>& mean, std::vector<double>& cov) {
    const auto n = s.rows();
    const auto d = s.cols();
    mean.assign(d, 0.0);
    cov.assign(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += s.at(i, j);
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                cov[j * d + k] += (s.at(i, j) - mean[j]) * (s.at(i, k) - mean[k]);
    for (auto& c : cov) c /= static_cast<double>(n - 1);
}

// tr((A B)^{1/2}) for symmetric PSD A, B.
double trace_sqrt_product(const std::vector<double>& a, const std::vector<double>& b, std::size_t d) {
    if (d == 1) return std::sqrt(std::max(a[0] * b[0], 0.0));
    if (d == 2) {
        // Eigenvalues of M = AB are real and nonnegative, so
        // tr sqrt(M) = sqrt(tr M + 2 sqrt(det M)).
        const double tr = a[0] * b[0] + a[1] * b[2] + a[2] * b[1] + a[3] * b[3];
        const double det = (a[0] * a[3] - a[1] * a[2]) * (b[0] * b[3] - b[1] * b[2]);
        const double root_det = det > kEigenFloor * kEigenFloor ? std::sqrt(det) : 0.0;
        return std::sqrt(std::max(tr + 2.0 * root_det, 0.0));
    }
    Eigen::Map<const Eigen::MatrixXd> ma(a.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    Eigen::Map<const Eigen::MatrixXd> mb(b.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(ma);
    const Eigen::VectorXd la = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd sa = ea.eigenvectors() * la.asDiagonal() * ea.eigenvectors().transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(sa * mb * sa);
    double s = 0.0;
    for (Eigen::Index i = 0; i < em.eigenvalues().size(); ++i) {
        const double l = em.eigenvalues()(i);
        if (l > kEigenFloor) s += std::sqrt(l);
    }
    return s;
}

void require_planar(const Tensor& t, const char* what) {
    if (t.rank() != 2) throw std::invalid_argument(std::string(what) + ": expected a 2-D table");
}

std::string opt_cell(const std::optional<double>& v) {
    if (!v) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

}  // namespace

Tensor translate(const ModelBundle& bundle, const Tensor& points, Direction dir) {
    require_planar(points, "translate");
    return dir == Direction::x_to_y ? bundle.g2.evaluate(bundle.e1.evaluate(points))
                                    : bundle.g1.evaluate(bundle.e2.evaluate(points));
}

Tensor cycle(const ModelBundle& bundle, const Tensor& points, Direction dir) {
    const Tensor t = translate(bundle, points, dir);
    return translate(bundle, t, dir == Direction::x_to_y ? Direction::y_to_x : Direction::x_to_y);
}

double gaussian_frechet(const Tensor& a, const Tensor& b) {
    require_planar(a, "gaussian_frechet");
    require_planar(b, "gaussian_frechet");
    const auto d = a.cols();
    if (b.cols() != d) throw std::invalid_argument("gaussian_frechet: dimension mismatch");
    if (a.rows() < d + 1 || b.rows() < d + 1)
        throw std::invalid_argument("gaussian_frechet: needs at least d + 1 samples per set");
    std::vector<double> ma, ca, mb, cb;
    moments(a, ma, ca);
    moments(b, mb, cb);
    double mean_term = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean_term += (ma[j] - mb[j]) * (ma[j] - mb[j]);
    double trace_term = 0.0;
    for (std::size_t j = 0; j < d; ++j) trace_term += ca[j * d + j] + cb[j * d + j];
    const double value = mean_term + trace_term - 2.0 * trace_sqrt_product(ca, cb, d);
    return std::max(value, 0.0);
}

double correspondence_rmse(const ModelBundle& bundle, const data::DomainDataset& dataset,
                           Direction dir) {
    if (!dataset.map) throw std::invalid_argument("correspondence_rmse: dataset has no ground-truth map");
    const Tensor& src = dir == Direction::x_to_y ? dataset.x : dataset.y;
    const data::AffineMap m = dir == Direction::x_to_y ? *dataset.map : dataset.map->inverse();
    const Tensor pred = translate(bundle, src, dir);
    const Tensor truth = m.apply(src);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    return std::sqrt(sum / static_cast<double>(src.rows()));
}

double ot_distribution_distance(const ModelBundle& bundle, const data::DomainDataset& dataset,
                                Direction dir, std::size_t sample_n) {
    if (sample_n == 0 || sample_n > 64)
        throw std::invalid_argument("ot_distribution_distance: sample_n must lie in [1, 64]");
    const Tensor& src = dir == Direction::x_to_y ? dataset.x : dataset.y;
    const Tensor& real = dir == Direction::x_to_y ? dataset.y : dataset.x;
    if (src.rows() < sample_n || real.rows() < sample_n)
        throw std::invalid_argument("ot_distribution_distance: not enough samples");
    const Tensor fake = translate(bundle, src.slice_rows(0, sample_n), dir);
    const Tensor target = real.slice_rows(0, sample_n);
    const auto c = ot::cost_matrix(fake, target, ot::Metric::squared_l2);
    return ot::exact_wasserstein(ot::DiscreteDistribution::uniform(fake),
                                 ot::DiscreteDistribution::uniform(target), c)
        .value;
}

double cycle_l1(const ModelBundle& bundle, const Tensor& points, Direction dir) {
    const Tensor back = cycle(bundle, points, dir);
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) sum += std::abs(points[i] - back[i]);
    return sum / static_cast<double>(points.rows());
}

std::string EvalReport::csv_header() {
    return "lambda_z,task,frechet_x,frechet_y,corr_rmse,cycle_l1_x,cycle_l1_y,w2_x,w2_y";
}

std::string EvalReport::csv_row(double lambda_z, const std::string& task) const {
    char head[200];
    std::snprintf(head, sizeof head, "%.17g,%s,%.17g,%.17g,", lambda_z, task.c_str(), frechet_x,
                  frechet_y);
    char mid[100];
    std::snprintf(mid, sizeof mid, ",%.17g,%.17g,", cycle_l1_x, cycle_l1_y);
    return head + opt_cell(correspondence_rmse) + mid + opt_cell(w2_x) + "," + opt_cell(w2_y);
}

data::DomainDataset held_out(const data::DomainDataset& dataset, const EvalConfig& config) {
    if (!dataset.spec) return dataset;
    data::DomainSpec spec = *dataset.spec;
    spec.n = config.eval_n;
    spec.paired = true;
    spec.seed = derive_seed(derive_seed(spec.seed, kEvalStream), config.seed);
    return data::gen_domain_pair(spec);
}

EvalReport evaluate_on(const ModelBundle& bundle, const data::DomainDataset& eval_set,
                       std::size_t ot_sample_n) {
    EvalReport r;
    r.frechet_x = gaussian_frechet(translate(bundle, eval_set.y, Direction::y_to_x), eval_set.x);
    r.frechet_y = gaussian_frechet(translate(bundle, eval_set.x, Direction::x_to_y), eval_set.y);
    if (eval_set.map) r.correspondence_rmse = correspondence_rmse(bundle, eval_set, Direction::x_to_y);
    r.cycle_l1_x = cycle_l1(bundle, eval_set.x, Direction::x_to_y);
    r.cycle_l1_y = cycle_l1(bundle, eval_set.y, Direction::y_to_x);
    if (ot_sample_n > 0) {
        const auto n = std::min({ot_sample_n, eval_set.x.rows(), eval_set.y.rows()});
        r.w2_x = ot_distribution_distance(bundle, eval_set, Direction::y_to_x, n);
        r.w2_y = ot_distribution_distance(bundle, eval_set, Direction::x_to_y, n);
    }
    return r;
}

EvalReport evaluate(const ModelBundle& bundle, const data::DomainDataset& dataset,
                    const EvalConfig& config) {
    return evaluate_on(bundle, held_out(dataset, config), config.ot_sample_n);
}

}  // namespace jwdm
