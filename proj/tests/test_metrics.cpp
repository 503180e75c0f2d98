// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "jwdm/metrics.hpp"
#include "oracles.hpp"

using namespace jwdm;

namespace {

Tensor gaussian_cloud(std::size_t n, std::size_t d, Rng& rng, double mix = 0.5) {
    Tensor t({n, d}, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double prev = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double z = rng.normal();
            t.at(i, k) = z + mix * prev + 0.3 * static_cast<double>(k);
            prev = z;
        }
    }
    return t;
}

ModelBundle zero_bundle() {
    auto b = ModelBundle::init(Architecture{}, 1);
    for (Mlp* net : {&b.e1, &b.e2, &b.g1, &b.g2})
        for (auto& layer : net->layers()) {
            for (auto& v : layer.weight.data()) v = 0.0;
            for (auto& v : layer.bias.data()) v = 0.0;
        }
    return b;
}

}  // namespace

TEST_CASE("Frechet distance of a sample with itself is zero") {
    Rng rng(1);
    const auto a = gaussian_cloud(500, 2, rng);
    CHECK(gaussian_frechet(a, a) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("a pure mean shift of (3, 4) gives 25") {
    Rng rng(2);
    const auto a = gaussian_cloud(400, 2, rng);
    Tensor b = a;
    for (std::size_t i = 0; i < b.rows(); ++i) {
        b.at(i, 0) += 3.0;
        b.at(i, 1) += 4.0;
    }
    CHECK(gaussian_frechet(a, b) == doctest::Approx(25.0).epsilon(1e-9));
}

TEST_CASE("closed-form 2-D Frechet matches the eigendecomposition oracle") {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const auto a = gaussian_cloud(30 + rng.index(50), 2, rng, rng.uniform(-0.9, 0.9));
        const auto b = gaussian_cloud(30 + rng.index(50), 2, rng, rng.uniform(-0.9, 0.9));
        CHECK(std::abs(gaussian_frechet(a, b) - oracle::frechet_eigen(a, b)) < 1e-8);
        CHECK(std::abs(gaussian_frechet(a, b) - gaussian_frechet(b, a)) < 1e-10);
    }
}

TEST_CASE("higher-dimensional Frechet matches the oracle too") {
    Rng rng(4);
    for (std::size_t d : {1u, 3u, 5u}) {
        const auto a = gaussian_cloud(60, d, rng);
        const auto b = gaussian_cloud(80, d, rng, -0.4);
        CHECK(std::abs(gaussian_frechet(a, b) - oracle::frechet_eigen(a, b)) < 1e-8);
    }
}

TEST_CASE("degenerate covariances stay finite and non-negative") {
    Tensor line({20, 2}, 0.0);
    for (std::size_t i = 0; i < 20; ++i) line.at(i, 0) = line.at(i, 1) = static_cast<double>(i);
    Tensor other = line;
    for (std::size_t i = 0; i < 20; ++i) other.at(i, 1) = -line.at(i, 1);
    const double v = gaussian_frechet(line, other);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(gaussian_frechet(line, line) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK_THROWS(gaussian_frechet(line.slice_rows(0, 2), line));
}

TEST_CASE("correspondence error: oracle zero, zero networks give the target RMS") {
    data::DomainSpec spec;
    spec.n = 200;
    spec.paired = true;
    const auto ds = data::gen_domain_pair(spec);
    const auto oracle_bundle = make_oracle_bundle(Architecture{}, *ds.map, 3);
    CHECK(correspondence_rmse(oracle_bundle, ds, Direction::x_to_y) < 1e-12);
    CHECK(correspondence_rmse(oracle_bundle, ds, Direction::y_to_x) < 1e-12);

    // Unit-norm inputs and a pure rotation: every target has norm 1.
    auto unit = ds;
    unit.map = data::AffineMap::rotation_scale(30.0, 1.0);
    for (std::size_t i = 0; i < unit.x.rows(); ++i) {
        const double r = std::hypot(unit.x.at(i, 0), unit.x.at(i, 1));
        unit.x.at(i, 0) /= r;
        unit.x.at(i, 1) /= r;
    }
    CHECK(correspondence_rmse(zero_bundle(), unit, Direction::x_to_y) == doctest::Approx(1.0).epsilon(1e-12));

    auto no_map = ds;
    no_map.map.reset();
    CHECK_THROWS(correspondence_rmse(oracle_bundle, no_map, Direction::x_to_y));
}

TEST_CASE("correspondence error of a random bundle equals a straight-line recomputation") {
    data::DomainSpec spec;
    spec.n = 100;
    const auto ds = data::gen_domain_pair(spec);
    const auto b = ModelBundle::init(Architecture{}, 17);
    const Tensor pred = b.g2.evaluate(b.e1.evaluate(ds.x));
    double s = 0.0;
    for (std::size_t i = 0; i < ds.x.rows(); ++i) {
        const auto t = ds.map->apply(ds.x.at(i, 0), ds.x.at(i, 1));
        s += std::pow(pred.at(i, 0) - t[0], 2) + std::pow(pred.at(i, 1) - t[1], 2);
    }
    CHECK(correspondence_rmse(b, ds, Direction::x_to_y) == doctest::Approx(std::sqrt(s / 100)).epsilon(1e-12));
}

TEST_CASE("OT distance matches brute force and ignores sample order") {
    Rng rng(5);
    const auto b = ModelBundle::init(Architecture{}, 2);
    for (std::size_t n = 1; n <= 6; ++n) {
        data::DomainDataset ds;
        ds.x = oracle::random_tensor({n, 2}, rng);
        ds.y = oracle::random_tensor({n, 2}, rng);
        const double v = ot_distribution_distance(b, ds, Direction::x_to_y, n);
        const auto fake = b.g2.evaluate(b.e1.evaluate(ds.x));
        const auto cost = oracle::pairwise_cost(fake, ds.y, ot::Metric::squared_l2);
        CHECK(v == doctest::Approx(oracle::brute_force_assignment(cost, n)).epsilon(1e-12));
        CHECK(v >= 0.0);

        auto shuffled = ds;
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = n - 1 - i;
        shuffled.x = ds.x.gather_rows(order);
        shuffled.y = ds.y.gather_rows(order);
        CHECK(ot_distribution_distance(b, shuffled, Direction::x_to_y, n) == doctest::Approx(v).epsilon(1e-12));
    }
    data::DomainDataset big;
    big.x = oracle::random_tensor({80, 2}, rng);
    big.y = big.x;
    CHECK_THROWS(ot_distribution_distance(b, big, Direction::x_to_y, 65));
}

TEST_CASE("perfect translation of identical point sets has zero OT distance") {
    data::DomainSpec spec;
    spec.n = 64;
    spec.paired = true;
    const auto ds = data::gen_domain_pair(spec);
    const auto b = make_oracle_bundle(Architecture{}, *ds.map, 0);
    CHECK(ot_distribution_distance(b, ds, Direction::x_to_y, 64) < 1e-20);
    CHECK(ot_distribution_distance(b, ds, Direction::y_to_x, 64) < 1e-20);
}

TEST_CASE("evaluating the oracle bundle yields all-zero errors") {
    data::DomainSpec spec;
    spec.n = 500;
    const auto ds = data::gen_domain_pair(spec);
    const auto b = make_oracle_bundle(Architecture{}, *ds.map, 0);
    const auto r = evaluate(b, ds, EvalConfig{});
    CHECK(r.frechet_x < 1e-9);
    CHECK(r.frechet_y < 1e-9);
    REQUIRE(r.correspondence_rmse);
    CHECK(*r.correspondence_rmse < 1e-9);
    CHECK(r.cycle_l1_x < 1e-9);
    CHECK(r.cycle_l1_y < 1e-9);
    CHECK(*r.w2_x < 1e-9);
    CHECK(*r.w2_y < 1e-9);
}

TEST_CASE("evaluation report fields equal the individual metrics and repeat exactly") {
    data::DomainSpec spec;
    spec.n = 300;
    const auto ds = data::gen_domain_pair(spec);
    const auto b = ModelBundle::init(Architecture{}, 4);
    const EvalConfig cfg{200, 16, 9};
    const auto r = evaluate(b, ds, cfg);
    const auto held = held_out(ds, cfg);
    CHECK(held.x.rows() == 200);
    CHECK_FALSE(held.x.slice_rows(0, 10) == ds.x.slice_rows(0, 10));
    CHECK(r.frechet_x == gaussian_frechet(translate(b, held.y, Direction::y_to_x), held.x));
    CHECK(r.frechet_y == gaussian_frechet(translate(b, held.x, Direction::x_to_y), held.y));
    CHECK(*r.correspondence_rmse == correspondence_rmse(b, held, Direction::x_to_y));
    CHECK(r.cycle_l1_x == cycle_l1(b, held.x, Direction::x_to_y));
    CHECK(*r.w2_y == ot_distribution_distance(b, held, Direction::x_to_y, 16));
    CHECK(r.csv_row(0.1, "ring") == evaluate(b, ds, cfg).csv_row(0.1, "ring"));
    CHECK(EvalReport::csv_header() == "lambda_z,task,frechet_x,frechet_y,corr_rmse,cycle_l1_x,cycle_l1_y,w2_x,w2_y");
    for (double v : {r.frechet_x, r.frechet_y, r.cycle_l1_x, r.cycle_l1_y, *r.w2_x, *r.w2_y})
        CHECK((std::isfinite(v) && v >= 0.0));
}
