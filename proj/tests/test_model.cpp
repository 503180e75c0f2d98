// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "jwdm/model.hpp"
#include "oracles.hpp"

using namespace jwdm;

namespace {

Architecture tiny_arch() {
    Architecture a;
    a.latent_dim = 3;
    a.ae_hidden = {5};
    a.disc_hidden = {4};
    return a;
}

double clamp_prob(double p) { return std::min(std::max(p, kProbFloor), 1.0 - kProbFloor); }

double mean_log_d(const Mlp& d, const Tensor& pts, bool complement) {
    const Tensor out = d.evaluate(pts);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double p = clamp_prob(out[i]);
        s += std::log(complement ? 1.0 - p : p);
    }
    return s / static_cast<double>(out.size());
}

double l1_rows(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.rows());
}

std::vector<std::pair<std::string, Tensor*>> named(std::vector<nn::ParamRef> ps) {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (auto& p : ps) out.emplace_back(p.name, p.tensor);
    return out;
}

}  // namespace

TEST_CASE("gan loss names round-trip") {
    CHECK(parse_gan_loss(to_string(GanLoss::minimax)) == GanLoss::minimax);
    CHECK(parse_gan_loss(to_string(GanLoss::non_saturating)) == GanLoss::non_saturating);
    CHECK_THROWS(parse_gan_loss("wasserstein"));
}

TEST_CASE("bundle initialization is seeded and validated") {
    const auto a = ModelBundle::init(tiny_arch(), 5);
    CHECK(a == ModelBundle::init(tiny_arch(), 5));
    CHECK_FALSE(a == ModelBundle::init(tiny_arch(), 6));
    CHECK(a.latent_dim == 3);
    auto broken = a;
    broken.latent_dim = 4;
    CHECK_THROWS(broken.validate());
    CHECK(a.swapped().e1 == a.e2);
    CHECK(a.swapped().swapped() == a);
}

TEST_CASE("loss terms equal a straight-line recomputation") {
    auto b = ModelBundle::init(tiny_arch(), 13);
    Rng rng(2);
    const auto x = oracle::random_tensor({6, 2}, rng);
    const auto y = oracle::random_tensor({6, 2}, rng);
    const auto prior = sample_prior(6, 3, rng);
    const LossWeights w{0.3, 0.7, 1.1, 0.4, GanLoss::non_saturating};

    // Reference paths through graph-free evaluation.
    const Tensor zx = b.e1.evaluate(x), zy = b.e2.evaluate(y);
    const Tensor x_rec = b.g1.evaluate(zx), y_rec = b.g2.evaluate(zy);
    const Tensor x_to_y = b.g2.evaluate(zx), y_to_x = b.g1.evaluate(zy);
    const Tensor x_cyc = b.g1.evaluate(b.e2.evaluate(x_to_y));
    const Tensor y_cyc = b.g2.evaluate(b.e1.evaluate(y_to_x));

    const double rx = l1_rows(x, x_rec) + l1_rows(x, x_cyc);
    const double ry = l1_rows(y, y_rec) + l1_rows(y, y_cyc);
    const double ax = -(w.lambda_mix * mean_log_d(b.dx, x_cyc, false) + (1 - w.lambda_mix) * mean_log_d(b.dx, y_to_x, false));
    const double ay = -(w.lambda_mix * mean_log_d(b.dy, y_cyc, false) + (1 - w.lambda_mix) * mean_log_d(b.dy, x_to_y, false));
    const double az1 = -0.5 * mean_log_d(b.dz, zx, false);
    const double az2 = -0.5 * mean_log_d(b.dz, zy, false);
    const double dx = mean_log_d(b.dx, x, false) + w.lambda_mix * mean_log_d(b.dx, x_cyc, true) +
                      (1 - w.lambda_mix) * mean_log_d(b.dx, y_to_x, true);
    const double dz = mean_log_d(b.dz, prior, false) + 0.5 * mean_log_d(b.dz, zx, true) + 0.5 * mean_log_d(b.dz, zy, true);

    Graph g;
    const auto src = forward_source(g, b, g.constant(x));
    const auto tgt = forward_target(g, b, g.constant(y));
    const auto gen = total_generator_loss(g, b, src, tgt, w);
    const auto br = gen.breakdown();
    CHECK(br.recon_x == doctest::Approx(rx).epsilon(1e-12));
    CHECK(br.recon_y == doctest::Approx(ry).epsilon(1e-12));
    CHECK(br.adv_x == doctest::Approx(ax).epsilon(1e-12));
    CHECK(br.adv_y == doctest::Approx(ay).epsilon(1e-12));
    CHECK(br.adv_z1 == doctest::Approx(az1).epsilon(1e-12));
    CHECK(br.adv_z2 == doctest::Approx(az2).epsilon(1e-12));
    CHECK(br.total == doctest::Approx(rx + ry + w.lambda_x * ax + w.lambda_y * ay + w.lambda_z * (az1 + az2)).epsilon(1e-12));
    CHECK(br.total == doctest::Approx(br.weighted_total(w)).epsilon(1e-14));

    Graph dg;
    const auto d = discriminator_objective(dg, b, x, y, prior, src, tgt, w);
    CHECK(d.disc_x.item() == doctest::Approx(dx).epsilon(1e-12));
    CHECK(d.disc_z.item() == doctest::Approx(dz).epsilon(1e-12));
    CHECK(d.objective.item() == doctest::Approx(w.lambda_x * dx + w.lambda_y * d.disc_y.item() + w.lambda_z * dz).epsilon(1e-12));
}

TEST_CASE("minimax generator loss uses log(1 - D)") {
    auto b = ModelBundle::init(tiny_arch(), 3);
    Rng rng(4);
    const auto z = oracle::random_tensor({5, 3}, rng);
    Graph g;
    const double v = latent_gen_loss(g, b.dz, g.constant(z), GanLoss::minimax).item();
    CHECK(v == doctest::Approx(0.5 * mean_log_d(b.dz, z, true)).epsilon(1e-12));
}

TEST_CASE("discriminator outputs are clamped before the log") {
    auto b = ModelBundle::init(tiny_arch(), 3);
    auto& head = b.dz.layers().back();
    for (auto& v : head.bias.data()) v = 1e4;
    Graph g;
    const auto p = discriminate(g, b.dz, g.constant(Tensor({2, 3}, 0.0)));
    CHECK(p.value()[0] == 1.0 - kProbFloor);
    const auto l = latent_disc_loss(g, b.dz, g.constant(Tensor({2, 3}, 0.0)), g.constant(Tensor({2, 3}, 0.0)),
                                    g.constant(Tensor({2, 3}, 0.0)));
    CHECK(std::isfinite(l.item()));
}

TEST_CASE("generator objective gradients match finite differences") {
    Architecture a = tiny_arch();
    a.ae_hidden = {4};
    a.disc_hidden = {3};
    a.latent_dim = 2;
    auto b = ModelBundle::init(a, 29);
    Rng rng(6);
    const auto x = oracle::random_tensor({3, 2}, rng);
    const auto y = oracle::random_tensor({3, 2}, rng);
    for (auto kind : {GanLoss::non_saturating, GanLoss::minimax}) {
        const LossWeights w{0.5, 0.25, 0.75, 0.5, kind};
        const auto r = oracle::check_gradients(
            [&](Graph& g) { return total_generator_loss(g, b, g.constant(x), g.constant(y), w).total; },
            named(b.all_parameters()));
        CAPTURE(r.worst);
        CHECK(r.max_rel_error < 1e-4);
    }
}

TEST_CASE("discriminator objective only reaches discriminator parameters") {
    auto b = ModelBundle::init(tiny_arch(), 8);
    Rng rng(9);
    const auto x = oracle::random_tensor({4, 2}, rng);
    const auto y = oracle::random_tensor({4, 2}, rng);
    Graph g;
    const auto src = forward_source(g, b, g.constant(x));
    const auto tgt = forward_target(g, b, g.constant(y));
    for (auto& p : b.generator_parameters()) p.tensor->clear_grad();
    Graph dg;
    const auto d = discriminator_objective(dg, b, x, y, sample_prior(4, 3, rng), src, tgt, LossWeights{});
    dg.backward(-d.objective);
    for (auto& p : b.generator_parameters()) CHECK_FALSE(p.tensor->has_grad());
    double norm = 0.0;
    for (auto& p : b.discriminator_parameters())
        for (double v : p.tensor->grad()) norm += v * v;
    CHECK(norm > 0.0);
}

TEST_CASE("oracle bundle realizes the map and its inverse") {
    const Architecture a;
    const auto map = data::AffineMap::rotation_scale(90.0, 0.5);
    const auto b = make_oracle_bundle(a, map, 1);
    b.validate();
    Rng rng(10);
    const auto x = oracle::random_tensor({50, 2}, rng, -2.0, 2.0);
    const Tensor fx = b.g2.evaluate(b.e1.evaluate(x));
    const Tensor mx = map.apply(x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(fx[i] == doctest::Approx(mx[i]).epsilon(1e-12));
    const Tensor back = b.g1.evaluate(b.e2.evaluate(mx));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
    const Tensor ae = b.g1.evaluate(b.e1.evaluate(x));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(ae[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("prior samples are standard normal") {
    Rng rng(77);
    const auto z = sample_prior(4000, 2, rng);
    double m = 0, v = 0;
    for (double e : z.data()) m += e;
    m /= z.size();
    for (double e : z.data()) v += (e - m) * (e - m);
    v /= z.size() - 1;
    CHECK(std::abs(m) < 4.0 / std::sqrt(8000.0));
    CHECK(v == doctest::Approx(1.0).epsilon(0.05));
}
