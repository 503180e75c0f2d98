// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include "jwdm/model.hpp"

#include <stdexcept>

namespace jwdm {

using nn::Activation;

std::string_view to_string(GanLoss g) {
    return g == GanLoss::minimax ? "minimax" : "non_saturating";
}

GanLoss parse_gan_loss(std::string_view name) {
    if (name == "minimax") return GanLoss::minimax;
    if (name == "non_saturating" || name == "non-saturating") return GanLoss::non_saturating;
    throw std::invalid_argument("unknown gan loss '" + std::string(name) +
                                "' (expected minimax or non_saturating)");
}

namespace {

Mlp make_net(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
             Activation hidden_act, Activation out_act, std::uint64_t seed, double slope) {
    std::vector<std::size_t> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    std::vector<Activation> acts(hidden.size(), hidden_act);
    acts.push_back(out_act);
    return Mlp::init(dims, acts, seed, slope);
}

void append(std::vector<ParamRef>& out, std::vector<ParamRef> more) {
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

void require_lambda_mix(double lambda_mix) {
    if (!(lambda_mix > 0.0 && lambda_mix < 1.0))
        throw std::invalid_argument("lambda_mix must lie in (0, 1), got " +
                                    std::to_string(lambda_mix));
}

// Batch mean of log(p) for a [batch x 1] probability column.
Var mean_log(Var p) { return ad::mean(ad::log(p)); }
Var mean_log1m(Var p) { return ad::mean(ad::log(1.0 - p)); }

}  // namespace

ModelBundle ModelBundle::init(const Architecture& a, std::uint64_t seed) {
    if (a.latent_dim == 0 || a.x_dim == 0 || a.y_dim == 0)
        throw std::invalid_argument("architecture dimensions must be positive");
    std::vector<std::size_t> dec_hidden(a.ae_hidden.rbegin(), a.ae_hidden.rend());
    ModelBundle b;
    b.latent_dim = a.latent_dim;
    const double s = a.leaky_slope;
    b.e1 = make_net(a.x_dim, a.ae_hidden, a.latent_dim, Activation::relu, Activation::identity,
                    derive_seed(seed, 1), s);
    b.e2 = make_net(a.y_dim, a.ae_hidden, a.latent_dim, Activation::relu, Activation::identity,
                    derive_seed(seed, 2), s);
    b.g1 = make_net(a.latent_dim, dec_hidden, a.x_dim, Activation::relu, Activation::identity,
                    derive_seed(seed, 3), s);
    b.g2 = make_net(a.latent_dim, dec_hidden, a.y_dim, Activation::relu, Activation::identity,
                    derive_seed(seed, 4), s);
    b.dx = make_net(a.x_dim, a.disc_hidden, 1, Activation::leaky_relu, Activation::sigmoid,
                    derive_seed(seed, 5), s);
    b.dy = make_net(a.y_dim, a.disc_hidden, 1, Activation::leaky_relu, Activation::sigmoid,
                    derive_seed(seed, 6), s);
    b.dz = make_net(a.latent_dim, a.disc_hidden, 1, Activation::leaky_relu, Activation::sigmoid,
                    derive_seed(seed, 7), s);
    b.validate();
    return b;
}

std::vector<ParamRef> ModelBundle::generator_parameters() {
    std::vector<ParamRef> p;
    append(p, e1.parameters("E1"));
    append(p, e2.parameters("E2"));
    append(p, g1.parameters("G1"));
    append(p, g2.parameters("G2"));
    return p;
}

std::vector<ParamRef> ModelBundle::discriminator_parameters() {
    std::vector<ParamRef> p;
    append(p, dx.parameters("Dx"));
    append(p, dy.parameters("Dy"));
    append(p, dz.parameters("Dz"));
    return p;
}

std::vector<ParamRef> ModelBundle::all_parameters() {
    auto p = generator_parameters();
    append(p, discriminator_parameters());
    return p;
}

void ModelBundle::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("ModelBundle: " + msg); };
    if (e1.output_dim() != latent_dim || e2.output_dim() != latent_dim)
        fail("encoder outputs must equal latent_dim " + std::to_string(latent_dim));
    if (g1.input_dim() != latent_dim || g2.input_dim() != latent_dim)
        fail("decoder inputs must equal latent_dim " + std::to_string(latent_dim));
    if (g1.output_dim() != e1.input_dim()) fail("G1 must map back to the E1 input space");
    if (g2.output_dim() != e2.input_dim()) fail("G2 must map back to the E2 input space");
    if (dx.input_dim() != e1.input_dim() || dy.input_dim() != e2.input_dim() ||
        dz.input_dim() != latent_dim)
        fail("discriminator input widths do not match their spaces");
    for (const Mlp* d : {&dx, &dy, &dz}) {
        if (d->output_dim() != 1 || d->layers().back().activation != Activation::sigmoid)
            fail("discriminators need a single sigmoid output");
    }
}

ModelBundle ModelBundle::swapped() const {
    ModelBundle b = *this;
    std::swap(b.e1, b.e2);
    std::swap(b.g1, b.g2);
    std::swap(b.dx, b.dy);
    return b;
}

Var discriminate(Graph& graph, Mlp& d, Var input) {
    return ad::clamp(d.forward(graph, input), kProbFloor, 1.0 - kProbFloor);
}

SourcePaths forward_source(Graph& g, ModelBundle& b, Var x) {
    SourcePaths p;
    p.x = x;
    p.z = b.e1.forward(g, x);
    p.recon = b.g1.forward(g, p.z);
    p.translated = b.g2.forward(g, p.z);
    p.z_cycle = b.e2.forward(g, p.translated);
    p.cycle = b.g1.forward(g, p.z_cycle);
    return p;
}

TargetPaths forward_target(Graph& g, ModelBundle& b, Var y) {
    TargetPaths p;
    p.y = y;
    p.z = b.e2.forward(g, y);
    p.recon = b.g2.forward(g, p.z);
    p.translated = b.g1.forward(g, p.z);
    p.z_cycle = b.e1.forward(g, p.translated);
    p.cycle = b.g2.forward(g, p.z_cycle);
    return p;
}

Var cycle_reconstruction(Var v, Var recon, Var cycle) {
    const auto batch = static_cast<double>(v.shape()[0]);
    return ad::scale(ad::sum(ad::abs(v - recon)) + ad::sum(ad::abs(v - cycle)), 1.0 / batch);
}

Var recon_loss_x(Graph& g, ModelBundle& b, Var x) {
    const auto p = forward_source(g, b, x);
    return cycle_reconstruction(p.x, p.recon, p.cycle);
}

Var recon_loss_y(Graph& g, ModelBundle& b, Var y) {
    const auto p = forward_target(g, b, y);
    return cycle_reconstruction(p.y, p.recon, p.cycle);
}

Var domain_disc_loss(Graph& g, Mlp& d, Var real, Var fake_cycle, Var fake_translated,
                     double lambda_mix) {
    require_lambda_mix(lambda_mix);
    return mean_log(discriminate(g, d, real)) +
           lambda_mix * mean_log1m(discriminate(g, d, fake_cycle)) +
           (1.0 - lambda_mix) * mean_log1m(discriminate(g, d, fake_translated));
}

Var domain_gen_loss(Graph& g, Mlp& d, Var fake_cycle, Var fake_translated, double lambda_mix,
                    GanLoss kind) {
    require_lambda_mix(lambda_mix);
    const Var p_cycle = discriminate(g, d, fake_cycle);
    const Var p_trans = discriminate(g, d, fake_translated);
    if (kind == GanLoss::minimax)
        return lambda_mix * mean_log1m(p_cycle) + (1.0 - lambda_mix) * mean_log1m(p_trans);
    return -(lambda_mix * mean_log(p_cycle) + (1.0 - lambda_mix) * mean_log(p_trans));
}

Var latent_disc_loss(Graph& g, Mlp& dz, Var prior, Var z1, Var z2) {
    return mean_log(discriminate(g, dz, prior)) + 0.5 * mean_log1m(discriminate(g, dz, z1)) +
           0.5 * mean_log1m(discriminate(g, dz, z2));
}

Var latent_gen_loss(Graph& g, Mlp& dz, Var z, GanLoss kind) {
    const Var p = discriminate(g, dz, z);
    return kind == GanLoss::minimax ? 0.5 * mean_log1m(p) : -0.5 * mean_log(p);
}

AdversarialTerms adv_x_terms(Graph& g, ModelBundle& b, Var x, Var y, double lambda_mix,
                             GanLoss kind) {
    require_lambda_mix(lambda_mix);
    const auto src = forward_source(g, b, x);
    const auto tgt = forward_target(g, b, y);
    AdversarialTerms t;
    t.gen = domain_gen_loss(g, b.dx, src.cycle, tgt.translated, lambda_mix, kind);
    t.disc = domain_disc_loss(g, b.dx, x, g.detach(src.cycle), g.detach(tgt.translated), lambda_mix);
    return t;
}

AdversarialTerms adv_y_terms(Graph& g, ModelBundle& b, Var x, Var y, double lambda_mix,
                             GanLoss kind) {
    require_lambda_mix(lambda_mix);
    const auto src = forward_source(g, b, x);
    const auto tgt = forward_target(g, b, y);
    AdversarialTerms t;
    t.gen = domain_gen_loss(g, b.dy, tgt.cycle, src.translated, lambda_mix, kind);
    t.disc = domain_disc_loss(g, b.dy, y, g.detach(tgt.cycle), g.detach(src.translated), lambda_mix);
    return t;
}

LatentTerms adv_z_terms(Graph& g, ModelBundle& b, Var x, Var y, Var prior, GanLoss kind) {
    if (prior.shape().size() != 2 || prior.shape()[1] != b.latent_dim)
        throw ad::ShapeError("adv_z_terms: prior samples must be [batch x " +
                             std::to_string(b.latent_dim) + "], got " + ad::to_string(prior.shape()));
    const Var z1 = b.e1.forward(g, x);
    const Var z2 = b.e2.forward(g, y);
    LatentTerms t;
    t.gen_z1 = latent_gen_loss(g, b.dz, z1, kind);
    t.gen_z2 = latent_gen_loss(g, b.dz, z2, kind);
    t.disc = latent_disc_loss(g, b.dz, prior, g.detach(z1), g.detach(z2));
    return t;
}

double LossBreakdown::weighted_total(const LossWeights& w) const {
    return recon_x + recon_y + w.lambda_x * adv_x + w.lambda_y * adv_y +
           w.lambda_z * (adv_z1 + adv_z2);
}

LossBreakdown GeneratorObjective::breakdown() const {
    LossBreakdown r;
    r.recon_x = recon_x.item();
    r.recon_y = recon_y.item();
    r.adv_x = adv_x.item();
    r.adv_y = adv_y.item();
    r.adv_z1 = adv_z1.item();
    r.adv_z2 = adv_z2.item();
    r.total = total.item();
    return r;
}

GeneratorObjective total_generator_loss(Graph& g, ModelBundle& b, const SourcePaths& src,
                                        const TargetPaths& tgt, const LossWeights& w) {
    if (w.lambda_x < 0.0 || w.lambda_y < 0.0 || w.lambda_z < 0.0)
        throw std::invalid_argument("loss weights must be non-negative");
    GeneratorObjective o;
    o.recon_x = cycle_reconstruction(src.x, src.recon, src.cycle);
    o.recon_y = cycle_reconstruction(tgt.y, tgt.recon, tgt.cycle);
    o.adv_x = domain_gen_loss(g, b.dx, src.cycle, tgt.translated, w.lambda_mix, w.gan_loss);
    o.adv_y = domain_gen_loss(g, b.dy, tgt.cycle, src.translated, w.lambda_mix, w.gan_loss);
    o.adv_z1 = latent_gen_loss(g, b.dz, src.z, w.gan_loss);
    o.adv_z2 = latent_gen_loss(g, b.dz, tgt.z, w.gan_loss);
    o.total = o.recon_x + o.recon_y + w.lambda_x * o.adv_x + w.lambda_y * o.adv_y +
              w.lambda_z * (o.adv_z1 + o.adv_z2);
    return o;
}

GeneratorObjective total_generator_loss(Graph& g, ModelBundle& b, Var x, Var y,
                                        const LossWeights& w) {
    const auto src = forward_source(g, b, x);
    const auto tgt = forward_target(g, b, y);
    return total_generator_loss(g, b, src, tgt, w);
}

DiscriminatorObjective discriminator_objective(Graph& g, ModelBundle& b, const Tensor& x,
                                               const Tensor& y, const Tensor& prior,
                                               const SourcePaths& src, const TargetPaths& tgt,
                                               const LossWeights& w) {
    auto frozen = [&g](Var v) { return g.constant(v.value()); };
    DiscriminatorObjective o;
    o.disc_x = domain_disc_loss(g, b.dx, g.constant(x), frozen(src.cycle), frozen(tgt.translated),
                                w.lambda_mix);
    o.disc_y = domain_disc_loss(g, b.dy, g.constant(y), frozen(tgt.cycle), frozen(src.translated),
                                w.lambda_mix);
    o.disc_z = latent_disc_loss(g, b.dz, g.constant(prior), frozen(src.z), frozen(tgt.z));
    o.objective = w.lambda_x * o.disc_x + w.lambda_y * o.disc_y + w.lambda_z * o.disc_z;
    return o;
}

Tensor sample_prior(std::size_t batch, std::size_t latent_dim, Rng& rng) {
    Tensor z({batch, latent_dim}, 0.0);
    for (auto& v : z.data()) v = rng.normal();
    return z;
}

Mlp affine_relu_network(std::size_t in_dim, std::size_t out_dim,
                        const std::vector<std::size_t>& hidden, const data::AffineMap& map) {
    if (in_dim < 2 || out_dim < 2) throw std::invalid_argument("affine_relu_network: dims must be >= 2");
    if (hidden.empty()) throw std::invalid_argument("affine_relu_network: needs a hidden layer");
    for (auto h : hidden)
        if (h < 4) throw std::invalid_argument("affine_relu_network: hidden layers need >= 4 units");

    std::vector<std::size_t> dims{in_dim};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out_dim);
    std::vector<Activation> acts(hidden.size(), Activation::relu);
    acts.push_back(Activation::identity);
    Mlp net = Mlp::init(dims, acts, 0);
    for (auto& layer : net.layers()) {
        for (auto& v : layer.weight.data()) v = 0.0;
        for (auto& v : layer.bias.data()) v = 0.0;
    }
    auto& layers = net.layers();
    // First layer: [u, -u] with u = A v[0:2] + t.
    auto& first = layers.front();
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < 2; ++i) {
            first.weight.at(i, j) = map.a[j * 2 + i];
            first.weight.at(i, 2 + j) = -map.a[j * 2 + i];
        }
        first.bias[j] = map.t[j];
        first.bias[2 + j] = -map.t[j];
    }
    // Hidden-to-hidden layers pass the four non-negative units through.
    for (std::size_t l = 1; l + 1 < layers.size(); ++l)
        for (std::size_t k = 0; k < 4; ++k) layers[l].weight.at(k, k) = 1.0;
    auto& last = layers.back();
    for (std::size_t j = 0; j < 2; ++j) {
        last.weight.at(j, j) = 1.0;
        last.weight.at(2 + j, j) = -1.0;
    }
    return net;
}

ModelBundle make_oracle_bundle(const Architecture& arch, const data::AffineMap& map,
                               std::uint64_t seed) {
    if (arch.x_dim != 2 || arch.y_dim != 2)
        throw std::invalid_argument("make_oracle_bundle: only planar domains are supported");
    ModelBundle b = ModelBundle::init(arch, seed);
    const std::vector<std::size_t> dec_hidden(arch.ae_hidden.rbegin(), arch.ae_hidden.rend());
    const data::AffineMap identity{};
    b.e1 = affine_relu_network(2, arch.latent_dim, arch.ae_hidden, identity);
    b.e2 = affine_relu_network(2, arch.latent_dim, arch.ae_hidden, map.inverse());
    b.g1 = affine_relu_network(arch.latent_dim, 2, dec_hidden, identity);
    b.g2 = affine_relu_network(arch.latent_dim, 2, dec_hidden, map);
    b.validate();
    return b;
}

}  // namespace jwdm
