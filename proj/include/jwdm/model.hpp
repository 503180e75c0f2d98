// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Encoders E1: X -> Z, E2: Y -> Z, decoders G1: Z -> X, G2: Z -> Y and the
// discriminators Dx, Dy, Dz, together with every loss term of the joint
// objective
//
//   R_x + R_y + lambda_x d(P_X, Q_X) + lambda_y d(P_Y, Q_Y) + lambda_z d(P_Z, Q_Z)
//
// where each divergence is a GAN log-loss. Fake samples of Q_X mix the cycle
// path G1(E2(G2(E1(x)))) and the translation path G1(E2(y)) with weights
// lambda_mix and 1 - lambda_mix (mirrored for Q_Y). One latent
// discriminator Dz serves both encoders; its two branches get weight 1/2.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "jwdm/autodiff.hpp"
#include "jwdm/data.hpp"
#include "jwdm/nn.hpp"

namespace jwdm {

using ad::Graph;
using ad::Tensor;
using ad::Var;
using nn::Mlp;
using nn::ParamRef;

/// Discriminator outputs are clamped into [kProbFloor, 1 - kProbFloor]
/// before any log is taken.
inline constexpr double kProbFloor = 1e-6;

enum class GanLoss { minimax, non_saturating };

std::string_view to_string(GanLoss g);
GanLoss parse_gan_loss(std::string_view name);

struct Architecture {
    std::size_t x_dim = 2;
    std::size_t y_dim = 2;
    std::size_t latent_dim = 8;
    std::vector<std::size_t> ae_hidden{64, 64};
    std::vector<std::size_t> disc_hidden{64, 64};
    double leaky_slope = 0.01;

    bool operator==(const Architecture&) const = default;
};

struct LossWeights {
    double lambda_x = 0.1;
    double lambda_y = 0.1;
    double lambda_z = 0.1;
    double lambda_mix = 0.5;
    GanLoss gan_loss = GanLoss::non_saturating;
};

struct ModelBundle {
    Mlp e1, e2, g1, g2;
    Mlp dx, dy, dz;
    std::size_t latent_dim = 0;

    /// Encoders/decoders use ReLU hidden layers and identity outputs;
    /// discriminators use leaky-ReLU hidden layers and a sigmoid output.
    static ModelBundle init(const Architecture& arch, std::uint64_t seed);

    /// E1, E2, G1, G2 parameters, in that order.
    std::vector<ParamRef> generator_parameters();
    /// Dx, Dy, Dz parameters, in that order.
    std::vector<ParamRef> discriminator_parameters();
    std::vector<ParamRef> all_parameters();

    /// Throws if latent widths disagree or a discriminator lacks a sigmoid head.
    void validate() const;

    /// Bundle with the X and Y roles exchanged (E1<->E2, G1<->G2, Dx<->Dy).
    ModelBundle swapped() const;

    bool operator==(const ModelBundle&) const = default;
};

/// Discriminator probability with the output clamp applied.
Var discriminate(Graph& graph, Mlp& d, Var input);

/// Source-side paths: z = E1(x), recon = G1(z), translated = G2(z),
/// cycle = G1(E2(translated)).
struct SourcePaths {
    Var x, z, recon, translated, z_cycle, cycle;
};
/// Target-side paths: z = E2(y), recon = G2(z), translated = G1(z),
/// cycle = G2(E1(translated)).
struct TargetPaths {
    Var y, z, recon, translated, z_cycle, cycle;
};

SourcePaths forward_source(Graph& graph, ModelBundle& bundle, Var x);
TargetPaths forward_target(Graph& graph, ModelBundle& bundle, Var y);

/// Batch mean of ||v - recon||_1 + ||v - cycle||_1.
Var cycle_reconstruction(Var v, Var recon, Var cycle);

Var recon_loss_x(Graph& graph, ModelBundle& bundle, Var x);
Var recon_loss_y(Graph& graph, ModelBundle& bundle, Var y);

/// Generator-side term (descended) and discriminator-side term (ascended).
struct AdversarialTerms {
    Var gen;
    Var disc;
};

/// E[log D(real)] + mix E[log(1 - D(cycle))] + (1 - mix) E[log(1 - D(translated))].
/// The fakes should already be detached.
Var domain_disc_loss(Graph& graph, Mlp& d, Var real, Var fake_cycle, Var fake_translated,
                     double lambda_mix);
Var domain_gen_loss(Graph& graph, Mlp& d, Var fake_cycle, Var fake_translated, double lambda_mix,
                    GanLoss kind);

/// E_z[log Dz(z)] + 1/2 E[log(1 - Dz(z1))] + 1/2 E[log(1 - Dz(z2))].
Var latent_disc_loss(Graph& graph, Mlp& dz, Var prior, Var z1, Var z2);
/// Generator side of one latent branch, including its 1/2 weight.
Var latent_gen_loss(Graph& graph, Mlp& dz, Var z, GanLoss kind);

AdversarialTerms adv_x_terms(Graph& graph, ModelBundle& bundle, Var x, Var y, double lambda_mix,
                             GanLoss kind = GanLoss::non_saturating);
AdversarialTerms adv_y_terms(Graph& graph, ModelBundle& bundle, Var x, Var y, double lambda_mix,
                             GanLoss kind = GanLoss::non_saturating);

struct LatentTerms {
    Var gen_z1;
    Var gen_z2;
    Var disc;
};
LatentTerms adv_z_terms(Graph& graph, ModelBundle& bundle, Var x, Var y, Var prior,
                        GanLoss kind = GanLoss::non_saturating);

struct LossBreakdown {
    double recon_x = 0.0;
    double recon_y = 0.0;
    double adv_x = 0.0;
    double adv_y = 0.0;
    double adv_z1 = 0.0;
    double adv_z2 = 0.0;
    double total = 0.0;
    double disc_x = 0.0;
    double disc_y = 0.0;
    double disc_z = 0.0;

    /// recon_x + recon_y + lx adv_x + ly adv_y + lz (adv_z1 + adv_z2).
    double weighted_total(const LossWeights& w) const;
};

struct GeneratorObjective {
    Var total;
    Var recon_x, recon_y, adv_x, adv_y, adv_z1, adv_z2;

    /// Generator fields of a LossBreakdown (discriminator fields left zero).
    LossBreakdown breakdown() const;
};

GeneratorObjective total_generator_loss(Graph& graph, ModelBundle& bundle,
                                        const SourcePaths& source, const TargetPaths& target,
                                        const LossWeights& weights);
GeneratorObjective total_generator_loss(Graph& graph, ModelBundle& bundle, Var x, Var y,
                                        const LossWeights& weights);

struct DiscriminatorObjective {
    Var objective;  // lx disc_x + ly disc_y + lz disc_z, ascended
    Var disc_x, disc_y, disc_z;
};

/// Discriminator objective over detached copies of the given generator paths.
DiscriminatorObjective discriminator_objective(Graph& graph, ModelBundle& bundle,
                                               const Tensor& x, const Tensor& y,
                                               const Tensor& prior, const SourcePaths& source,
                                               const TargetPaths& target,
                                               const LossWeights& weights);

/// Prior P_Z: standard normal, [batch x latent_dim].
Tensor sample_prior(std::size_t batch, std::size_t latent_dim, Rng& rng);

/// Network of the given architecture computing u = A v[0:2] + t through
/// ReLU pairs relu(u) - relu(-u), zero-padded to `out_dim`. Needs ReLU hidden
/// layers at least 4 units wide and in/out dims of at least 2.
Mlp affine_relu_network(std::size_t in_dim, std::size_t out_dim,
                        const std::vector<std::size_t>& hidden, const data::AffineMap& map);

/// Encoders and decoders realizing the map exactly: G2(E1(x)) = map(x),
/// G1(E2(y)) = map^{-1}(y), both auto-encoders the identity. Discriminators
/// are freshly initialized from `seed`.
ModelBundle make_oracle_bundle(const Architecture& arch, const data::AffineMap& map,
                               std::uint64_t seed);

}  // namespace jwdm
