// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jwdm/model.hpp"

namespace jwdm {

/// Synchronized frames in both domains decoded from one latent path.
///
/// Frame k decodes z_k = rho[k] z_begin + (1 - rho[k]) z_end with rho running
/// 1, (n-1)/n, ..., 1/n, 0, so frames progress from begin to end. Source
/// frames are G1(z_k), target frames G2(z_k); the raw inputs are kept as
/// provenance.
struct Trajectory {
    std::vector<double> rho;   // n + 1 entries, strictly decreasing
    Tensor source;             // [(n + 1) x x_dim]
    Tensor target;             // [(n + 1) x y_dim]
    Tensor latent;             // [(n + 1) x latent_dim]
    std::vector<double> x_begin;
    std::vector<double> x_end;
    std::string checkpoint_id;

    std::size_t frames() const { return rho.size(); }
};

/// Interpolates between the encodings of two source-domain points. n >= 2.
Trajectory interpolate(const ModelBundle& bundle, const std::vector<double>& x_begin,
                       const std::vector<double>& x_end, int n);

/// Largest deviation of an interior latent from rho z_begin + (1 - rho) z_end.
double affine_residual(const Trajectory& traj);

/// Largest L2 distance between consecutive frames of one domain.
double max_step(const Tensor& frames);

/// CSV with header frame,rho,domain,dim0,...; one row per frame and domain
/// (domain "x" rows first within a frame).
void export_trajectory(const Trajectory& traj, const std::filesystem::path& path);
/// Reads rho, source and target frames back.
Trajectory import_trajectory(const std::filesystem::path& path);

/// Scatter plot of both loci (binary PPM). Source frames red, target blue,
/// endpoints drawn larger.
void render_trajectory_ppm(const Trajectory& traj, const std::filesystem::path& path,
                           int size = 256);

}  // namespace jwdm
