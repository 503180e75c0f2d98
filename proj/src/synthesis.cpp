// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include "jwdm/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace jwdm {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size())
        throw std::runtime_error("trajectory line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Trajectory interpolate(const ModelBundle& bundle, const std::vector<double>& x_begin,
                       const std::vector<double>& x_end, int n) {
    if (n < 2) throw std::invalid_argument("interpolate: n must be >= 2");
    const auto dim = bundle.e1.input_dim();
    if (x_begin.size() != dim || x_end.size() != dim)
        throw std::invalid_argument("interpolate: endpoints must have " + std::to_string(dim) + " coordinates");

    Tensor ends({2, dim}, 0.0);
    std::copy(x_begin.begin(), x_begin.end(), ends.data().begin());
    std::copy(x_end.begin(), x_end.end(), ends.data().begin() + static_cast<std::ptrdiff_t>(dim));
    const Tensor z_ends = bundle.e1.evaluate(ends);
    const auto k = z_ends.cols();

    Trajectory t;
    t.x_begin = x_begin;
    t.x_end = x_end;
    const auto frames = static_cast<std::size_t>(n) + 1;
    t.latent = Tensor({frames, k}, 0.0);
    for (std::size_t f = 0; f < frames; ++f) {
        const double rho = static_cast<double>(n - static_cast<int>(f)) / n;
        t.rho.push_back(rho);
        for (std::size_t j = 0; j < k; ++j) {
            double z;
            if (f == 0) z = z_ends.at(0, j);
            else if (f + 1 == frames) z = z_ends.at(1, j);
            else z = z_ends.at(1, j) + rho * (z_ends.at(0, j) - z_ends.at(1, j));
            t.latent.at(f, j) = z;
        }
    }
    t.source = bundle.g1.evaluate(t.latent);
    t.target = bundle.g2.evaluate(t.latent);
    return t;
}

double affine_residual(const Trajectory& t) {
    const auto frames = t.latent.rows();
    const auto k = t.latent.cols();
    double worst = 0.0;
    for (std::size_t f = 0; f < frames; ++f)
        for (std::size_t j = 0; j < k; ++j) {
            const double expect =
                t.rho[f] * t.latent.at(0, j) + (1.0 - t.rho[f]) * t.latent.at(frames - 1, j);
            worst = std::max(worst, std::abs(t.latent.at(f, j) - expect));
        }
    return worst;
}

double max_step(const Tensor& frames) {
    double worst = 0.0;
    for (std::size_t f = 1; f < frames.rows(); ++f) {
        double s = 0.0;
        for (std::size_t j = 0; j < frames.cols(); ++j) {
            const double d = frames.at(f, j) - frames.at(f - 1, j);
            s += d * d;
        }
        worst = std::max(worst, std::sqrt(s));
    }
    return worst;
}

void export_trajectory(const Trajectory& t, const std::filesystem::path& path) {
    if (path.empty()) throw std::invalid_argument("export_trajectory: empty path");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write trajectory '" + path.string() + "'");
    const auto dim = std::max(t.source.cols(), t.target.cols());
    out << "frame,rho,domain";
    for (std::size_t j = 0; j < dim; ++j) out << ",dim" << j;
    out << '\n';
    for (std::size_t f = 0; f < t.frames(); ++f) {
        for (const auto& [label, pts] : {std::pair{"x", &t.source}, std::pair{"y", &t.target}}) {
            out << f << ',' << fmt17(t.rho[f]) << ',' << label;
            for (std::size_t j = 0; j < dim; ++j)
                out << ',' << (j < pts->cols() ? fmt17(pts->at(f, j)) : std::string());
            out << '\n';
        }
    }
    if (!out) throw std::runtime_error("short write on trajectory '" + path.string() + "'");
}

Trajectory import_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trajectory: empty file");
    const auto header = split(line);
    if (header.size() < 4 || header[0] != "frame" || header[1] != "rho" || header[2] != "domain")
        throw std::runtime_error("trajectory line 1: expected frame,rho,domain,dim0,...");
    const auto dim = header.size() - 3;
    std::vector<double> xs, ys;
    std::size_t x_dim = 0, y_dim = 0;
    Trajectory t;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": wrong column count");
        const auto frame = static_cast<std::size_t>(parse_double(cells[0], line_no));
        const double rho = parse_double(cells[1], line_no);
        std::vector<double> row;
        for (std::size_t j = 0; j < dim && !cells[3 + j].empty(); ++j)
            row.push_back(parse_double(cells[3 + j], line_no));
        if (cells[2] == "x") {
            if (frame != t.rho.size())
                throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": frames out of order");
            t.rho.push_back(rho);
            x_dim = row.size();
            xs.insert(xs.end(), row.begin(), row.end());
        } else if (cells[2] == "y") {
            if (frame + 1 != t.rho.size())
                throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": y row without x row");
            y_dim = row.size();
            ys.insert(ys.end(), row.begin(), row.end());
        } else {
            throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": unknown domain '" +
                                     cells[2] + "'");
        }
    }
    const auto frames = t.rho.size();
    if (frames == 0 || xs.size() != frames * x_dim || ys.size() != frames * y_dim)
        throw std::runtime_error("trajectory: inconsistent rows");
    t.source = Tensor({frames, x_dim}, std::move(xs));
    t.target = Tensor({frames, y_dim}, std::move(ys));
    return t;
}

void render_trajectory_ppm(const Trajectory& t, const std::filesystem::path& path, int size) {
    if (size < 16) throw std::invalid_argument("render_trajectory_ppm: size must be >= 16");
    double lo0 = std::numeric_limits<double>::infinity(), hi0 = -lo0, lo1 = lo0, hi1 = -lo0;
    for (const Tensor* pts : {&t.source, &t.target})
        for (std::size_t f = 0; f < pts->rows(); ++f) {
            lo0 = std::min(lo0, pts->at(f, 0));
            hi0 = std::max(hi0, pts->at(f, 0));
            lo1 = std::min(lo1, pts->at(f, 1));
            hi1 = std::max(hi1, pts->at(f, 1));
        }
    const double span = std::max({hi0 - lo0, hi1 - lo1, 1e-9}) * 1.1;
    const double c0 = 0.5 * (lo0 + hi0), c1 = 0.5 * (lo1 + hi1);
    std::vector<unsigned char> img(static_cast<std::size_t>(size) * size * 3, 255);
    auto dot = [&](double u, double v, int radius, unsigned char r, unsigned char g, unsigned char b) {
        const int px = static_cast<int>((u - c0) / span * (size - 1) + 0.5 * (size - 1));
        const int py = static_cast<int>((c1 - v) / span * (size - 1) + 0.5 * (size - 1));
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                const int x = px + dx, y = py + dy;
                if (x < 0 || y < 0 || x >= size || y >= size) continue;
                auto* p = &img[(static_cast<std::size_t>(y) * size + x) * 3];
                p[0] = r;
                p[1] = g;
                p[2] = b;
            }
    };
    for (std::size_t f = 0; f < t.frames(); ++f) {
        const int radius = (f == 0 || f + 1 == t.frames()) ? 3 : 1;
        dot(t.source.at(f, 0), t.source.at(f, 1), radius, 200, 30, 30);
        dot(t.target.at(f, 0), t.target.at(f, 1), radius, 30, 60, 200);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write image '" + path.string() + "'");
    out << "P6\n" << size << ' ' << size << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
}

}  // namespace jwdm
