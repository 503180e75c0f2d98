// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include "jwdm/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace jwdm::data {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view s, std::string_view what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end)
        throw std::invalid_argument("invalid number '" + std::string(s) + "' for " + std::string(what));
    return v;
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end)
        throw std::invalid_argument("invalid integer '" + std::string(s) + "' for " + std::string(what));
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Centers of a gauss-mix layout: a near-square grid spanning [-r, r]^2.
std::vector<std::array<double, 2>> grid_centers(std::size_t k, double r) {
    if (k == 1) return {{0.0, 0.0}};
    const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(k))));
    std::vector<std::array<double, 2>> c;
    for (std::size_t i = 0; i < k; ++i) {
        const double gx = static_cast<double>(i % side), gy = static_cast<double>(i / side);
        const double step = side > 1 ? 2.0 * r / static_cast<double>(side - 1) : 0.0;
        c.push_back({-r + gx * step, -r + gy * step});
    }
    return c;
}

const AffineMap kDefaultMoonsMap{{0.6, -0.4, 0.3, 0.9}, {0.5, -0.5}};

}  // namespace

std::string_view to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::gauss_mix: return "gauss-mix";
        case DomainKind::ring: return "ring";
        case DomainKind::two_moons_affine: return "two-moons-affine";
    }
    return "ring";
}

DomainKind parse_domain_kind(std::string_view name) {
    for (auto k : {DomainKind::gauss_mix, DomainKind::ring, DomainKind::two_moons_affine})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown domain kind '" + std::string(name) +
                                "' (expected gauss-mix, ring or two-moons-affine)");
}

AffineMap AffineMap::rotation_scale(double degrees, double scale) {
    const double th = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    return AffineMap{{scale * c, -scale * s, scale * s, scale * c}, {0.0, 0.0}};
}

std::array<double, 2> AffineMap::apply(double x0, double x1) const {
    return {a[0] * x0 + a[1] * x1 + t[0], a[2] * x0 + a[3] * x1 + t[1]};
}

AffineMap AffineMap::inverse() const {
    const double det = a[0] * a[3] - a[1] * a[2];
    if (std::fabs(det) < 1e-300) throw std::domain_error("AffineMap::inverse: singular map");
    AffineMap inv;
    inv.a = {a[3] / det, -a[1] / det, -a[2] / det, a[0] / det};
    inv.t = {-(inv.a[0] * t[0] + inv.a[1] * t[1]), -(inv.a[2] * t[0] + inv.a[3] * t[1])};
    return inv;
}

Tensor AffineMap::apply(const Tensor& points) const {
    if (points.rank() != 2 || points.cols() != 2)
        throw ad::ShapeError("AffineMap::apply expects [n x 2] points, got " +
                             ad::to_string(points.shape()));
    Tensor out(points.shape(), 0.0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto y = apply(points.at(i, 0), points.at(i, 1));
        out.at(i, 0) = y[0];
        out.at(i, 1) = y[1];
    }
    return out;
}

AffineMap DomainSpec::target_map() const {
    if (affine) return *affine;
    if (kind == DomainKind::two_moons_affine) return kDefaultMoonsMap;
    return AffineMap::rotation_scale(rotation_deg, scale);
}

std::map<std::string, std::string> DomainSpec::to_fields() const {
    std::map<std::string, std::string> f{
        {"kind", std::string(to_string(kind))},
        {"n", std::to_string(n)},
        {"seed", std::to_string(seed)},
        {"components", std::to_string(components)},
        {"radius", fmt17(radius)},
        {"stddev", fmt17(stddev)},
        {"band", fmt17(band)},
        {"rotation_deg", fmt17(rotation_deg)},
        {"scale", fmt17(scale)},
        {"moon_noise", fmt17(moon_noise)},
        {"paired", paired ? "true" : "false"},
    };
    if (affine) {
        std::string s;
        for (double v : affine->a) s += fmt17(v) + ",";
        s += fmt17(affine->t[0]) + "," + fmt17(affine->t[1]);
        f["affine"] = s;
    }
    return f;
}

DomainSpec DomainSpec::from_fields(const std::map<std::string, std::string>& f) {
    DomainSpec s;
    for (const auto& [key, value] : f) {
        if (key == "kind") s.kind = parse_domain_kind(value);
        else if (key == "n") s.n = parse_u64(value, key);
        else if (key == "seed") s.seed = parse_u64(value, key);
        else if (key == "components") s.components = parse_u64(value, key);
        else if (key == "radius") s.radius = parse_double(value, key);
        else if (key == "stddev") s.stddev = parse_double(value, key);
        else if (key == "band") s.band = parse_double(value, key);
        else if (key == "rotation_deg") s.rotation_deg = parse_double(value, key);
        else if (key == "scale") s.scale = parse_double(value, key);
        else if (key == "moon_noise") s.moon_noise = parse_double(value, key);
        else if (key == "paired") s.paired = value == "true" || value == "1";
        else if (key == "affine") {
            const auto parts = split(value, ',');
            if (parts.size() != 6)
                throw std::invalid_argument("affine map needs 6 numbers: a00,a01,a10,a11,t0,t1");
            AffineMap m;
            for (int i = 0; i < 4; ++i) m.a[i] = parse_double(parts[i], key);
            m.t = {parse_double(parts[4], key), parse_double(parts[5], key)};
            s.affine = m;
        } else {
            throw std::invalid_argument("unknown domain field '" + key + "'");
        }
    }
    return s;
}

Tensor sample_base(const DomainSpec& spec, std::size_t count, Rng& rng) {
    if (count == 0) throw std::invalid_argument("sample_base: count must be positive");
    if (spec.components == 0) throw std::invalid_argument("domain spec: components must be positive");
    Tensor out({count, 2}, 0.0);
    switch (spec.kind) {
        case DomainKind::gauss_mix: {
            const auto centers = grid_centers(spec.components, spec.radius);
            for (std::size_t i = 0; i < count; ++i) {
                const auto& c = centers[rng.index(centers.size())];
                out.at(i, 0) = c[0] + spec.stddev * rng.normal();
                out.at(i, 1) = c[1] + spec.stddev * rng.normal();
            }
            break;
        }
        case DomainKind::ring: {
            if (!(spec.band > 0.0) || spec.band >= spec.radius)
                throw std::invalid_argument("ring: band must lie in (0, radius)");
            const double k = static_cast<double>(spec.components);
            for (std::size_t i = 0; i < count; ++i) {
                const double th = 2.0 * std::numbers::pi * static_cast<double>(rng.index(spec.components)) / k;
                const double cx = spec.radius * std::cos(th), cy = spec.radius * std::sin(th);
                double px = 0.0, py = 0.0, r = 0.0;
                do {
                    px = cx + spec.stddev * rng.normal();
                    py = cy + spec.stddev * rng.normal();
                    r = std::hypot(px, py);
                } while (r < spec.radius - spec.band || r > spec.radius + spec.band);
                out.at(i, 0) = px;
                out.at(i, 1) = py;
            }
            break;
        }
        case DomainKind::two_moons_affine: {
            for (std::size_t i = 0; i < count; ++i) {
                const double t = std::numbers::pi * rng.uniform();
                const bool upper = rng.index(2) == 0;
                double px = upper ? std::cos(t) : 1.0 - std::cos(t);
                double py = upper ? std::sin(t) : 0.5 - std::sin(t);
                px = spec.radius * (px - 0.5) + spec.moon_noise * rng.normal();
                py = spec.radius * (py - 0.25) + spec.moon_noise * rng.normal();
                out.at(i, 0) = px;
                out.at(i, 1) = py;
            }
            break;
        }
    }
    return out;
}

DomainDataset gen_domain_pair(const DomainSpec& spec) {
    if (spec.n == 0) throw std::invalid_argument("gen_domain_pair: n must be at least 1");
    Rng rng(spec.seed);
    DomainDataset ds;
    ds.map = spec.target_map();
    ds.spec = spec;
    ds.x = sample_base(spec, spec.n, rng);
    ds.y = spec.paired ? ds.map->apply(ds.x) : ds.map->apply(sample_base(spec, spec.n, rng));
    return ds;
}

void save_points_csv(const Tensor& points, const std::filesystem::path& path) {
    if (path.empty()) throw CsvError("save_points_csv: empty path");
    if (points.rank() != 2) throw CsvError("save_points_csv: points must be [n x d]");
    std::ofstream out(path);
    if (!out) throw CsvError("cannot open '" + path.string() + "' for writing");
    for (std::size_t k = 0; k < points.cols(); ++k) out << (k ? "," : "") << "dim" << k;
    out << '\n';
    for (std::size_t i = 0; i < points.rows(); ++i) {
        for (std::size_t k = 0; k < points.cols(); ++k) out << (k ? "," : "") << fmt17(points.at(i, k));
        out << '\n';
    }
    if (!out) throw CsvError("write failed for '" + path.string() + "'");
}

Tensor load_points_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open '" + path.string() + "'");
    const std::string where = path.string();
    std::string line;
    std::size_t line_no = 0;
    std::size_t dims = 0;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto s = trim(line);
        if (s.empty()) continue;
        const auto fields = split(s, ',');
        if (dims == 0) {
            for (std::size_t k = 0; k < fields.size(); ++k)
                if (fields[k] != "dim" + std::to_string(k))
                    throw CsvError(where + " line " + std::to_string(line_no) +
                                   ": expected header dim0,dim1,... but found '" + std::string(s) + "'");
            dims = fields.size();
            continue;
        }
        if (fields.size() != dims)
            throw CsvError(where + " line " + std::to_string(line_no) + ": expected " +
                           std::to_string(dims) + " fields, found " + std::to_string(fields.size()));
        for (auto f : fields) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || p != f.data() + f.size() || !std::isfinite(v))
                throw CsvError(where + " line " + std::to_string(line_no) + ": malformed number '" +
                               std::string(f) + "'");
            values.push_back(v);
        }
        ++rows;
    }
    if (dims == 0) throw CsvError(where + ": empty file (no header)");
    if (rows == 0) throw CsvError(where + ": no data rows");
    return Tensor({rows, dims}, std::move(values));
}

void save_csv(const DomainDataset& ds, const std::filesystem::path& dir) {
    if (dir.empty()) throw CsvError("save_csv: empty directory path");
    std::filesystem::create_directories(dir);
    save_points_csv(ds.x, dir / "x.csv");
    save_points_csv(ds.y, dir / "y.csv");
    if (ds.spec) {
        nlohmann::ordered_json j;
        for (const auto& [k, v] : ds.spec->to_fields()) j[k] = v;
        std::ofstream out(dir / "spec.json");
        out << j.dump(2) << '\n';
        if (!out) throw CsvError("write failed for spec.json");
    }
}

DomainDataset load_csv(const std::filesystem::path& dir) {
    DomainDataset ds;
    ds.x = load_points_csv(dir / "x.csv");
    ds.y = load_points_csv(dir / "y.csv");
    const auto spec_path = dir / "spec.json";
    if (std::filesystem::exists(spec_path)) {
        std::ifstream in(spec_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw CsvError(spec_path.string() + ": " + e.what());
        }
        std::map<std::string, std::string> fields;
        for (auto it = j.begin(); it != j.end(); ++it) fields[it.key()] = it.value().get<std::string>();
        ds.spec = DomainSpec::from_fields(fields);
        ds.map = ds.spec->target_map();
    }
    return ds;
}

std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.index(i)]);
    return p;
}

std::vector<BatchIndices> make_batches(std::size_t n_x, std::size_t n_y, std::size_t batch_size,
                                       Rng& epoch_rng) {
    if (batch_size == 0) throw std::invalid_argument("make_batches: batch size must be positive");
    if (batch_size > std::min(n_x, n_y))
        throw std::invalid_argument("make_batches: batch size " + std::to_string(batch_size) +
                                    " exceeds the smaller domain (" +
                                    std::to_string(std::min(n_x, n_y)) + " samples)");
    const auto px = permutation(n_x, epoch_rng);
    const auto py = permutation(n_y, epoch_rng);
    const std::size_t count = std::min(n_x, n_y) / batch_size;
    std::vector<BatchIndices> out(count);
    for (std::size_t b = 0; b < count; ++b) {
        out[b].x.assign(px.begin() + static_cast<std::ptrdiff_t>(b * batch_size),
                        px.begin() + static_cast<std::ptrdiff_t>((b + 1) * batch_size));
        out[b].y.assign(py.begin() + static_cast<std::ptrdiff_t>(b * batch_size),
                        py.begin() + static_cast<std::ptrdiff_t>((b + 1) * batch_size));
    }
    return out;
}

}  // namespace jwdm::data
