// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "jwdm/data.hpp"

using namespace jwdm;
using namespace jwdm::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("jwdm_test_data_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("kind names round-trip and unknown kinds are rejected") {
    for (auto k : {DomainKind::gauss_mix, DomainKind::ring, DomainKind::two_moons_affine})
        CHECK(parse_domain_kind(to_string(k)) == k);
    CHECK_THROWS(parse_domain_kind("spiral"));
}

TEST_CASE("same seed gives identical datasets, different seeds differ") {
    DomainSpec s;
    s.n = 300;
    s.seed = 4;
    const auto a = gen_domain_pair(s), b = gen_domain_pair(s);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    s.seed = 5;
    CHECK_FALSE(gen_domain_pair(s).x == a.x);
}

TEST_CASE("ring samples stay within the configured band") {
    DomainSpec s;
    s.n = 2000;
    s.stddev = 0.2;
    s.band = 0.15;
    const auto ds = gen_domain_pair(s);
    for (std::size_t i = 0; i < ds.x.rows(); ++i) {
        const double r = std::hypot(ds.x.at(i, 0), ds.x.at(i, 1));
        CHECK(r >= s.radius - s.band);
        CHECK(r <= s.radius + s.band);
    }
}

TEST_CASE("identity map keeps the two empirical means within sampling error") {
    for (auto kind : {DomainKind::gauss_mix, DomainKind::ring, DomainKind::two_moons_affine}) {
        DomainSpec s;
        s.kind = kind;
        s.n = 4000;
        s.seed = 7;
        s.rotation_deg = 0.0;
        s.scale = 1.0;
        s.affine = AffineMap{};
        const auto ds = gen_domain_pair(s);
        for (std::size_t k = 0; k < 2; ++k) {
            double mx = 0, my = 0, vx = 0;
            for (std::size_t i = 0; i < s.n; ++i) {
                mx += ds.x.at(i, k);
                my += ds.y.at(i, k);
            }
            mx /= s.n;
            my /= s.n;
            for (std::size_t i = 0; i < s.n; ++i) vx += (ds.x.at(i, k) - mx) * (ds.x.at(i, k) - mx);
            const double sigma = std::sqrt(vx / (s.n - 1));
            // Difference of two independent means: 3 sqrt(2) sigma / sqrt(n).
            CHECK(std::abs(mx - my) < 3.0 * std::sqrt(2.0) * sigma / std::sqrt(double(s.n)));
        }
    }
}

TEST_CASE("paired mode applies the map to the same samples; unpaired does not") {
    DomainSpec s;
    s.n = 50;
    s.paired = true;
    const auto ds = gen_domain_pair(s);
    REQUIRE(ds.map);
    CHECK(ds.y == ds.map->apply(ds.x));
    s.paired = false;
    const auto un = gen_domain_pair(s);
    CHECK_FALSE(un.y == un.map->apply(un.x));
}

TEST_CASE("rotation-scale map and its inverse") {
    const auto m = AffineMap::rotation_scale(90.0, 0.5);
    const auto p = m.apply(1.0, 0.0);
    CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.5));
    const auto back = m.inverse().apply(p[0], p[1]);
    CHECK(back[0] == doctest::Approx(1.0));
    CHECK(back[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("spec fields round-trip including a custom affine map") {
    DomainSpec s;
    s.kind = DomainKind::two_moons_affine;
    s.seed = 99;
    s.affine = AffineMap{{1.5, 0.25, -0.5, 2.0}, {0.1, -0.2}};
    CHECK(DomainSpec::from_fields(s.to_fields()) == s);
    auto f = s.to_fields();
    f["bogus"] = "1";
    CHECK_THROWS(DomainSpec::from_fields(f));
}

TEST_CASE("csv save and load round-trip exactly") {
    DomainSpec s;
    s.n = 40;
    const auto ds = gen_domain_pair(s);
    const auto dir = scratch("roundtrip");
    save_csv(ds, dir);
    const auto back = load_csv(dir);
    CHECK(back.x == ds.x);
    CHECK(back.y == ds.y);
    REQUIRE(back.spec);
    CHECK(*back.spec == s);
    REQUIRE(back.map);
    CHECK(*back.map == *ds.map);
}

TEST_CASE("malformed csv files are reported with line numbers") {
    const auto dir = scratch("malformed");
    write_file(dir / "bad_row.csv", "dim0,dim1\n1,2\n3,abc\n");
    CHECK_THROWS_WITH_AS(load_points_csv(dir / "bad_row.csv"), doctest::Contains("line 3"), CsvError);
    write_file(dir / "short_row.csv", "dim0,dim1\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(load_points_csv(dir / "short_row.csv"), doctest::Contains("line 3"), CsvError);
    write_file(dir / "bad_header.csv", "x,y\n1,2\n");
    CHECK_THROWS_WITH_AS(load_points_csv(dir / "bad_header.csv"), doctest::Contains("line 1"), CsvError);
    write_file(dir / "empty.csv", "");
    CHECK_THROWS_AS(load_points_csv(dir / "empty.csv"), CsvError);
    write_file(dir / "header_only.csv", "dim0,dim1\n");
    CHECK_THROWS_AS(load_points_csv(dir / "header_only.csv"), CsvError);
    CHECK_THROWS_AS(load_points_csv(dir / "missing.csv"), CsvError);
}

TEST_CASE("batches drop the short tail and shuffle each domain independently") {
    Rng rng(3);
    const auto one = make_batches(100, 100, 64, rng);
    CHECK(one.size() == 1);
    const auto many = make_batches(200, 300, 64, rng);
    CHECK(many.size() == 3);
    std::set<std::size_t> seen_x, seen_y;
    bool differs = false;
    for (const auto& b : many) {
        CHECK(b.x.size() == 64);
        CHECK(b.y.size() == 64);
        for (auto i : b.x) CHECK(seen_x.insert(i).second);
        for (auto i : b.y) CHECK(seen_y.insert(i).second);
        if (b.x != b.y) differs = true;
    }
    CHECK(differs);
    CHECK_THROWS(make_batches(10, 10, 0, rng));
    CHECK_THROWS(make_batches(10, 10, 11, rng));
}

TEST_CASE("permutations contain every index once") {
    Rng rng(12);
    auto p = permutation(50, rng);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < 50; ++i) CHECK(p[i] == i);
}
