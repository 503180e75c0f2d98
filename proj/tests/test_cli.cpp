// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "jwdm/cli.hpp"
#include "jwdm/trainer.hpp"

using namespace jwdm;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "jwdm");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("jwdm_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

const std::vector<std::string> kSmallNet{"--latent-dim", "4", "--ae-hidden", "16", "--disc-hidden", "16"};

std::vector<std::string> with_small(std::vector<std::string> args) {
    args.insert(args.end(), kSmallNet.begin(), kSmallNet.end());
    return args;
}

}  // namespace

TEST_CASE("no subcommand or an unknown flag is a usage error") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"train", "--bogus"}).code == kExitUsage);
}

TEST_CASE("help documents flags and their defaults") {
    const auto r = run({"train", "--help"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("--lambda-z") != std::string::npos);
    CHECK(r.out.find("0.1") != std::string::npos);
    CHECK(r.out.find("0.0002") != std::string::npos);
    for (const char* sub : {"gen-data", "synth", "verify-theorem", "eval", "sweep"})
        CHECK(run({sub, "--help"}).code == kExitOk);
}

TEST_CASE("gen-data writes both domains and a spec, deterministically") {
    const auto a = scratch("gen_a"), b = scratch("gen_b");
    REQUIRE(run({"gen-data", "--kind", "ring", "--n", "300", "--seed", "1", "--out", a.string()}).code == kExitOk);
    REQUIRE(run({"gen-data", "--kind", "ring", "--n", "300", "--seed", "1", "--out", b.string()}).code == kExitOk);
    for (const char* f : {"x.csv", "y.csv", "spec.json"}) {
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(line_count(a / "x.csv") == 301);
    CHECK(fs::exists(a / "manifest.json"));
    CHECK(run({"gen-data", "--kind", "spiral", "--out", a.string()}).code != kExitOk);
}

TEST_CASE("train: missing dataset directory is a usage error") {
    CHECK(run({"train", "--data", "/nonexistent/jwdm", "--out", scratch("nodata").string()}).code == kExitUsage);
}

TEST_CASE("train logs epochs times steps per epoch and writes its artifacts") {
    const auto data = scratch("train_data"), out = scratch("train_out");
    REQUIRE(run({"gen-data", "--n", "200", "--seed", "3", "--out", data.string()}).code == kExitOk);
    const auto r = run(with_small({"train", "--data", data.string(), "--epochs", "3", "--decay-start", "1",
                                   "--batch-size", "64", "--out", out.string()}));
    CAPTURE(r.err);
    REQUIRE(r.code == kExitOk);
    CHECK(line_count(out / "train_log.csv") == 1 + 3 * (200 / 64));
    for (const char* f : {"checkpoint.bin", "config.ini", "manifest.json"}) CHECK(fs::exists(out / f));
    const auto ckpt = load_checkpoint(out / "checkpoint.bin");
    CHECK(ckpt.state.epoch == 3);
    CHECK(ckpt.config.weights.lambda_z == 0.1);
}

TEST_CASE("train: flags override the config file") {
    const auto dir = scratch("cfg");
    fs::create_directories(dir);
    {
        std::ofstream ini(dir / "run.ini");
        ini << "epochs = 1\ndecay_start = 0\nlambda_z = 5\nlatent_dim = 4\nae_hidden = 8\ndisc_hidden = 8\ndata.n = 64\n";
    }
    const auto out = dir / "out";
    const auto r = run({"train", "--config", (dir / "run.ini").string(), "--lambda-z", "0.5", "--out", out.string()});
    CAPTURE(r.err);
    REQUIRE(r.code == kExitOk);
    const auto c = TrainConfig::load(out / "config.ini");
    CHECK(c.weights.lambda_z == 0.5);
    CHECK(c.arch.latent_dim == 4);
    CHECK(c.epochs == 1);
    CHECK(run({"train", "--config", (dir / "run.ini").string(), "--lambda-mix", "2", "--out", out.string()}).code ==
          kExitUsage);
}

TEST_CASE("train: JDM_SEED fills in a missing --seed") {
    const auto out = scratch("envseed");
    ::setenv("JDM_SEED", "42", 1);
    const auto r = run(with_small({"train", "--n", "64", "--epochs", "1", "--decay-start", "0", "--out", out.string()}));
    ::unsetenv("JDM_SEED");
    REQUIRE(r.code == kExitOk);
    CHECK(TrainConfig::load(out / "config.ini").seed == 42);
}

TEST_CASE("train --until then --resume equals one full run") {
    const auto full = scratch("full"), part = scratch("part");
    const auto base = with_small({"train", "--n", "128", "--epochs", "4", "--decay-start", "2", "--seed", "9"});
    auto full_args = base;
    full_args.insert(full_args.end(), {"--out", full.string()});
    REQUIRE(run(full_args).code == kExitOk);
    auto part_args = base;
    part_args.insert(part_args.end(), {"--until", "2", "--out", part.string()});
    REQUIRE(run(part_args).code == kExitOk);
    const auto r = run({"train", "--resume", (part / "checkpoint.bin").string(), "--out", part.string()});
    CAPTURE(r.err);
    REQUIRE(r.code == kExitOk);
    CHECK(slurp(part / "checkpoint.bin") == slurp(full / "checkpoint.bin"));
    CHECK(slurp(part / "train_log.csv") == slurp(full / "train_log.csv"));
    CHECK(run({"train", "--resume", (part / "checkpoint.bin").string(), "--latent-dim", "5", "--out",
               part.string()})
              .code == kExitRuntime);
}

TEST_CASE("synth writes n + 1 frames per domain and rejects n = 1") {
    const auto dir = scratch("synth");
    REQUIRE(run(with_small({"train", "--n", "64", "--epochs", "1", "--decay-start", "0", "--out", (dir / "t").string()}))
                .code == kExitOk);
    const auto ckpt = (dir / "t" / "checkpoint.bin").string();
    const std::vector<std::string> base{"synth", "--checkpoint", ckpt, "--begin", "1,0", "--end", "0,1"};
    auto a = base;
    a.insert(a.end(), {"--n", "8", "--plot", "--out", (dir / "a").string()});
    REQUIRE(run(a).code == kExitOk);
    CHECK(line_count(dir / "a" / "trajectory.csv") == 1 + 2 * 9);
    CHECK(fs::exists(dir / "a" / "trajectory.ppm"));
    auto b = base;
    b.insert(b.end(), {"--n", "8", "--plot", "--out", (dir / "b").string()});
    REQUIRE(run(b).code == kExitOk);
    CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
    CHECK(slurp(dir / "a" / "trajectory.ppm") == slurp(dir / "b" / "trajectory.ppm"));
    auto bad = base;
    bad.insert(bad.end(), {"--n", "1", "--out", (dir / "c").string()});
    CHECK(run(bad).code == kExitUsage);
    auto wrong_dim = std::vector<std::string>{"synth", "--checkpoint", ckpt, "--begin", "1,0,2", "--end", "0,1",
                                              "--out", (dir / "d").string()};
    CHECK(run(wrong_dim).code == kExitUsage);
}

TEST_CASE("verify-theorem passes on random instances and writes its table") {
    const auto out = scratch("verify");
    const auto r = run({"verify-theorem", "--instances", "200", "--out", out.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("PASS") != std::string::npos);
    CHECK(line_count(out / "decomposition.csv") == 1 + 250);
    CHECK(run({"verify-theorem", "--instances", "0"}).code == kExitUsage);
    const auto products = run({"verify-theorem", "--instances", "1", "--products", "60", "--metric", "l1"});
    CHECK(products.code == kExitOk);
}

TEST_CASE("eval: oracle bundle reports zeros, repeated runs are identical") {
    const auto r = run({"eval", "--oracle", "--eval-n", "300"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("0.10000000000000001,ring,0,0,0,0,0,0,0") != std::string::npos);
    const auto dir = scratch("eval");
    REQUIRE(run(with_small({"train", "--n", "64", "--epochs", "1", "--decay-start", "0", "--out", (dir / "t").string()}))
                .code == kExitOk);
    const auto ckpt = (dir / "t" / "checkpoint.bin").string();
    REQUIRE(run({"eval", "--checkpoint", ckpt, "--seed", "4", "--out", (dir / "a").string()}).code == kExitOk);
    REQUIRE(run({"eval", "--checkpoint", ckpt, "--seed", "4", "--out", (dir / "b").string()}).code == kExitOk);
    CHECK(slurp(dir / "a" / "eval.csv") == slurp(dir / "b" / "eval.csv"));
    CHECK(run({"eval"}).code == kExitUsage);
    CHECK(run({"eval", "--oracle", "--checkpoint", ckpt}).code == kExitUsage);
}

TEST_CASE("sweep emits one row per value") {
    const auto out = scratch("sweep");
    const auto r = run(with_small({"sweep", "--values", "0.01,0.1,1,10", "--n", "64", "--epochs", "1",
                                   "--decay-start", "0", "--eval-n", "64", "--ot-n", "8", "--out", out.string()}));
    CAPTURE(r.err);
    REQUIRE(r.code == kExitOk);
    CHECK(line_count(out / "sweep.csv") == 5);
    CHECK(slurp(out / "sweep.csv").rfind("lambda_z,task,frechet_x,frechet_y,corr_rmse,cycle_l1_x,cycle_l1_y,w2_x,w2_y", 0) == 0);
}
