// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "jwdm/sweep.hpp"
#include "jwdm/trainer.hpp"

using namespace jwdm;
namespace fs = std::filesystem;

namespace {

TrainConfig small_config() {
    TrainConfig c;
    c.epochs = 6;
    c.decay_start = 3;
    c.lr = 1e-3;
    c.batch_size = 32;
    c.arch.latent_dim = 4;
    c.arch.ae_hidden = {16};
    c.arch.disc_hidden = {16};
    c.dataset.n = 128;
    c.seed = 7;
    return c;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("jwdm_test_trainer_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<char> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config survives an ini round-trip and rejects unknown keys") {
    TrainConfig c = small_config();
    c.weights.gan_loss = GanLoss::minimax;
    c.dataset.kind = data::DomainKind::two_moons_affine;
    c.output_dir = "runs/a";
    const auto back = TrainConfig::from_ini(c.to_ini());
    CHECK(back.to_fields() == c.to_fields());
    CHECK(back.hash() == c.hash());
    CHECK_THROWS(TrainConfig::from_ini("epochs = 3\nmystery = 1\n"));
    CHECK_THROWS(TrainConfig::from_ini("epochs = three\n"));
    CHECK_THROWS(TrainConfig::from_ini("just words\n"));
}

TEST_CASE("ini parsing accepts comments, sections and dashed keys") {
    const auto c = TrainConfig::from_ini("# run\n[train]\nlambda-z = 1\n; note\nbatch_size=16\ndata.kind = gauss-mix\n");
    CHECK(c.weights.lambda_z == 1.0);
    CHECK(c.batch_size == 16);
    CHECK(c.dataset.kind == data::DomainKind::gauss_mix);
}

TEST_CASE("defaults use the standard weights and schedule") {
    const TrainConfig c;
    CHECK(c.weights.lambda_x == 0.1);
    CHECK(c.weights.lambda_y == 0.1);
    CHECK(c.weights.lambda_z == 0.1);
    CHECK(c.lr == 2e-4);
    CHECK(c.decay_start == 100);
    CHECK(c.epochs == 200);
}

TEST_CASE("the hash ignores the output directory only") {
    TrainConfig a = small_config(), b = small_config();
    b.output_dir = "elsewhere";
    CHECK(a.hash() == b.hash());
    b.arch.latent_dim = 5;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("invalid configs are rejected") {
    TrainConfig c = small_config();
    c.decay_start = 10;
    CHECK_THROWS(c.validate());
    c = small_config();
    c.batch_size = 0;
    CHECK_THROWS(c.validate());
    c = small_config();
    c.weights.lambda_mix = 1.0;
    CHECK_THROWS(c.validate());
}

TEST_CASE("zero epochs return the initialized bundle") {
    const auto c = small_config();
    const auto ds = data::gen_domain_pair(c.dataset);
    const auto r = train(c, ds, 0);
    CHECK(r.log.empty());
    CHECK(r.state == initial_state(c));
}

TEST_CASE("training is deterministic and logs every step") {
    const auto c = small_config();
    const auto ds = data::gen_domain_pair(c.dataset);
    const auto a = train(c, ds);
    const auto b = train(c, ds);
    CHECK(a.state == b.state);
    REQUIRE(a.log.size() == b.log.size());
    CHECK(a.log.size() == static_cast<std::size_t>(c.epochs) * (c.dataset.n / c.batch_size));
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(log_csv_row(a.log[i]) == log_csv_row(b.log[i]));
        const auto& l = a.log[i].losses;
        CHECK(l.total == doctest::Approx(l.weighted_total(c.weights)).epsilon(1e-12));
        CHECK(a.log[i].lr == nn::lr_at(a.log[i].epoch, c.schedule()));
        if (i > 0) {
            const bool increasing = a.log[i].epoch > a.log[i - 1].epoch ||
                                    (a.log[i].epoch == a.log[i - 1].epoch && a.log[i].step > a.log[i - 1].step);
            CHECK(increasing);
        }
    }
    CHECK_FALSE(a.state.bundle == initial_state(c).bundle);
}

TEST_CASE("resuming continues bit-identically") {
    const auto c = small_config();
    const auto ds = data::gen_domain_pair(c.dataset);
    const auto full = train(c, ds);
    const auto part = train(c, ds, 4);
    const auto rest = resume(part.checkpoint(c), c, ds, 2);
    CHECK(rest.state == full.state);
    REQUIRE(part.log.size() + rest.log.size() == full.log.size());
    for (std::size_t i = 0; i < rest.log.size(); ++i)
        CHECK(log_csv_row(rest.log[i]) == log_csv_row(full.log[part.log.size() + i]));
    CHECK(resume(part.checkpoint(c), c, ds, 0).state == part.state);
}

TEST_CASE("resume rejects a different config and overruns") {
    const auto c = small_config();
    const auto ds = data::gen_domain_pair(c.dataset);
    const auto part = train(c, ds, 2);
    auto other = c;
    other.arch.latent_dim = 5;
    CHECK_THROWS(resume(part.checkpoint(c), other, ds, 1));
    CHECK_THROWS(resume(part.checkpoint(c), c, ds, 5));
}

TEST_CASE("checkpoints round-trip byte for byte") {
    const auto c = small_config();
    const auto ds = data::gen_domain_pair(c.dataset);
    const auto ckpt = train(c, ds, 2).checkpoint(c);
    const auto bytes = serialize_checkpoint(ckpt);
    CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "JWDM0001");
    const auto back = deserialize_checkpoint(bytes);
    CHECK(back.state == ckpt.state);
    CHECK(back.config_hash == ckpt.config_hash);
    CHECK(serialize_checkpoint(back) == bytes);

    auto corrupt = bytes;
    corrupt[0] = 'X';
    CHECK_THROWS(deserialize_checkpoint(corrupt));
    auto truncated = bytes;
    truncated.resize(bytes.size() / 2);
    CHECK_THROWS(deserialize_checkpoint(truncated));
}

TEST_CASE("output directory receives a checkpoint and a log every epoch") {
    auto c = small_config();
    c.output_dir = scratch("outdir").string();
    const auto ds = data::gen_domain_pair(c.dataset);
    const auto r = train(c, ds, 3);
    const auto ckpt = load_checkpoint(fs::path(c.output_dir) / "checkpoint.bin");
    CHECK(ckpt.state == r.state);
    std::ifstream log(fs::path(c.output_dir) / "train_log.csv");
    std::string header;
    std::getline(log, header);
    CHECK(header == "epoch,step,lr,recon_x,recon_y,adv_x,adv_y,adv_z1,adv_z2,disc_x,disc_y,disc_z,total");
    std::size_t rows = 0;
    for (std::string line; std::getline(log, line);) ++rows;
    CHECK(rows == r.log.size());

    // Resuming appends to the same log.
    resume(ckpt, c, ds, 1);
    std::ifstream log2(fs::path(c.output_dir) / "train_log.csv");
    std::size_t rows2 = 0;
    for (std::string line; std::getline(log2, line);) ++rows2;
    CHECK(rows2 == 1 + r.log.size() / 3 * 4);
}

TEST_CASE("a non-finite loss aborts, names the term and keeps the last checkpoint") {
    auto c = small_config();
    c.output_dir = scratch("nan").string();
    const auto ds = data::gen_domain_pair(c.dataset);
    const auto r = train(c, ds, 1);
    const auto path = fs::path(c.output_dir) / "checkpoint.bin";
    const auto before = read_bytes(path);
    auto ckpt = r.checkpoint(c);
    ckpt.state.bundle.g1.layers().back().bias[0] = NAN;
    try {
        resume(ckpt, c, ds, 1);
        FAIL("expected divergence");
    } catch (const TrainingDiverged& e) {
        CHECK_FALSE(e.term().empty());
        CHECK(std::string(e.what()).find(e.term()) != std::string::npos);
    }
    CHECK(read_bytes(path) == before);
}

TEST_CASE("one training step updates each side with the other held fixed") {
    const auto c = small_config();
    const auto ds = data::gen_domain_pair(c.dataset);
    auto state = initial_state(c);
    const auto before = state.bundle;
    const Tensor bx = ds.x.slice_rows(0, 32), by = ds.y.slice_rows(0, 32);

    // Discriminator phase alone.
    Graph g;
    auto& b = state.bundle;
    const auto src = forward_source(g, b, g.constant(bx));
    const auto tgt = forward_target(g, b, g.constant(by));
    Graph dg;
    const auto d = discriminator_objective(dg, b, bx, by, sample_prior(32, 4, state.prior_rng), src, tgt, c.weights);
    dg.backward(-d.objective);
    nn::adam_step(b.discriminator_parameters(), state.disc_opt, c.lr);
    CHECK(b.e1 == before.e1);
    CHECK(b.e2 == before.e2);
    CHECK(b.g1 == before.g1);
    CHECK(b.g2 == before.g2);
    CHECK_FALSE(b.dx == before.dx);
    const auto after_disc = b;

    // Generator phase alone.
    const auto gen = total_generator_loss(g, b, src, tgt, c.weights);
    g.backward(gen.total);
    nn::adam_step(b.generator_parameters(), state.gen_opt, c.lr);
    CHECK(b.dx == after_disc.dx);
    CHECK(b.dy == after_disc.dy);
    CHECK(b.dz == after_disc.dz);
    CHECK_FALSE(b.e1 == after_disc.e1);
}

TEST_CASE("the degenerate auto-encoder setting reduces reconstruction every epoch") {
    TrainConfig c;
    c.epochs = 100;
    c.decay_start = 100;
    c.weights.lambda_x = c.weights.lambda_y = c.weights.lambda_z = 0.0;
    c.dataset.kind = data::DomainKind::gauss_mix;
    c.dataset.n = 256;
    c.dataset.rotation_deg = 0.0;
    c.dataset.scale = 1.0;
    c.dataset.paired = true;
    c.arch.ae_hidden = {32, 32};
    c.arch.disc_hidden = {8};
    const auto ds = data::gen_domain_pair(c.dataset);
    REQUIRE(ds.x == ds.y);
    const auto r = train(c, ds, 50);
    std::vector<double> epoch_mean(50, 0.0);
    std::vector<int> count(50, 0);
    for (const auto& row : r.log) {
        epoch_mean[row.epoch] += row.losses.recon_x + row.losses.recon_y;
        ++count[row.epoch];
    }
    for (int e = 1; e < 50; ++e) {
        CAPTURE(e);
        CHECK(epoch_mean[e] / count[e] < epoch_mean[e - 1] / count[e - 1]);
    }
}

TEST_CASE("a single-value sweep equals one training run") {
    auto c = small_config();
    c.epochs = 2;
    c.decay_start = 1;
    SweepOptions opts;
    opts.eval.eval_n = 64;
    opts.eval.ot_sample_n = 8;
    const auto rows = lambda_z_sweep(c, {1.0}, opts);
    REQUIRE(rows.size() == 1);
    auto direct = c;
    direct.weights.lambda_z = 1.0;
    const auto ds = data::gen_domain_pair(direct.dataset);
    const auto r = train(direct, ds);
    CHECK(rows[0].bundle == r.state.bundle);
    CHECK(rows[0].report.csv_row(1.0, "ring") == evaluate(r.state.bundle, ds, opts.eval).csv_row(1.0, "ring"));
}

TEST_CASE("sweep rows cover every task and value, with or without threads") {
    auto c = small_config();
    c.epochs = 1;
    c.decay_start = 0;
    SweepOptions opts;
    opts.tasks = {data::DomainKind::ring, data::DomainKind::gauss_mix};
    opts.eval.eval_n = 64;
    opts.eval.ot_sample_n = 0;
    const std::vector<double> values{0.01, 0.1, 1, 10};
    const auto serial = lambda_z_sweep(c, values, opts);
    CHECK(serial.size() == values.size() * 2);
    CHECK(serial[0].task == "ring");
    CHECK(serial[4].task == "gauss-mix");
    CHECK(serial[3].lambda_z == 10);
    opts.jobs = 3;
    CHECK(sweep_csv(lambda_z_sweep(c, values, opts)) == sweep_csv(serial));
    CHECK_THROWS(lambda_z_sweep(c, {}, opts));
}
