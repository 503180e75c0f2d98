// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include "jwdm/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>

#include "jwdm/metrics.hpp"
#include "jwdm/ot.hpp"
#include "jwdm/sweep.hpp"
#include "jwdm/synthesis.hpp"
#include "jwdm/trainer.hpp"

namespace jwdm {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// What a finished subcommand leaves behind for the manifest.
struct RunRecord {
    fs::path out_dir;
    json config = json::object();
    std::vector<fs::path> artifacts;
};

void write_manifest(const std::string& subcommand, const RunRecord& rec, double seconds, int status) {
    if (rec.out_dir.empty() || !fs::is_directory(rec.out_dir)) return;
    json j;
    j["subcommand"] = subcommand;
    j["config"] = rec.config;
    j["artifacts"] = json::array();
    for (const auto& p : rec.artifacts) j["artifacts"].push_back(p.string());
    j["wall_clock_seconds"] = seconds;
    j["exit_status"] = status;
    const auto path = rec.out_dir / "manifest.json";
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << j.dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write manifest '" + path.string() + "'");
    }
    fs::rename(tmp, path);
}

json fields_json(const std::map<std::string, std::string>& fields) {
    json j = json::object();
    for (const auto& [k, v] : fields) j[k] = v;
    return j;
}

// ---- training flags shared by train and sweep ----------------------------

struct FlagDef {
    const char* flag;
    const char* key;
    const char* help;
};

constexpr FlagDef kTrainFlags[] = {
    {"--epochs", "epochs", "Total epochs; the learning rate reaches zero after the last one"},
    {"--decay-start", "decay_start", "Epoch at which the linear learning-rate decay begins"},
    {"--lr", "lr", "Adam learning rate"},
    {"--batch-size", "batch_size", "Minibatch size per domain"},
    {"--lambda-x", "lambda_x", "Weight of the X-domain adversarial term"},
    {"--lambda-y", "lambda_y", "Weight of the Y-domain adversarial term"},
    {"--lambda-z", "lambda_z", "Weight of the latent adversarial term"},
    {"--lambda-mix", "lambda_mix", "Share of cycle-path fakes among domain fakes"},
    {"--gan-loss", "gan_loss", "Generator GAN loss: non-saturating or minimax"},
    {"--latent-dim", "latent_dim", "Latent code width"},
    {"--ae-hidden", "ae_hidden", "Encoder/decoder hidden widths, comma separated"},
    {"--disc-hidden", "disc_hidden", "Discriminator hidden widths, comma separated"},
    {"--disc-steps", "disc_steps", "Discriminator updates per generator update"},
    {"--beta1", "beta1", "Adam first-moment decay"},
    {"--kind", "data.kind", "Generated task: ring, gauss-mix or two-moons-affine"},
    {"--n", "data.n", "Generated samples per domain"},
    {"--data-seed", "data.seed", "Seed of the generated dataset"},
};

struct TrainFlags {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string seed;
    CLI::Option* seed_option = nullptr;
};

void add_train_flags(CLI::App* app, TrainFlags& f) {
    auto defaults = TrainConfig{}.to_fields();
    app->add_option("--config", f.config_path, "INI-style key = value file; flags override it")
        ->check(CLI::ExistingFile);
    for (const auto& d : kTrainFlags)
        f.options[d.key] = app->add_option(d.flag, f.values[d.key], d.help)->default_str(defaults[d.key]);
    f.seed_option = app->add_option("--seed", f.seed, "Master seed for init, shuffling and prior")
                        ->envname("JDM_SEED")
                        ->default_str("0");
}

/// Base config (file, or the given fallback) with explicit flags applied on top.
TrainConfig resolve_config(const TrainFlags& f, const TrainConfig& fallback) {
    try {
        TrainConfig base = f.config_path.empty() ? fallback : TrainConfig::load(f.config_path);
        auto fields = base.to_fields();
        for (const auto& [key, opt] : f.options)
            if (opt->count() > 0) fields[key] = f.values.at(key);
        if (f.seed_option->count() > 0) fields["seed"] = f.seed;
        auto c = TrainConfig::from_fields(fields);
        c.validate();
        return c;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// ---- subcommands ---------------------------------------------------------

struct GenDataArgs {
    std::string kind = "ring";
    std::size_t n = 2000;
    std::uint64_t seed = 0;
    std::size_t components = 8;
    double radius = 1.0, stddev = 0.05, band = 0.2, rotation = 90.0, scale = 0.5, moon_noise = 0.05;
    bool paired = false;
    std::string out;
};

RunRecord cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
    data::DomainSpec spec;
    spec.kind = data::parse_domain_kind(a.kind);
    spec.n = a.n;
    spec.seed = a.seed;
    spec.components = a.components;
    spec.radius = a.radius;
    spec.stddev = a.stddev;
    spec.band = a.band;
    spec.rotation_deg = a.rotation;
    spec.scale = a.scale;
    spec.moon_noise = a.moon_noise;
    spec.paired = a.paired;
    const auto ds = data::gen_domain_pair(spec);
    RunRecord rec{a.out, fields_json(spec.to_fields()), {}};
    fs::create_directories(rec.out_dir);
    data::save_csv(ds, rec.out_dir);
    rec.artifacts = {rec.out_dir / "x.csv", rec.out_dir / "y.csv", rec.out_dir / "spec.json"};
    out << "wrote " << ds.x.rows() << " + " << ds.y.rows() << " samples to " << a.out << '\n';
    return rec;
}

struct TrainArgs {
    TrainFlags flags;
    std::string out;
    std::string data_dir;
    std::string resume_path;
    int until = -1;
};

RunRecord cmd_train(TrainArgs& a, std::ostream& out, std::ostream& err) {
    std::optional<Checkpoint> ckpt;
    if (!a.resume_path.empty()) ckpt = load_checkpoint(a.resume_path);
    TrainConfig config = resolve_config(a.flags, ckpt ? ckpt->config : TrainConfig{});
    config.output_dir = a.out;
    if (a.until > config.epochs) throw UsageError("--until exceeds --epochs");

    const auto dataset = a.data_dir.empty() ? data::gen_domain_pair(config.dataset) : data::load_csv(a.data_dir);
    RunRecord rec{a.out, fields_json(config.to_fields()), {}};
    fs::create_directories(rec.out_dir);
    {
        std::ofstream ini(rec.out_dir / "config.ini", std::ios::trunc);
        ini << config.to_ini();
    }
    const int end = a.until >= 0 ? a.until : config.epochs;
    TrainResult result;
    try {
        if (ckpt) {
            if (end < ckpt->state.epoch) throw UsageError("--until lies before the checkpoint epoch");
            result = resume(*ckpt, config, dataset, end - ckpt->state.epoch);
        } else {
            result = train(config, dataset, end);
        }
    } catch (const TrainingDiverged& e) {
        err << "training aborted: " << e.what() << "; last checkpoint kept\n";
        throw;
    }
    rec.artifacts = {rec.out_dir / "config.ini", rec.out_dir / "checkpoint.bin", rec.out_dir / "train_log.csv"};
    out << "trained to epoch " << result.state.epoch << " (" << result.state.step << " steps)";
    if (!result.log.empty()) {
        const auto& l = result.log.back().losses;
        char buf[160];
        std::snprintf(buf, sizeof buf, "; last total %.6g, recon_x %.6g, recon_y %.6g", l.total, l.recon_x,
                      l.recon_y);
        out << buf;
    }
    out << '\n';
    return rec;
}

struct SynthArgs {
    std::string checkpoint;
    std::vector<double> begin, end;
    int n = 8;
    std::string out;
    bool plot = false;
    int size = 256;
};

RunRecord cmd_synth(const SynthArgs& a, std::ostream& out) {
    const auto ckpt = load_checkpoint(a.checkpoint);
    if (a.begin.size() != ckpt.config.arch.x_dim || a.end.size() != ckpt.config.arch.x_dim)
        throw UsageError("--begin/--end need " + std::to_string(ckpt.config.arch.x_dim) + " coordinates");
    auto traj = interpolate(ckpt.state.bundle, a.begin, a.end, a.n);
    char id[32];
    std::snprintf(id, sizeof id, "%016llx@%d", static_cast<unsigned long long>(ckpt.config_hash),
                  ckpt.state.epoch);
    traj.checkpoint_id = id;
    RunRecord rec{a.out, json::object(), {}};
    rec.config = {{"checkpoint", a.checkpoint}, {"checkpoint_id", traj.checkpoint_id},
                  {"begin", a.begin},           {"end", a.end},
                  {"n", a.n}};
    fs::create_directories(rec.out_dir);
    export_trajectory(traj, rec.out_dir / "trajectory.csv");
    rec.artifacts.push_back(rec.out_dir / "trajectory.csv");
    if (a.plot) {
        render_trajectory_ppm(traj, rec.out_dir / "trajectory.ppm", a.size);
        rec.artifacts.push_back(rec.out_dir / "trajectory.ppm");
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu frames per domain; max step x %.6g, y %.6g; latent residual %.3g\n",
                  traj.frames(), max_step(traj.source), max_step(traj.target), affine_residual(traj));
    out << buf;
    return rec;
}

struct VerifyArgs {
    std::size_t instances = 200;
    std::size_t products = 50;
    std::size_t max_support = 6;
    std::uint64_t seed = 0;
    std::string metric = "sqeuclidean";
    std::string out;
    bool verbose = false;
};

RunRecord cmd_verify(const VerifyArgs& a, std::ostream& out, bool& passed) {
    const auto metric = ot::parse_metric(a.metric);
    ot::InstanceSpec spec;
    spec.max_support = a.max_support;
    Rng rng(derive_seed(a.seed, 0x7468656fULL));
    std::string csv = ot::DecompositionReport::csv_header() + "\n";
    double min_gap = std::numeric_limits<double>::infinity();
    double max_product_gap = 0.0;
    std::size_t index = 0;
    auto record = [&](const ot::DecompositionReport& r) {
        csv += r.csv_row(index) + "\n";
        if (a.verbose) out << "instance " << index << ":\n" << r.text();
        ++index;
    };
    for (std::size_t i = 0; i < a.instances; ++i) {
        const auto pa = i % 2 ? ot::random_deterministic_joint(rng, spec) : ot::random_joint(rng, spec);
        const auto pb = i % 2 ? ot::random_deterministic_joint(rng, spec) : ot::random_joint(rng, spec);
        const auto r = ot::decomposition_report(pa, pb, metric, metric);
        min_gap = std::min(min_gap, r.gap);
        record(r);
    }
    for (std::size_t i = 0; i < a.products; ++i) {
        const auto pa = ot::random_product_joint(rng, spec);
        const auto pb = ot::random_product_joint(rng, spec);
        const auto r = ot::decomposition_report(pa, pb, metric, metric);
        min_gap = std::min(min_gap, r.gap);
        max_product_gap = std::max(max_product_gap, std::abs(r.gap));
        record(r);
    }
    passed = min_gap >= -1e-9 && max_product_gap <= 1e-9;
    RunRecord rec{a.out, json::object(), {}};
    rec.config = {{"instances", a.instances}, {"products", a.products}, {"max_support", a.max_support},
                  {"seed", a.seed},           {"metric", a.metric}};
    if (!a.out.empty()) {
        fs::create_directories(rec.out_dir);
        std::ofstream f(rec.out_dir / "decomposition.csv", std::ios::trunc);
        f << csv;
        if (!f) throw std::runtime_error("cannot write decomposition.csv");
        rec.artifacts.push_back(rec.out_dir / "decomposition.csv");
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu general + %zu product instances; min gap %.3g, max |product gap| %.3g\n",
                  a.instances, a.products, min_gap, max_product_gap);
    out << buf << (passed ? "PASS" : "FAIL") << '\n';
    return rec;
}

struct EvalArgs {
    std::string checkpoint;
    bool oracle = false;
    std::string data_dir;
    std::string kind;
    std::uint64_t seed = 0;
    std::size_t eval_n = 1000;
    std::size_t ot_n = 64;
    std::string out;
};

RunRecord cmd_eval(const EvalArgs& a, std::ostream& out) {
    TrainConfig config;
    ModelBundle bundle;
    if (!a.checkpoint.empty()) {
        auto ckpt = load_checkpoint(a.checkpoint);
        config = ckpt.config;
        bundle = std::move(ckpt.state.bundle);
    }
    if (!a.kind.empty()) config.dataset.kind = data::parse_domain_kind(a.kind);
    data::DomainDataset dataset;
    if (!a.data_dir.empty()) {
        dataset = data::load_csv(a.data_dir);
    } else {
        dataset = data::gen_domain_pair(config.dataset);
    }
    if (a.oracle) {
        if (!dataset.map) throw UsageError("--oracle needs a dataset with a known map");
        bundle = make_oracle_bundle(config.arch, *dataset.map, config.seed);
    }
    const EvalConfig ec{a.eval_n, a.ot_n, a.seed};
    const auto report = evaluate(bundle, dataset, ec);
    const std::string task = dataset.spec ? std::string(data::to_string(dataset.spec->kind)) : "csv";
    const std::string csv = EvalReport::csv_header() + "\n" + report.csv_row(config.weights.lambda_z, task) + "\n";
    out << csv;
    RunRecord rec{a.out, json::object(), {}};
    rec.config = {{"checkpoint", a.checkpoint}, {"oracle", a.oracle}, {"data", a.data_dir},
                  {"seed", a.seed},             {"eval_n", a.eval_n}, {"ot_n", a.ot_n}};
    if (!a.out.empty()) {
        fs::create_directories(rec.out_dir);
        std::ofstream f(rec.out_dir / "eval.csv", std::ios::trunc);
        f << csv;
        if (!f) throw std::runtime_error("cannot write eval.csv");
        rec.artifacts.push_back(rec.out_dir / "eval.csv");
    }
    return rec;
}

struct SweepArgs {
    TrainFlags flags;
    std::vector<double> values{0.01, 0.1, 1.0, 10.0};
    std::vector<std::string> tasks;
    std::size_t jobs = 1;
    std::size_t eval_n = 1000;
    std::size_t ot_n = 64;
    std::uint64_t eval_seed = 0;
    std::string out;
};

RunRecord cmd_sweep(SweepArgs& a, std::ostream& out) {
    TrainConfig config = resolve_config(a.flags, TrainConfig{});
    config.output_dir = a.out;
    SweepOptions opts;
    for (const auto& t : a.tasks) opts.tasks.push_back(data::parse_domain_kind(t));
    opts.eval = EvalConfig{a.eval_n, a.ot_n, a.eval_seed};
    opts.jobs = a.jobs;
    RunRecord rec{a.out, fields_json(config.to_fields()), {}};
    rec.config["values"] = a.values;
    fs::create_directories(rec.out_dir);
    const auto rows = lambda_z_sweep(config, a.values, opts);
    write_sweep_csv(rows, rec.out_dir / "sweep.csv");
    rec.artifacts.push_back(rec.out_dir / "sweep.csv");
    out << sweep_csv(rows);
    return rec;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Joint Wasserstein distribution matching on planar toy domains", "jwdm"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    const std::vector<std::string> kinds{"ring", "gauss-mix", "two-moons-affine"};

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a paired-map toy dataset (x.csv, y.csv, spec.json)");
    gen_cmd->add_option("--kind", gen.kind, "Task kind")->check(CLI::IsMember(kinds));
    gen_cmd->add_option("--n", gen.n, "Samples per domain")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.seed, "Generator seed")->envname("JDM_SEED");
    gen_cmd->add_option("--components", gen.components, "Mixture components")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--radius", gen.radius, "Ring radius");
    gen_cmd->add_option("--stddev", gen.stddev, "Component standard deviation");
    gen_cmd->add_option("--band", gen.band, "Ring samples are kept within radius +- band");
    gen_cmd->add_option("--rotation", gen.rotation, "Target map rotation in degrees");
    gen_cmd->add_option("--scale", gen.scale, "Target map isotropic scale");
    gen_cmd->add_option("--moon-noise", gen.moon_noise, "Two-moons jitter");
    gen_cmd->add_flag("--paired", gen.paired, "Map the same X samples instead of a fresh draw");
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train a model bundle; writes checkpoint.bin, train_log.csv");
    add_train_flags(train_cmd, tr.flags);
    train_cmd->add_option("--data", tr.data_dir, "Dataset directory from gen-data (default: generate)")
        ->check(CLI::ExistingDirectory);
    train_cmd->add_option("--resume", tr.resume_path, "Continue from this checkpoint")->check(CLI::ExistingFile);
    train_cmd->add_option("--until", tr.until, "Stop after this epoch (default: --epochs)")->default_str("");
    train_cmd->add_option("--out", tr.out, "Output directory")->required();

    SynthArgs sy;
    auto* synth_cmd = app.add_subcommand("synth", "Interpolate between two X points; writes trajectory.csv");
    synth_cmd->add_option("--checkpoint", sy.checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
    synth_cmd->add_option("--begin", sy.begin, "First X point, comma separated")->required()->delimiter(',');
    synth_cmd->add_option("--end", sy.end, "Last X point, comma separated")->required()->delimiter(',');
    synth_cmd->add_option("--n", sy.n, "Interpolation frames; n + 1 frames per domain")->check(CLI::Range(2, 100000));
    synth_cmd->add_flag("--plot", sy.plot, "Also write trajectory.ppm");
    synth_cmd->add_option("--size", sy.size, "Plot size in pixels")->check(CLI::Range(16, 4096));
    synth_cmd->add_option("--out", sy.out, "Output directory")->required();

    VerifyArgs ve;
    auto* verify_cmd = app.add_subcommand("verify-theorem", "Check W_c >= W_c1 + W_c2 on random discrete joints");
    verify_cmd->add_option("--instances", ve.instances, "General random instances")->check(CLI::Range(1, 1000000));
    verify_cmd->add_option("--products", ve.products, "Additional product-measure instances");
    verify_cmd->add_option("--max-support", ve.max_support, "Support cap per joint")->check(CLI::Range(1, 64));
    verify_cmd->add_option("--seed", ve.seed, "Instance seed")->envname("JDM_SEED");
    verify_cmd->add_option("--metric", ve.metric, "Ground metric per block")
        ->check(CLI::IsMember({"l1", "l2", "sqeuclidean"}));
    verify_cmd->add_flag("--verbose", ve.verbose, "Print every report");
    verify_cmd->add_option("--out", ve.out, "Output directory for decomposition.csv");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a held-out sample");
    auto* ck_opt = eval_cmd->add_option("--checkpoint", ev.checkpoint, "Trained checkpoint")->check(CLI::ExistingFile);
    auto* or_opt = eval_cmd->add_flag("--oracle", ev.oracle, "Evaluate the exact-map oracle bundle instead");
    ck_opt->excludes(or_opt);
    eval_cmd->add_option("--data", ev.data_dir, "Dataset directory (default: checkpoint's generator spec)")
        ->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--kind", ev.kind, "Override the generated task kind")->check(CLI::IsMember(kinds));
    eval_cmd->add_option("--seed", ev.seed, "Held-out sample seed")->envname("JDM_SEED");
    eval_cmd->add_option("--eval-n", ev.eval_n, "Held-out samples per domain")->check(CLI::Range(8, 10000000));
    eval_cmd->add_option("--ot-n", ev.ot_n, "Points in the exact OT columns (0 disables)")->check(CLI::Range(0, 64));
    eval_cmd->add_option("--out", ev.out, "Output directory for eval.csv");

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate one model per lambda_z value");
    add_train_flags(sweep_cmd, sw.flags);
    sweep_cmd->add_option("--values", sw.values, "lambda_z values")->delimiter(',');
    sweep_cmd->add_option("--tasks", sw.tasks, "Task kinds, comma separated (default: --kind)")
        ->delimiter(',')
        ->check(CLI::IsMember(kinds));
    sweep_cmd->add_option("--jobs", sw.jobs, "Parallel training threads")->check(CLI::Range(1, 256));
    sweep_cmd->add_option("--eval-n", sw.eval_n, "Held-out samples per domain")->check(CLI::Range(8, 10000000));
    sweep_cmd->add_option("--ot-n", sw.ot_n, "Points in the exact OT columns (0 disables)")->check(CLI::Range(0, 64));
    sweep_cmd->add_option("--eval-seed", sw.eval_seed, "Held-out sample seed");
    sweep_cmd->add_option("--out", sw.out, "Output directory")->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (eval_cmd->parsed() && ev.checkpoint.empty() && !ev.oracle) {
        err << "eval: one of --checkpoint or --oracle is required\n";
        return kExitUsage;
    }

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    const std::string name = app.get_subcommands().front()->get_name();
    RunRecord rec;
    int status = kExitOk;
    try {
        if (gen_cmd->parsed()) {
            rec = cmd_gen_data(gen, out);
        } else if (train_cmd->parsed()) {
            rec.out_dir = tr.out;
            rec = cmd_train(tr, out, err);
        } else if (synth_cmd->parsed()) {
            rec = cmd_synth(sy, out);
        } else if (verify_cmd->parsed()) {
            bool passed = false;
            rec = cmd_verify(ve, out, passed);
            status = passed ? kExitOk : kExitRuntime;
        } else if (eval_cmd->parsed()) {
            rec = cmd_eval(ev, out);
        } else if (sweep_cmd->parsed()) {
            rec.out_dir = sw.out;
            rec = cmd_sweep(sw, out);
        }
    } catch (const UsageError& e) {
        err << name << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << name << ": " << e.what() << '\n';
        try {
            write_manifest(name, rec, elapsed(), kExitRuntime);
        } catch (const std::exception&) {
        }
        return kExitRuntime;
    }
    try {
        write_manifest(name, rec, elapsed(), status);
    } catch (const std::exception& e) {
        err << name << ": " << e.what() << '\n';
        return kExitRuntime;
    }
    return status;
}

}  // namespace jwdm
