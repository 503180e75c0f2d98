// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include "jwdm/trainer.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

namespace jwdm {

namespace {

enum Stream : std::uint64_t { kInitStream = 1, kShuffleStream = 2, kPriorStream = 3 };

// ---- little-endian binary writer / reader --------------------------------

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u64(s.size());
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    void doubles(std::span<const double> v) {
        u64(v.size());
        for (double d : v) f64(d);
    }

    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = u64();
        need(n);
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }
    std::vector<double> doubles() {
        const auto n = u64();
        need(n * 8);
        std::vector<double> v(n);
        for (auto& d : v) d = f64();
        return v;
    }
    void raw(char* out, std::size_t n) {
        need(n);
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::uint64_t n) const {
        if (n > bytes_.size() - pos_) throw std::runtime_error("checkpoint: truncated file");
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

void write_mlp(Writer& w, const Mlp& net) {
    w.f64(net.leaky_slope());
    w.u32(static_cast<std::uint32_t>(net.layers().size()));
    for (const auto& layer : net.layers()) {
        w.u32(static_cast<std::uint32_t>(layer.activation));
        w.u64(layer.weight.rows());
        w.u64(layer.weight.cols());
        w.doubles(layer.weight.data());
        w.doubles(layer.bias.data());
    }
}

Mlp read_mlp(Reader& r) {
    const double slope = r.f64();
    const auto count = r.u32();
    if (count == 0) throw std::runtime_error("checkpoint: network without layers");
    std::vector<nn::DenseLayer> layers(count);
    for (auto& layer : layers) {
        const auto act = r.u32();
        if (act > static_cast<std::uint32_t>(nn::Activation::sigmoid))
            throw std::runtime_error("checkpoint: unknown activation code");
        layer.activation = static_cast<nn::Activation>(act);
        const auto in = r.u64();
        const auto out = r.u64();
        auto w = r.doubles();
        auto b = r.doubles();
        if (w.size() != in * out || b.size() != out)
            throw std::runtime_error("checkpoint: layer size mismatch");
        layer.weight = Tensor({in, out}, std::move(w));
        layer.bias = Tensor({out}, std::move(b));
    }
    std::vector<std::size_t> dims{layers.front().weight.rows()};
    std::vector<nn::Activation> acts;
    for (const auto& l : layers) {
        if (l.weight.rows() != dims.back()) throw std::runtime_error("checkpoint: layer widths disagree");
        dims.push_back(l.weight.cols());
        acts.push_back(l.activation);
    }
    Mlp net = Mlp::init(dims, acts, 0, slope);
    net.layers() = std::move(layers);
    return net;
}

void write_adam(Writer& w, const nn::AdamState& s) {
    w.f64(s.beta1);
    w.f64(s.beta2);
    w.f64(s.eps);
    w.u64(s.step);
    w.u64(s.first_moment.size());
    for (std::size_t i = 0; i < s.first_moment.size(); ++i) {
        w.doubles(s.first_moment[i]);
        w.doubles(s.second_moment[i]);
    }
}

nn::AdamState read_adam(Reader& r) {
    nn::AdamState s;
    s.beta1 = r.f64();
    s.beta2 = r.f64();
    s.eps = r.f64();
    s.step = r.u64();
    const auto n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        s.first_moment.push_back(r.doubles());
        s.second_moment.push_back(r.doubles());
    }
    return s;
}

void check_finite(const char* term, double value, int epoch, std::uint64_t step) {
    if (std::isfinite(value)) return;
    char buf[160];
    std::snprintf(buf, sizeof buf, "non-finite loss term '%s' (%g) at epoch %d, step %llu", term,
                  value, epoch, static_cast<unsigned long long>(step));
    throw TrainingDiverged(buf, term);
}

void check_dataset(const TrainConfig& config, const data::DomainDataset& ds) {
    if (ds.x.rank() != 2 || ds.y.rank() != 2) throw std::invalid_argument("train: data must be 2-D tables");
    if (ds.x.cols() != config.arch.x_dim || ds.y.cols() != config.arch.y_dim)
        throw std::invalid_argument("train: data dimensions do not match the architecture");
    if (ds.x.rows() < config.batch_size || ds.y.rows() < config.batch_size)
        throw std::invalid_argument("train: each domain needs at least batch_size samples");
}

TrainResult run_epochs(TrainingState state, const TrainConfig& config,
                       const data::DomainDataset& dataset, int end_epoch, bool append_log) {
    config.validate();
    check_dataset(config, dataset);
    if (end_epoch < state.epoch || end_epoch > config.epochs)
        throw std::invalid_argument("train: epoch range outside the configured schedule");

    const bool persist = !config.output_dir.empty();
    std::filesystem::path out_dir = config.output_dir;
    if (persist) std::filesystem::create_directories(out_dir);
    const auto log_path = out_dir / "train_log.csv";
    if (persist && !append_log) write_log_csv({}, log_path, false);

    TrainResult result;
    const auto schedule = config.schedule();
    while (state.epoch < end_epoch) {
        const double lr = nn::lr_at(state.epoch, schedule);
        const auto batches =
            data::make_batches(dataset.x.rows(), dataset.y.rows(), config.batch_size, state.shuffle_rng);
        std::vector<LogRow> epoch_rows;
        for (const auto& batch : batches) {
            const Tensor bx = dataset.x.gather_rows(batch.x);
            const Tensor by = dataset.y.gather_rows(batch.y);
            epoch_rows.push_back(train_step(state, config, bx, by, lr, state.epoch));
        }
        ++state.epoch;
        if (persist) {
            write_log_csv(epoch_rows, log_path, true);
            Checkpoint ckpt{config, config.hash(), state};
            save_checkpoint(ckpt, out_dir / "checkpoint.bin");
        }
        result.log.insert(result.log.end(), epoch_rows.begin(), epoch_rows.end());
    }
    result.state = std::move(state);
    return result;
}

}  // namespace

// ---- checkpoints ---------------------------------------------------------

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
    Writer w;
    w.bytes.insert(w.bytes.end(), kCheckpointMagic, kCheckpointMagic + 8);
    w.u64(ckpt.config_hash);
    auto config = ckpt.config;
    config.output_dir.clear();
    w.str(config.to_ini());
    const auto& s = ckpt.state;
    w.u64(static_cast<std::uint64_t>(s.epoch));
    w.u64(s.step);
    w.str(s.shuffle_rng.state());
    w.str(s.prior_rng.state());
    w.u64(s.bundle.latent_dim);
    for (const Mlp* net : {&s.bundle.e1, &s.bundle.e2, &s.bundle.g1, &s.bundle.g2, &s.bundle.dx,
                           &s.bundle.dy, &s.bundle.dz})
        write_mlp(w, *net);
    write_adam(w, s.gen_opt);
    write_adam(w, s.disc_opt);
    return std::move(w.bytes);
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    char magic[8];
    r.raw(magic, 8);
    if (std::memcmp(magic, kCheckpointMagic, 8) != 0) throw std::runtime_error("checkpoint: bad magic");
    Checkpoint c;
    c.config_hash = r.u64();
    c.config = TrainConfig::from_ini(r.str());
    if (c.config.hash() != c.config_hash)
        throw std::runtime_error("checkpoint: stored config does not match its hash");
    auto& s = c.state;
    s.epoch = static_cast<int>(r.u64());
    s.step = r.u64();
    s.shuffle_rng.set_state(r.str());
    s.prior_rng.set_state(r.str());
    s.bundle.latent_dim = r.u64();
    for (Mlp* net : {&s.bundle.e1, &s.bundle.e2, &s.bundle.g1, &s.bundle.g2, &s.bundle.dx,
                     &s.bundle.dy, &s.bundle.dz})
        *net = read_mlp(r);
    s.bundle.validate();
    s.gen_opt = read_adam(r);
    s.disc_opt = read_adam(r);
    if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes");
    return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto bytes = serialize_checkpoint(ckpt);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write checkpoint '" + tmp.string() + "'");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write on checkpoint '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

// ---- training log --------------------------------------------------------

std::string log_csv_header() {
    return "epoch,step,lr,recon_x,recon_y,adv_x,adv_y,adv_z1,adv_z2,disc_x,disc_y,disc_z,total";
}

std::string log_csv_row(const LogRow& row) {
    const auto& l = row.losses;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%d,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                  row.epoch, static_cast<unsigned long long>(row.step), row.lr, l.recon_x, l.recon_y,
                  l.adv_x, l.adv_y, l.adv_z1, l.adv_z2, l.disc_x, l.disc_y, l.disc_z, l.total);
    return buf;
}

void write_log_csv(const std::vector<LogRow>& rows, const std::filesystem::path& path, bool append) {
    const bool fresh = !append || !std::filesystem::exists(path);
    std::ofstream out(path, fresh ? std::ios::trunc : std::ios::app);
    if (!out) throw std::runtime_error("cannot write training log '" + path.string() + "'");
    if (fresh) out << log_csv_header() << '\n';
    for (const auto& row : rows) out << log_csv_row(row) << '\n';
}

// ---- training ------------------------------------------------------------

Checkpoint TrainResult::checkpoint(const TrainConfig& config) const {
    return Checkpoint{config, config.hash(), state};
}

TrainingState initial_state(const TrainConfig& config) {
    config.validate();
    TrainingState s;
    s.bundle = ModelBundle::init(config.arch, derive_seed(config.seed, kInitStream));
    s.gen_opt = nn::AdamState::for_params(s.bundle.generator_parameters(), config.beta1,
                                          config.beta2, config.adam_eps);
    s.disc_opt = nn::AdamState::for_params(s.bundle.discriminator_parameters(), config.beta1,
                                           config.beta2, config.adam_eps);
    s.shuffle_rng = Rng(derive_seed(config.seed, kShuffleStream));
    s.prior_rng = Rng(derive_seed(config.seed, kPriorStream));
    return s;
}

LogRow train_step(TrainingState& state, const TrainConfig& config, const Tensor& batch_x,
                  const Tensor& batch_y, double lr, int epoch) {
    auto& bundle = state.bundle;
    const auto& w = config.weights;

    Graph g;
    const auto src = forward_source(g, bundle, g.constant(batch_x));
    const auto tgt = forward_target(g, bundle, g.constant(batch_y));

    LossBreakdown losses;
    const auto disc_params = bundle.discriminator_parameters();
    for (std::size_t k = 0; k < config.disc_steps; ++k) {
        const Tensor prior = sample_prior(batch_x.rows(), bundle.latent_dim, state.prior_rng);
        Graph dg;
        const auto d = discriminator_objective(dg, bundle, batch_x, batch_y, prior, src, tgt, w);
        losses.disc_x = d.disc_x.item();
        losses.disc_y = d.disc_y.item();
        losses.disc_z = d.disc_z.item();
        check_finite("disc_x", losses.disc_x, epoch, state.step);
        check_finite("disc_y", losses.disc_y, epoch, state.step);
        check_finite("disc_z", losses.disc_z, epoch, state.step);
        dg.backward(-d.objective);
        nn::adam_step(disc_params, state.disc_opt, lr);
    }

    const auto gen = total_generator_loss(g, bundle, src, tgt, w);
    const auto b = gen.breakdown();
    losses.recon_x = b.recon_x;
    losses.recon_y = b.recon_y;
    losses.adv_x = b.adv_x;
    losses.adv_y = b.adv_y;
    losses.adv_z1 = b.adv_z1;
    losses.adv_z2 = b.adv_z2;
    losses.total = b.total;
    const std::pair<const char*, double> terms[] = {
        {"recon_x", b.recon_x}, {"recon_y", b.recon_y}, {"adv_x", b.adv_x},
        {"adv_y", b.adv_y},     {"adv_z1", b.adv_z1},   {"adv_z2", b.adv_z2},
        {"total", b.total}};
    for (const auto& [name, value] : terms) check_finite(name, value, epoch, state.step);
    g.backward(gen.total);
    nn::adam_step(bundle.generator_parameters(), state.gen_opt, lr);

    LogRow row{epoch, state.step, lr, losses};
    ++state.step;
    return row;
}

TrainResult train(const TrainConfig& config, const data::DomainDataset& dataset,
                  std::optional<int> until_epoch) {
    return run_epochs(initial_state(config), config, dataset, until_epoch.value_or(config.epochs),
                      false);
}

TrainResult resume(const Checkpoint& checkpoint, const TrainConfig& config,
                   const data::DomainDataset& dataset, int extra_epochs) {
    if (config.hash() != checkpoint.config_hash)
        throw std::invalid_argument("resume: configuration differs from the checkpoint's");
    if (extra_epochs < 0) throw std::invalid_argument("resume: extra_epochs must be >= 0");
    const int end = checkpoint.state.epoch + extra_epochs;
    if (end > config.epochs)
        throw std::invalid_argument("resume: would run past the configured " +
                                    std::to_string(config.epochs) + " epochs");
    return run_epochs(checkpoint.state, config, dataset, end, true);
}

}  // namespace jwdm
