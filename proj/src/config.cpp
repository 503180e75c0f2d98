// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "jwdm/trainer.hpp"

namespace jwdm {

namespace {

// Shortest of %.15g / %.17g that reads back to the same value.
std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T v{};
    const char* end = value.data() + value.size();
    auto [p, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || p != end)
        throw std::invalid_argument("config: invalid value '" + value + "' for '" + key + "'");
    return v;
}

std::string join_dims(const std::vector<std::size_t>& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
    return s;
}

std::vector<std::size_t> parse_dims(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        if (first == std::string::npos) throw std::invalid_argument("config: empty entry in '" + key + "'");
        out.push_back(parse_number<std::size_t>(key, item.substr(first, last - first + 1)));
    }
    if (out.empty()) throw std::invalid_argument("config: '" + key + "' needs at least one width");
    return out;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

void TrainConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
    if (epochs < 0) fail("epochs must be >= 0");
    if (decay_start < 0 || decay_start > epochs) fail("decay_start must lie in [0, epochs]");
    if (!(lr >= 0.0)) fail("lr must be >= 0");
    if (batch_size == 0) fail("batch_size must be >= 1");
    if (disc_steps == 0) fail("disc_steps must be >= 1");
    if (weights.lambda_x < 0.0 || weights.lambda_y < 0.0 || weights.lambda_z < 0.0)
        fail("loss weights must be >= 0");
    if (!(weights.lambda_mix > 0.0 && weights.lambda_mix < 1.0)) fail("lambda_mix must lie in (0, 1)");
    if (arch.latent_dim == 0) fail("latent_dim must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("Adam betas must lie in [0, 1)");
}

std::map<std::string, std::string> TrainConfig::to_fields() const {
    std::map<std::string, std::string> f{
        {"epochs", std::to_string(epochs)},
        {"decay_start", std::to_string(decay_start)},
        {"lr", fmt17(lr)},
        {"batch_size", std::to_string(batch_size)},
        {"lambda_x", fmt17(weights.lambda_x)},
        {"lambda_y", fmt17(weights.lambda_y)},
        {"lambda_z", fmt17(weights.lambda_z)},
        {"lambda_mix", fmt17(weights.lambda_mix)},
        {"gan_loss", std::string(to_string(weights.gan_loss))},
        {"x_dim", std::to_string(arch.x_dim)},
        {"y_dim", std::to_string(arch.y_dim)},
        {"latent_dim", std::to_string(arch.latent_dim)},
        {"ae_hidden", join_dims(arch.ae_hidden)},
        {"disc_hidden", join_dims(arch.disc_hidden)},
        {"leaky_slope", fmt17(arch.leaky_slope)},
        {"beta1", fmt17(beta1)},
        {"beta2", fmt17(beta2)},
        {"adam_eps", fmt17(adam_eps)},
        {"disc_steps", std::to_string(disc_steps)},
        {"seed", std::to_string(seed)},
        {"output_dir", output_dir},
    };
    for (const auto& [k, v] : dataset.to_fields()) f["data." + k] = v;
    return f;
}

TrainConfig TrainConfig::from_fields(const std::map<std::string, std::string>& fields) {
    TrainConfig c;
    std::map<std::string, std::string> data_fields = c.dataset.to_fields();
    bool affine_given = false;
    for (const auto& [key, value] : fields) {
        if (key.rfind("data.", 0) == 0) {
            data_fields[key.substr(5)] = value;
            if (key == "data.affine") affine_given = true;
            continue;
        }
        if (key == "epochs") c.epochs = parse_number<int>(key, value);
        else if (key == "decay_start") c.decay_start = parse_number<int>(key, value);
        else if (key == "lr") c.lr = parse_number<double>(key, value);
        else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
        else if (key == "lambda_x") c.weights.lambda_x = parse_number<double>(key, value);
        else if (key == "lambda_y") c.weights.lambda_y = parse_number<double>(key, value);
        else if (key == "lambda_z") c.weights.lambda_z = parse_number<double>(key, value);
        else if (key == "lambda_mix") c.weights.lambda_mix = parse_number<double>(key, value);
        else if (key == "gan_loss") c.weights.gan_loss = parse_gan_loss(value);
        else if (key == "x_dim") c.arch.x_dim = parse_number<std::size_t>(key, value);
        else if (key == "y_dim") c.arch.y_dim = parse_number<std::size_t>(key, value);
        else if (key == "latent_dim") c.arch.latent_dim = parse_number<std::size_t>(key, value);
        else if (key == "ae_hidden") c.arch.ae_hidden = parse_dims(key, value);
        else if (key == "disc_hidden") c.arch.disc_hidden = parse_dims(key, value);
        else if (key == "leaky_slope") c.arch.leaky_slope = parse_number<double>(key, value);
        else if (key == "beta1") c.beta1 = parse_number<double>(key, value);
        else if (key == "beta2") c.beta2 = parse_number<double>(key, value);
        else if (key == "adam_eps") c.adam_eps = parse_number<double>(key, value);
        else if (key == "disc_steps") c.disc_steps = parse_number<std::size_t>(key, value);
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "output_dir") c.output_dir = value;
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (!affine_given) data_fields.erase("affine");
    c.dataset = data::DomainSpec::from_fields(data_fields);
    return c;
}

std::string TrainConfig::to_ini() const {
    std::string out;
    for (const auto& [k, v] : to_fields()) out += k + " = " + v + "\n";
    return out;
}

TrainConfig TrainConfig::from_ini(const std::string& text) {
    std::map<std::string, std::string> fields;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';' || s[0] == '[') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        for (auto& ch : key)
            if (ch == '-') ch = '_';
        fields[key] = trim(s.substr(eq + 1));
    }
    return from_fields(fields);
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_ini(ss.str());
}

std::uint64_t TrainConfig::hash() const {
    auto fields = to_fields();
    fields.erase("output_dir");
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& [k, v] : fields) {
        for (unsigned char ch : k + "=" + v + "\n") {
            h ^= ch;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

}  // namespace jwdm
