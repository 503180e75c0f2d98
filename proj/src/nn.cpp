// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include "jwdm/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "jwdm/rng.hpp"

namespace jwdm::nn {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "identity";
}

Activation parse_activation(std::string_view name) {
    for (auto a : {Activation::identity, Activation::relu, Activation::leaky_relu, Activation::tanh,
                   Activation::sigmoid})
        if (to_string(a) == name) return a;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

Mlp Mlp::init(std::span<const std::size_t> dims, std::span<const Activation> activations,
              std::uint64_t seed, double leaky_slope) {
    if (dims.size() < 2) throw std::invalid_argument("Mlp::init: need at least input and output dims");
    if (activations.size() != dims.size() - 1)
        throw std::invalid_argument("Mlp::init: expected " + std::to_string(dims.size() - 1) +
                                    " activations, got " + std::to_string(activations.size()));
    for (auto d : dims)
        if (d == 0) throw std::invalid_argument("Mlp::init: layer widths must be positive");

    Rng rng(seed);
    Mlp net;
    net.leaky_slope_ = leaky_slope;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t in = dims[l], out = dims[l + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(in + out));
        DenseLayer layer{Tensor({in, out}), Tensor({out}, 0.0), activations[l]};
        for (auto& w : layer.weight.data()) {
            // Open interval: resample the (measure-zero) lower endpoint.
            double v = rng.uniform(-a, a);
            while (v == -a) v = rng.uniform(-a, a);
            w = v;
        }
        net.layers_.push_back(std::move(layer));
    }
    return net;
}

namespace {

Var activate(Var x, Activation a, double slope) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::relu: return ad::relu(x);
        case Activation::leaky_relu: return ad::leaky_relu(x, slope);
        case Activation::tanh: return ad::tanh(x);
        case Activation::sigmoid: return ad::sigmoid(x);
    }
    return x;
}

double apply_activation(double x, Activation a, double slope) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::leaky_relu: return x > 0.0 ? x : slope * x;
        case Activation::tanh: return std::tanh(x);
        case Activation::sigmoid:
            return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    return x;
}

}  // namespace

Var Mlp::forward(Graph& graph, Var x) {
    if (layers_.empty()) throw std::logic_error("Mlp::forward on an empty network");
    const auto& shape = x.shape();
    if (shape.size() != 2 || shape[1] != input_dim())
        throw ad::ShapeError("Mlp::forward: expected [batch x " + std::to_string(input_dim()) +
                             "], got " + ad::to_string(shape));
    Var h = x;
    for (auto& layer : layers_) {
        h = ad::matmul(h, graph.parameter(layer.weight)) + graph.parameter(layer.bias);
        h = activate(h, layer.activation, leaky_slope_);
    }
    return h;
}

Tensor Mlp::evaluate(const Tensor& x) const {
    if (layers_.empty()) throw std::logic_error("Mlp::evaluate on an empty network");
    if (x.rank() != 2 || x.shape()[1] != input_dim())
        throw ad::ShapeError("Mlp::evaluate: expected [batch x " + std::to_string(input_dim()) +
                             "], got " + ad::to_string(x.shape()));
    Tensor h = x;
    for (const auto& layer : layers_) {
        const std::size_t rows = h.rows(), in = layer.weight.shape()[0],
                          out = layer.weight.shape()[1];
        Tensor next({rows, out}, 0.0);
        // Same accumulation order as the graph path, so both agree bit for bit.
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t p = 0; p < in; ++p) {
                const double hp = h.at(i, p);
                if (hp == 0.0) continue;
                for (std::size_t j = 0; j < out; ++j) next.at(i, j) += hp * layer.weight.at(p, j);
            }
            for (std::size_t j = 0; j < out; ++j) {
                next.at(i, j) = apply_activation(next.at(i, j) + layer.bias[j], layer.activation,
                                                 leaky_slope_);
            }
        }
        h = std::move(next);
    }
    return h;
}

std::size_t Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.shape()[0]; }
std::size_t Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.shape()[1]; }

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

std::vector<ParamRef> Mlp::parameters(std::string_view prefix) {
    std::vector<ParamRef> out;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const std::string base = std::string(prefix) + "." + std::to_string(l);
        out.push_back({base + ".weight", &layers_[l].weight});
        out.push_back({base + ".bias", &layers_[l].bias});
    }
    return out;
}

bool Mlp::operator==(const Mlp& other) const {
    if (layers_.size() != other.layers_.size() || leaky_slope_ != other.leaky_slope_) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& a = layers_[l];
        const auto& b = other.layers_[l];
        if (!(a.weight == b.weight) || !(a.bias == b.bias) || a.activation != b.activation)
            return false;
    }
    return true;
}

double lr_at(int epoch, const LrSchedule& s) {
    if (s.decay_start > s.total_epochs || s.decay_start < 0)
        throw std::invalid_argument("lr schedule: decay start must lie in [0, total epochs]");
    if (epoch < 0 || epoch > s.total_epochs)
        throw std::out_of_range("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                                std::to_string(s.total_epochs) + "]");
    if (epoch < s.decay_start) return s.base_lr;
    if (s.total_epochs == s.decay_start) return 0.0;
    return s.base_lr * static_cast<double>(s.total_epochs - epoch) /
           static_cast<double>(s.total_epochs - s.decay_start);
}

AdamState AdamState::for_params(std::span<const ParamRef> params, double beta1, double beta2,
                                double eps) {
    AdamState st;
    st.beta1 = beta1;
    st.beta2 = beta2;
    st.eps = eps;
    for (const auto& p : params) {
        st.first_moment.emplace_back(p.tensor->size(), 0.0);
        st.second_moment.emplace_back(p.tensor->size(), 0.0);
    }
    return st;
}

void adam_step(std::span<const ParamRef> params, AdamState& st, double lr) {
    if (st.first_moment.size() != params.size() || st.second_moment.size() != params.size())
        throw std::invalid_argument("adam_step: optimizer state tracks " +
                                    std::to_string(st.first_moment.size()) + " parameters, got " +
                                    std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& t = *params[i].tensor;
        if (!t.has_grad() || t.grad().size() != t.size())
            throw std::invalid_argument("adam_step: missing gradient for parameter '" +
                                        params[i].name + "'");
        if (st.first_moment[i].size() != t.size())
            throw std::invalid_argument("adam_step: moment size mismatch for parameter '" +
                                        params[i].name + "'");
    }
    ++st.step;
    const double t = static_cast<double>(st.step);
    const double c1 = 1.0 - std::pow(st.beta1, t);
    const double c2 = 1.0 - std::pow(st.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i].tensor;
        auto w = p.data();
        auto g = p.grad();
        auto& m = st.first_moment[i];
        auto& v = st.second_moment[i];
        for (std::size_t k = 0; k < w.size(); ++k) {
            m[k] = st.beta1 * m[k] + (1.0 - st.beta1) * g[k];
            v[k] = st.beta2 * v[k] + (1.0 - st.beta2) * g[k] * g[k];
            const double mhat = m[k] / c1;
            const double vhat = v[k] / c2;
            w[k] -= lr * mhat / (std::sqrt(vhat) + st.eps);
        }
    }
}

}  // namespace jwdm::nn
