// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jwdm/autodiff.hpp"

namespace jwdm::nn {

using ad::Graph;
using ad::Tensor;
using ad::Var;

enum class Activation { identity, relu, leaky_relu, tanh, sigmoid };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct DenseLayer {
    Tensor weight;  // [in x out]
    Tensor bias;    // [out]
    Activation activation = Activation::identity;
};

/// A named handle to a trainable tensor.
struct ParamRef {
    std::string name;
    Tensor* tensor = nullptr;
};

/// Fully connected network y = act(x W + b) per layer, row-major batches.
class Mlp {
public:
    Mlp() = default;

    /// Glorot-uniform weights in (-a, a), a = sqrt(6 / (fan_in + fan_out));
    /// zero biases. `dims` lists the layer widths including input and output.
    static Mlp init(std::span<const std::size_t> dims, std::span<const Activation> activations,
                    std::uint64_t seed, double leaky_slope = 0.01);

    /// Builds the forward pass on `graph`, binding this network's parameters.
    Var forward(Graph& graph, Var x);
    /// Forward pass without gradient bookkeeping. `x` is [batch x input_dim].
    Tensor evaluate(const Tensor& x) const;

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::size_t parameter_count() const;
    double leaky_slope() const { return leaky_slope_; }

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    /// Parameters in a stable order, named "<prefix>.<layer>.weight|bias".
    std::vector<ParamRef> parameters(std::string_view prefix);

    bool operator==(const Mlp& other) const;

private:
    std::vector<DenseLayer> layers_;
    double leaky_slope_ = 0.01;
};

/// Constant base rate, then linear decay to zero.
struct LrSchedule {
    double base_lr = 2e-4;
    int decay_start = 100;   // first epoch of the decay phase
    int total_epochs = 200;  // the rate reaches zero here
};

/// Learning rate for a 0-based epoch in [0, total_epochs].
double lr_at(int epoch, const LrSchedule& schedule);

struct AdamState {
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    /// Zeroed moments shaped like `params`.
    static AdamState for_params(std::span<const ParamRef> params, double beta1 = 0.5,
                                double beta2 = 0.999, double eps = 1e-8);

    bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update with learning rate `lr`. Every parameter
/// must carry a gradient of its own length.
void adam_step(std::span<const ParamRef> params, AdamState& state, double lr);

}  // namespace jwdm::nn
