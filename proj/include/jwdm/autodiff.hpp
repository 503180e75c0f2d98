// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Minimal reverse-mode automatic differentiation over dense row-major arrays
// of doubles. A Graph records every operation on a tape; backward() walks the
// tape once in reverse insertion order.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace jwdm::ad {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Dense array with an optional gradient buffer of the same length.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double value) { return Tensor({1}, {value}); }
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
        return Tensor({rows, cols}, std::move(data));
    }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    /// Leading dimension; 1 for scalars.
    std::size_t rows() const { return shape_.empty() ? 0 : shape_.front(); }
    /// Product of all trailing dimensions.
    std::size_t cols() const { return rows() == 0 ? 0 : size() / rows(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    const std::vector<double>& values() const { return data_; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    /// Value of a single-element tensor.
    double item() const;

    bool has_grad() const { return !grad_.empty(); }
    std::span<double> grad() { return grad_; }
    std::span<const double> grad() const { return grad_; }
    /// Allocates (if needed) and zeroes the gradient buffer.
    void zero_grad();
    void clear_grad() { grad_.clear(); }
    void set_grad(std::span<const double> g);

    /// Copy of rows [begin, begin + count) for a rank-2 tensor.
    Tensor slice_rows(std::size_t begin, std::size_t count) const;
    /// Rows gathered by index for a rank-2 tensor.
    Tensor gather_rows(std::span<const std::size_t> indices) const;

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    Shape shape_;
    std::vector<double> data_;
    std::vector<double> grad_;
};

enum class Op {
    leaf,
    matmul,
    add,
    sub,
    mul,
    neg,
    scale,
    relu,
    leaky_relu,
    tanh,
    sigmoid,
    log,
    mean,
    sum,
    abs,
    clamp,
    row_sum,
};

const char* op_name(Op op);

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the Graph lives.
class Var {
public:
    Var() = default;
    Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

    Graph& graph() const { return *graph_; }
    std::size_t id() const { return id_; }
    bool valid() const { return graph_ != nullptr; }

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    double item() const { return value().item(); }
    std::span<const double> grad() const;

private:
    Graph* graph_ = nullptr;
    std::size_t id_ = 0;
};

/// Append-only tape of operations.
///
/// Not thread-safe; a Graph and the tensors bound to it belong to one thread
/// for the duration of a forward/backward episode.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    /// Binds an external tensor as a differentiable leaf. The tensor is read
    /// through a pointer; backward() writes d(loss)/d(tensor) into its grad.
    /// Binding the same tensor twice returns the same node.
    Var parameter(Tensor& tensor);
    /// Differentiable leaf owning a copy of `value`.
    Var input(Tensor value);
    /// Non-differentiable leaf.
    Var constant(Tensor value);
    Var constant(double value) { return constant(Tensor::scalar(value)); }
    /// New non-differentiable leaf holding the current value of `v`.
    Var detach(Var v);

    /// Generic forward operation. `attr` carries the op parameter (scale
    /// factor, leaky slope); `attr2` the upper clamp bound.
    Var apply(Op op, std::span<const Var> inputs, double attr = 0.0, double attr2 = 0.0);

    /// Reverse sweep from a single-element loss. Every node's gradient is
    /// reset first; nodes the loss does not depend on end with zero gradient.
    void backward(Var loss);

    const Tensor& value(Var v) const;
    std::span<const double> grad(Var v) const;
    bool requires_grad(Var v) const;
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Op op = Op::leaf;
        std::size_t in0 = 0;
        std::size_t in1 = 0;
        int arity = 0;
        double attr = 0.0;
        double attr2 = 0.0;
        Tensor value;
        Tensor* external = nullptr;
        bool requires_grad = false;
        std::vector<double> grad;
    };

    Var push(Node node);
    const Tensor& node_value(const Node& n) const { return n.external ? *n.external : n.value; }
    void backward_node(std::size_t id);

    std::vector<Node> nodes_;
    std::unordered_map<const Tensor*, std::size_t> bound_;
};

// Convenience wrappers around Graph::apply.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double factor);
Var relu(Var a);
Var leaky_relu(Var a, double slope = 0.01);
Var tanh(Var a);
Var sigmoid(Var a);
Var log(Var a);
Var mean(Var a);
Var sum(Var a);
Var abs(Var a);
Var clamp(Var a, double lo, double hi);
/// Sum over all but the leading dimension: [n x k] -> [n].
Var row_sum(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var a) { return neg(a); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator*(Var a, double s) { return scale(a, s); }
Var operator-(double c, Var a);
Var operator+(Var a, double c);

}  // namespace jwdm::ad
