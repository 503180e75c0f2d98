// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include "jwdm/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace jwdm::ad {

std::string to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

namespace {

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const Shape& shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
    for (auto d : shape)
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + to_string(shape));
}

// How an operand of a binary elementwise op maps onto the output index.
enum class Bcast { same, scalar, row };

struct BinaryLayout {
    Shape out;
    Bcast a = Bcast::same;
    Bcast b = Bcast::same;
    std::size_t cols = 1;
};

BinaryLayout binary_layout(Op op, const Tensor& a, const Tensor& b) {
    BinaryLayout l;
    if (a.shape() == b.shape()) {
        l.out = a.shape();
        return l;
    }
    if (b.size() == 1) {
        l.out = a.shape();
        l.b = Bcast::scalar;
        return l;
    }
    if (a.size() == 1) {
        l.out = b.shape();
        l.a = Bcast::scalar;
        return l;
    }
    if (b.rank() == 1 && a.rank() >= 2 && a.shape().back() == b.size()) {
        l.out = a.shape();
        l.b = Bcast::row;
        l.cols = b.size();
        return l;
    }
    if (a.rank() == 1 && b.rank() >= 2 && b.shape().back() == a.size()) {
        l.out = b.shape();
        l.a = Bcast::row;
        l.cols = a.size();
        return l;
    }
    throw ShapeError(std::string(op_name(op)) + ": incompatible shapes " + to_string(a.shape()) +
                     " and " + to_string(b.shape()));
}

inline std::size_t map_index(Bcast mode, std::size_t k, std::size_t cols) {
    switch (mode) {
        case Bcast::same: return k;
        case Bcast::scalar: return 0;
        case Bcast::row: return k % cols;
    }
    return k;
}

inline double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// C[n x m] (+)= A[n x k] * B[k x m]
void gemm_nn(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
             std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c + i * m;
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            if (aip == 0.0) continue;
            const double* bp = b + p * m;
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
}

// C[n x k] += G[n x m] * B[k x m]^T
void gemm_nt(const double* g, const double* b, double* c, std::size_t n, std::size_t k,
             std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* gi = g + i * m;
        double* ci = c + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double* bp = b + p * m;
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += gi[j] * bp[j];
            ci[p] += acc;
        }
    }
}

// C[k x m] += A[n x k]^T * G[n x m]
void gemm_tn(const double* a, const double* g, double* c, std::size_t n, std::size_t k,
             std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a + i * k;
        const double* gi = g + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            if (aip == 0.0) continue;
            double* cp = c + p * m;
            for (std::size_t j = 0; j < m; ++j) cp[j] += aip * gi[j];
        }
    }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_size(shape_))
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + to_string(shape_));
}

double Tensor::item() const {
    if (data_.size() != 1)
        throw ShapeError("item() requires a single-element tensor, got " + to_string(shape_));
    return data_[0];
}

void Tensor::zero_grad() { grad_.assign(data_.size(), 0.0); }

void Tensor::set_grad(std::span<const double> g) {
    if (g.size() != data_.size())
        throw ShapeError("gradient length " + std::to_string(g.size()) + " does not match tensor " +
                         to_string(shape_));
    grad_.assign(g.begin(), g.end());
}

Tensor Tensor::slice_rows(std::size_t begin, std::size_t count) const {
    if (rank() != 2 || begin + count > rows() || count == 0)
        throw ShapeError("slice_rows out of range for " + to_string(shape_));
    const std::size_t c = cols();
    std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(begin * c),
                            data_.begin() + static_cast<std::ptrdiff_t>((begin + count) * c));
    return Tensor({count, c}, std::move(out));
}

Tensor Tensor::gather_rows(std::span<const std::size_t> indices) const {
    if (rank() != 2) throw ShapeError("gather_rows requires a matrix, got " + to_string(shape_));
    if (indices.empty()) throw ShapeError("gather_rows: empty index list");
    const std::size_t c = cols();
    std::vector<double> out;
    out.reserve(indices.size() * c);
    for (auto idx : indices) {
        if (idx >= rows()) throw ShapeError("gather_rows: row index out of range");
        out.insert(out.end(), data_.begin() + static_cast<std::ptrdiff_t>(idx * c),
                   data_.begin() + static_cast<std::ptrdiff_t>((idx + 1) * c));
    }
    return Tensor({indices.size(), c}, std::move(out));
}

const char* op_name(Op op) {
    switch (op) {
        case Op::leaf: return "leaf";
        case Op::matmul: return "matmul";
        case Op::add: return "add";
        case Op::sub: return "sub";
        case Op::mul: return "mul";
        case Op::neg: return "neg";
        case Op::scale: return "scale";
        case Op::relu: return "relu";
        case Op::leaky_relu: return "leaky_relu";
        case Op::tanh: return "tanh";
        case Op::sigmoid: return "sigmoid";
        case Op::log: return "log";
        case Op::mean: return "mean";
        case Op::sum: return "sum";
        case Op::abs: return "abs";
        case Op::clamp: return "clamp";
        case Op::row_sum: return "row_sum";
    }
    return "?";
}

const Tensor& Var::value() const { return graph_->value(*this); }
std::span<const double> Var::grad() const { return graph_->grad(*this); }

Var Graph::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Graph::parameter(Tensor& tensor) {
    if (auto it = bound_.find(&tensor); it != bound_.end()) return Var(this, it->second);
    Node n;
    n.external = &tensor;
    n.requires_grad = true;
    Var v = push(std::move(n));
    bound_.emplace(&tensor, v.id());
    return v;
}

Var Graph::input(Tensor value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = true;
    return push(std::move(n));
}

Var Graph::constant(Tensor value) {
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Graph::detach(Var v) { return constant(value(v)); }

const Tensor& Graph::value(Var v) const {
    if (v.id() >= nodes_.size()) throw std::out_of_range("Graph::value: unknown node");
    return node_value(nodes_[v.id()]);
}

std::span<const double> Graph::grad(Var v) const {
    if (v.id() >= nodes_.size()) throw std::out_of_range("Graph::grad: unknown node");
    return nodes_[v.id()].grad;
}

bool Graph::requires_grad(Var v) const { return nodes_.at(v.id()).requires_grad; }

Var Graph::apply(Op op, std::span<const Var> inputs, double attr, double attr2) {
    const bool binary = op == Op::matmul || op == Op::add || op == Op::sub || op == Op::mul;
    const std::size_t expected = binary ? 2 : 1;
    if (op == Op::leaf) throw std::invalid_argument("apply: leaf is not an operation");
    if (inputs.size() != expected)
        throw std::invalid_argument(std::string(op_name(op)) + ": expected " +
                                    std::to_string(expected) + " inputs, got " +
                                    std::to_string(inputs.size()));
    for (const auto& v : inputs)
        if (&v.graph() != this) throw std::invalid_argument("apply: input belongs to another graph");

    Node n;
    n.op = op;
    n.arity = static_cast<int>(expected);
    n.in0 = inputs[0].id();
    n.in1 = binary ? inputs[1].id() : 0;
    n.attr = attr;
    n.attr2 = attr2;
    n.requires_grad = nodes_[n.in0].requires_grad || (binary && nodes_[n.in1].requires_grad);

    const Tensor& a = node_value(nodes_[n.in0]);

    if (op == Op::matmul) {
        const Tensor& b = node_value(nodes_[n.in1]);
        if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0])
            throw ShapeError("matmul: incompatible shapes " + to_string(a.shape()) + " and " +
                             to_string(b.shape()));
        const std::size_t rows = a.shape()[0], inner = a.shape()[1], cols = b.shape()[1];
        Tensor out({rows, cols}, 0.0);
        gemm_nn(a.data().data(), b.data().data(), out.data().data(), rows, inner, cols);
        n.value = std::move(out);
        return push(std::move(n));
    }

    if (binary) {
        const Tensor& b = node_value(nodes_[n.in1]);
        const auto layout = binary_layout(op, a, b);
        Tensor out(layout.out, 0.0);
        auto o = out.data();
        auto ad = a.data();
        auto bd = b.data();
        for (std::size_t k = 0; k < o.size(); ++k) {
            const double x = ad[map_index(layout.a, k, layout.cols)];
            const double y = bd[map_index(layout.b, k, layout.cols)];
            o[k] = op == Op::add ? x + y : op == Op::sub ? x - y : x * y;
        }
        n.value = std::move(out);
        return push(std::move(n));
    }

    auto ad = a.data();
    switch (op) {
        case Op::mean:
        case Op::sum: {
            double s = 0.0;
            for (double x : ad) s += x;
            if (op == Op::mean) s /= static_cast<double>(ad.size());
            n.value = Tensor::scalar(s);
            return push(std::move(n));
        }
        case Op::row_sum: {
            const std::size_t r = a.rows(), c = a.cols();
            Tensor out({r}, 0.0);
            for (std::size_t i = 0; i < r; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < c; ++j) s += ad[i * c + j];
                out[i] = s;
            }
            n.value = std::move(out);
            return push(std::move(n));
        }
        default: break;
    }

    Tensor out(a.shape(), 0.0);
    auto o = out.data();
    for (std::size_t k = 0; k < ad.size(); ++k) {
        const double x = ad[k];
        switch (op) {
            case Op::neg: o[k] = -x; break;
            case Op::scale: o[k] = attr * x; break;
            case Op::relu: o[k] = x > 0.0 ? x : 0.0; break;
            case Op::leaky_relu: o[k] = x > 0.0 ? x : attr * x; break;
            case Op::tanh: o[k] = std::tanh(x); break;
            case Op::sigmoid: o[k] = stable_sigmoid(x); break;
            case Op::log:
                if (x <= 0.0)
                    throw DomainError("log of non-positive value " + std::to_string(x) +
                                      " at index " + std::to_string(k));
                o[k] = std::log(x);
                break;
            case Op::abs: o[k] = std::fabs(x); break;
            case Op::clamp: o[k] = std::clamp(x, attr, attr2); break;
            default: throw std::logic_error("unhandled op");
        }
    }
    n.value = std::move(out);
    return push(std::move(n));
}

void Graph::backward(Var loss) {
    if (&loss.graph() != this) throw std::invalid_argument("backward: loss belongs to another graph");
    const Tensor& lv = value(loss);
    if (lv.size() != 1)
        throw ShapeError("backward: loss must be a single-element tensor, got " +
                         to_string(lv.shape()));

    for (auto& n : nodes_) n.grad.clear();
    for (std::size_t i = 0; i <= loss.id(); ++i) {
        auto& n = nodes_[i];
        if (n.requires_grad) n.grad.assign(node_value(n).size(), 0.0);
    }
    if (nodes_[loss.id()].requires_grad) {
        nodes_[loss.id()].grad[0] = 1.0;
        for (std::size_t i = loss.id() + 1; i-- > 0;) {
            if (nodes_[i].requires_grad && nodes_[i].op != Op::leaf) backward_node(i);
        }
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        auto& n = nodes_[i];
        if (n.grad.empty()) n.grad.assign(node_value(n).size(), 0.0);
        if (n.external) n.external->set_grad(n.grad);
    }
}

void Graph::backward_node(std::size_t id) {
    Node& n = nodes_[id];
    const std::vector<double>& g = n.grad;
    if (std::all_of(g.begin(), g.end(), [](double x) { return x == 0.0; })) return;

    Node& na = nodes_[n.in0];
    const Tensor& a = node_value(na);
    auto ad = a.data();
    const auto out = node_value(n).data();

    if (n.op == Op::matmul) {
        Node& nb = nodes_[n.in1];
        const Tensor& b = node_value(nb);
        const std::size_t rows = a.shape()[0], inner = a.shape()[1], cols = b.shape()[1];
        if (na.requires_grad) gemm_nt(g.data(), b.data().data(), na.grad.data(), rows, inner, cols);
        if (nb.requires_grad) gemm_tn(ad.data(), g.data(), nb.grad.data(), rows, inner, cols);
        return;
    }

    if (n.arity == 2) {
        Node& nb = nodes_[n.in1];
        const Tensor& b = node_value(nb);
        auto bd = b.data();
        const auto layout = binary_layout(n.op, a, b);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const std::size_t ia = map_index(layout.a, k, layout.cols);
            const std::size_t ib = map_index(layout.b, k, layout.cols);
            double da = 0.0, db = 0.0;
            switch (n.op) {
                case Op::add: da = g[k]; db = g[k]; break;
                case Op::sub: da = g[k]; db = -g[k]; break;
                case Op::mul: da = g[k] * bd[ib]; db = g[k] * ad[ia]; break;
                default: break;
            }
            if (na.requires_grad) na.grad[ia] += da;
            if (nb.requires_grad) nb.grad[ib] += db;
        }
        return;
    }

    if (!na.requires_grad) return;
    auto& ga = na.grad;
    switch (n.op) {
        case Op::mean: {
            const double d = g[0] / static_cast<double>(ga.size());
            for (auto& x : ga) x += d;
            return;
        }
        case Op::sum:
            for (auto& x : ga) x += g[0];
            return;
        case Op::row_sum: {
            const std::size_t r = a.rows(), c = a.cols();
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[i];
            return;
        }
        default: break;
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = ad[k];
        double d = 0.0;
        switch (n.op) {
            case Op::neg: d = -1.0; break;
            case Op::scale: d = n.attr; break;
            case Op::relu: d = x > 0.0 ? 1.0 : 0.0; break;
            case Op::leaky_relu: d = x > 0.0 ? 1.0 : n.attr; break;
            case Op::tanh: d = 1.0 - out[k] * out[k]; break;
            case Op::sigmoid: d = out[k] * (1.0 - out[k]); break;
            case Op::log: d = 1.0 / x; break;
            case Op::abs: d = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); break;
            case Op::clamp: d = (x >= n.attr && x <= n.attr2) ? 1.0 : 0.0; break;
            default: break;
        }
        ga[k] += g[k] * d;
    }
}

namespace {
Var unary(Op op, Var a, double attr = 0.0, double attr2 = 0.0) {
    const Var in[] = {a};
    return a.graph().apply(op, in, attr, attr2);
}
Var binary(Op op, Var a, Var b) {
    const Var in[] = {a, b};
    return a.graph().apply(op, in);
}
}  // namespace

Var matmul(Var a, Var b) { return binary(Op::matmul, a, b); }
Var add(Var a, Var b) { return binary(Op::add, a, b); }
Var sub(Var a, Var b) { return binary(Op::sub, a, b); }
Var mul(Var a, Var b) { return binary(Op::mul, a, b); }
Var neg(Var a) { return unary(Op::neg, a); }
Var scale(Var a, double factor) { return unary(Op::scale, a, factor); }
Var relu(Var a) { return unary(Op::relu, a); }
Var leaky_relu(Var a, double slope) { return unary(Op::leaky_relu, a, slope); }
Var tanh(Var a) { return unary(Op::tanh, a); }
Var sigmoid(Var a) { return unary(Op::sigmoid, a); }
Var log(Var a) { return unary(Op::log, a); }
Var mean(Var a) { return unary(Op::mean, a); }
Var sum(Var a) { return unary(Op::sum, a); }
Var abs(Var a) { return unary(Op::abs, a); }
Var clamp(Var a, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("clamp: lower bound exceeds upper bound");
    return unary(Op::clamp, a, lo, hi);
}
Var row_sum(Var a) { return unary(Op::row_sum, a); }

Var operator-(double c, Var a) { return sub(a.graph().constant(c), a); }
Var operator+(Var a, double c) { return add(a, a.graph().constant(c)); }

}  // namespace jwdm::ad
