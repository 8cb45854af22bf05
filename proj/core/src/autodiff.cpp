// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tcts/error.hpp"
#include "tcts/random.hpp"

namespace tcts::ad {

namespace {

std::string shape_str(const Tensor& t) {
  return "(" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")";
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::kShapeMismatch, what);
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows * cols, "tensor data length does not match shape");
}

Tensor Tensor::row(std::initializer_list<double> values) {
  return Tensor(1, values.size(), std::vector<double>(values));
}

Tensor Tensor::row(std::span<const double> values) {
  return Tensor(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// ParamSet

std::size_t ParamSet::add(std::string name, Tensor value) {
  if (index_.count(name) != 0) fail(ErrorCode::kShapeMismatch, "duplicate parameter " + name);
  const std::size_t i = values_.size();
  index_.emplace(name, i);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return i;
}

std::size_t ParamSet::index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::kShapeMismatch, "unknown parameter " + name);
  return it->second;
}

std::size_t ParamSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

// ---------------------------------------------------------------------------
// Tape forward

const Tape::Node& Tape::node(NodeId id) const {
  if (id >= nodes_.size()) fail(ErrorCode::kShapeMismatch, "node id out of range");
  return nodes_[id];
}

const Tensor& Tape::value(NodeId id) const {
  const Node& n = node(id);
  return n.external != nullptr ? *n.external : n.value;
}

NodeId Tape::push(Node n) {
  if (n.external == nullptr && !n.value.all_finite())
    fail(ErrorCode::kNonFinite, "non-finite output at node " + std::to_string(nodes_.size()));
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::constant(Tensor value) {
  Node n{.op = Op::kConstant};
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::param(const ParamSet& params, std::size_t index) {
  if (params_ == nullptr) params_ = &params;
  if (params_ != &params) fail(ErrorCode::kShapeMismatch, "tape already bound to another ParamSet");
  if (auto it = param_nodes_.find(index); it != param_nodes_.end()) return it->second;
  Node n{.op = Op::kParam, .requires_grad = true};
  n.scalar = static_cast<double>(index);
  n.external = &params[index];
  if (!params[index].all_finite())
    fail(ErrorCode::kNonFinite, "parameter " + params.name(index) + " is not finite");
  const NodeId id = push(std::move(n));
  param_nodes_.emplace(index, id);
  return id;
}

NodeId Tape::unary(Op op, NodeId a, Tensor value) {
  Node n{.op = op, .requires_grad = node(a).requires_grad, .a = a};
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& x = value(a);
  const Tensor& w = value(b);
  require(x.cols() == w.rows(), "matmul " + shape_str(x) + " * " + shape_str(w));
  Tensor out(x.rows(), w.cols());
  const std::size_t inner = x.cols();
  const std::size_t cols = w.cols();
  const double* wd = w.data().data();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double* o = &out(i, 0);
    for (std::size_t k = 0; k < inner; ++k) {
      const double xv = x(i, k);
      if (xv == 0.0) continue;
      const double* wr = wd + k * cols;
      for (std::size_t j = 0; j < cols; ++j) o[j] += xv * wr[j];
    }
  }
  Node n{.op = Op::kMatMul,
         .requires_grad = node(a).requires_grad || node(b).requires_grad,
         .a = a,
         .b = b};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  const bool same = x.rows() == y.rows() && x.cols() == y.cols();
  const bool bias = y.rows() == 1 && y.cols() == x.cols();
  require(same || bias, "add " + shape_str(x) + " + " + shape_str(y));
  Tensor out = x;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += same ? y(i, j) : y(0, j);
  Node n{.op = Op::kAdd,
         .requires_grad = node(a).requires_grad || node(b).requires_grad,
         .a = a,
         .b = b};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require(x.rows() == y.rows() && x.cols() == y.cols(),
          "mul " + shape_str(x) + " * " + shape_str(y));
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  Node n{.op = Op::kMul,
         .requires_grad = node(a).requires_grad || node(b).requires_grad,
         .a = a,
         .b = b};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::concat(NodeId a, NodeId b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require(x.rows() == y.rows(), "concat " + shape_str(x) + " | " + shape_str(y));
  Tensor out(x.rows(), x.cols() + y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::copy_n(&x(i, 0), x.cols(), &out(i, 0));
    std::copy_n(&y(i, 0), y.cols(), &out(i, x.cols()));
  }
  Node n{.op = Op::kConcat,
         .requires_grad = node(a).requires_grad || node(b).requires_grad,
         .a = a,
         .b = b};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId a) {
  Tensor out = value(a);
  for (auto& v : out.data()) v = sigmoid_scalar(v);
  return unary(Op::kSigmoid, a, std::move(out));
}

NodeId Tape::tanh(NodeId a) {
  Tensor out = value(a);
  for (auto& v : out.data()) v = std::tanh(v);
  return unary(Op::kTanh, a, std::move(out));
}

NodeId Tape::softmax(NodeId a) {
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* r = &out(i, 0);
    const double mx = *std::max_element(r, r + out.cols());
    double z = 0.0;
    for (std::size_t j = 0; j < out.cols(); ++j) {
      r[j] = std::exp(r[j] - mx);
      z += r[j];
    }
    for (std::size_t j = 0; j < out.cols(); ++j) r[j] /= z;
  }
  return unary(Op::kSoftmax, a, std::move(out));
}

NodeId Tape::log(NodeId a) {
  Tensor out = value(a);
  for (auto& v : out.data()) v = std::log(std::max(v, kLogFloor));
  return unary(Op::kLog, a, std::move(out));
}

NodeId Tape::glu(NodeId a) {
  const Tensor& x = value(a);
  require(x.cols() % 2 == 0, "glu needs an even column count, got " + shape_str(x));
  const std::size_t half = x.cols() / 2;
  Tensor out(x.rows(), half);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < half; ++j) out(i, j) = x(i, j) * sigmoid_scalar(x(i, j + half));
  return unary(Op::kGlu, a, std::move(out));
}

NodeId Tape::gather_rows(NodeId a, std::vector<std::size_t> rows) {
  const Tensor& x = value(a);
  Tensor out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < x.rows(), "gather_rows index " + std::to_string(rows[i]) + " out of " +
                                    shape_str(x));
    std::copy_n(&x(rows[i], 0), x.cols(), &out(i, 0));
  }
  Node n{.op = Op::kGatherRows, .requires_grad = node(a).requires_grad, .a = a};
  n.rows = std::move(rows);
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
  const auto d = value(a).data();
  return unary(Op::kSum, a, Tensor::scalar(std::accumulate(d.begin(), d.end(), 0.0)));
}

NodeId Tape::scale(NodeId a, double factor) {
  Tensor out = value(a);
  for (auto& v : out.data()) v *= factor;
  Node n{.op = Op::kScale, .requires_grad = node(a).requires_grad, .a = a};
  n.scalar = factor;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
  const Tensor& x = value(a);
  Tensor out(x.cols(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(j, i) = x(i, j);
  return unary(Op::kTranspose, a, std::move(out));
}

// ---------------------------------------------------------------------------
// Gradients

double Gradients::global_norm() const {
  double sq = 0.0;
  for (const auto& g : per_param)
    for (double v : g.data()) sq += v * v;
  return std::sqrt(sq);
}

void Gradients::scale(double factor) {
  for (auto& g : per_param)
    for (auto& v : g.data()) v *= factor;
}

void Gradients::accumulate(const Gradients& other) {
  if (per_param.empty()) {
    per_param = other.per_param;
    return;
  }
  require(per_param.size() == other.per_param.size(), "gradient sets differ in size");
  for (std::size_t i = 0; i < per_param.size(); ++i) {
    auto dst = per_param[i].data();
    auto src = other.per_param[i].data();
    require(dst.size() == src.size(), "gradient shapes differ");
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

// ---------------------------------------------------------------------------
// Backward

class Backward {
 public:
  Backward(const Tape& tape, NodeId loss, const ParamSet& params) : tape_(tape), params_(params) {
    const Tensor& l = tape.value(loss);
    require(l.rows() == 1 && l.cols() == 1, "loss must be a 1x1 scalar node");
    if (tape.params_ != nullptr && tape.params_ != &params)
      fail(ErrorCode::kShapeMismatch, "tape recorded against a different ParamSet");
    grads_.resize(tape.size());
    grads_[loss] = Tensor::scalar(1.0);
    loss_ = loss;
  }

  Gradients run() {
    Gradients out;
    out.per_param.reserve(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
      out.per_param.emplace_back(params_[i].rows(), params_[i].cols());

    for (NodeId id = loss_ + 1; id-- > 0;) {
      const Tape::Node& n = tape_.nodes_[id];
      Tensor& g = grads_[id];
      if (!n.requires_grad || g.size() == 0) continue;
      if (!g.all_finite())
        fail(ErrorCode::kNonFinite, "non-finite gradient at node " + std::to_string(id));
      if (n.op == Op::kParam) {
        const auto idx = static_cast<std::size_t>(n.scalar);
        auto dst = out.per_param[idx].data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += g[k];
      } else {
        propagate(n, g);
      }
      g = Tensor();  // release memory early
    }
    return out;
  }

 private:
  Tensor& slot(NodeId id) {
    Tensor& s = grads_[id];
    if (s.size() == 0) {
      const Tensor& v = tape_.value(id);
      s = Tensor(v.rows(), v.cols());
    }
    return s;
  }

  bool wants(NodeId id) const { return tape_.nodes_[id].requires_grad; }

  void propagate(const Tape::Node& n, const Tensor& g) {
    const Tensor& y = n.value;
    switch (n.op) {
      case Op::kConstant:
      case Op::kParam:
        break;
      case Op::kMatMul: {
        const Tensor& x = tape_.value(n.a);
        const Tensor& w = tape_.value(n.b);
        if (wants(n.a)) {  // dX = G W^T
          Tensor& gx = slot(n.a);
          for (std::size_t i = 0; i < x.rows(); ++i) {
            const double* gr = &g(i, 0);
            for (std::size_t k = 0; k < x.cols(); ++k) {
              const double* wr = &w(k, 0);
              double acc = 0.0;
              for (std::size_t j = 0; j < w.cols(); ++j) acc += gr[j] * wr[j];
              gx(i, k) += acc;
            }
          }
        }
        if (wants(n.b)) {  // dW = X^T G
          Tensor& gw = slot(n.b);
          for (std::size_t i = 0; i < x.rows(); ++i) {
            const double* gr = &g(i, 0);
            for (std::size_t k = 0; k < x.cols(); ++k) {
              const double xv = x(i, k);
              if (xv == 0.0) continue;
              double* dst = &gw(k, 0);
              for (std::size_t j = 0; j < w.cols(); ++j) dst[j] += xv * gr[j];
            }
          }
        }
        break;
      }
      case Op::kAdd: {
        if (wants(n.a)) {
          Tensor& ga = slot(n.a);
          for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k];
        }
        if (wants(n.b)) {
          Tensor& gb = slot(n.b);
          if (gb.size() == g.size()) {
            for (std::size_t k = 0; k < g.size(); ++k) gb[k] += g[k];
          } else {
            for (std::size_t i = 0; i < g.rows(); ++i)
              for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
          }
        }
        break;
      }
      case Op::kMul: {
        const Tensor& a = tape_.value(n.a);
        const Tensor& b = tape_.value(n.b);
        if (wants(n.a)) {
          Tensor& ga = slot(n.a);
          for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * b[k];
        }
        if (wants(n.b)) {
          Tensor& gb = slot(n.b);
          for (std::size_t k = 0; k < g.size(); ++k) gb[k] += g[k] * a[k];
        }
        break;
      }
      case Op::kConcat: {
        const std::size_t left = tape_.value(n.a).cols();
        const std::size_t right = tape_.value(n.b).cols();
        if (wants(n.a)) {
          Tensor& ga = slot(n.a);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < left; ++j) ga(i, j) += g(i, j);
        }
        if (wants(n.b)) {
          Tensor& gb = slot(n.b);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < right; ++j) gb(i, j) += g(i, left + j);
        }
        break;
      }
      case Op::kSigmoid: {
        Tensor& ga = slot(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * y[k] * (1.0 - y[k]);
        break;
      }
      case Op::kTanh: {
        Tensor& ga = slot(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * (1.0 - y[k] * y[k]);
        break;
      }
      case Op::kSoftmax: {
        Tensor& ga = slot(n.a);
        for (std::size_t i = 0; i < y.rows(); ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
          for (std::size_t j = 0; j < y.cols(); ++j) ga(i, j) += y(i, j) * (g(i, j) - dot);
        }
        break;
      }
      case Op::kLog: {
        const Tensor& x = tape_.value(n.a);
        Tensor& ga = slot(n.a);
        for (std::size_t k = 0; k < g.size(); ++k)
          if (x[k] > kLogFloor) ga[k] += g[k] / x[k];
        break;
      }
      case Op::kGlu: {
        const Tensor& x = tape_.value(n.a);
        Tensor& ga = slot(n.a);
        const std::size_t half = y.cols();
        for (std::size_t i = 0; i < y.rows(); ++i) {
          for (std::size_t j = 0; j < half; ++j) {
            const double s = sigmoid_scalar(x(i, j + half));
            ga(i, j) += g(i, j) * s;
            ga(i, j + half) += g(i, j) * x(i, j) * s * (1.0 - s);
          }
        }
        break;
      }
      case Op::kGatherRows: {
        Tensor& ga = slot(n.a);
        for (std::size_t i = 0; i < n.rows.size(); ++i) {
          double* dst = &ga(n.rows[i], 0);
          for (std::size_t j = 0; j < g.cols(); ++j) dst[j] += g(i, j);
        }
        break;
      }
      case Op::kSum: {
        Tensor& ga = slot(n.a);
        for (auto& v : ga.data()) v += g[0];
        break;
      }
      case Op::kScale: {
        Tensor& ga = slot(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * n.scalar;
        break;
      }
      case Op::kTranspose: {
        Tensor& ga = slot(n.a);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
        break;
      }
    }
  }

  const Tape& tape_;
  const ParamSet& params_;
  NodeId loss_ = 0;
  std::vector<Tensor> grads_;
};

Gradients backward(const Tape& tape, NodeId loss, const ParamSet& params) {
  return Backward(tape, loss, params).run();
}

// ---------------------------------------------------------------------------
// Finite-difference check

GradCheckResult grad_check(const LossBuilder& f, ParamSet& params, double eps,
                           std::size_t max_coordinates, std::uint64_t seed) {
  if (eps < 1e-7 || eps > 1e-3) fail(ErrorCode::kShapeMismatch, "grad_check eps outside [1e-7, 1e-3]");

  Gradients analytic;
  {
    Tape tape;
    const NodeId loss = f(tape, params);
    analytic = backward(tape, loss, params);
  }

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t k = 0; k < params[p].size(); ++k) coords.emplace_back(p, k);
  Rng rng(seed);
  rng.shuffle(coords);
  if (coords.size() > max_coordinates) coords.resize(max_coordinates);

  auto evaluate = [&](const ParamSet& ps) {
    Tape tape;
    return tape.value(f(tape, ps))[0];
  };

  GradCheckResult result;
  for (const auto& [p, k] : coords) {
    const double orig = params[p][k];
    params[p][k] = orig + eps;
    const double up = evaluate(params);
    params[p][k] = orig - eps;
    const double down = evaluate(params);
    params[p][k] = orig;
    const double fd = (up - down) / (2.0 * eps);
    const double ad = analytic.per_param[p][k];
    const double rel = std::abs(ad - fd) / std::max(1.0, std::abs(ad) + std::abs(fd));
    result.max_relative_error = std::max(result.max_relative_error, rel);
    ++result.coordinates;
  }
  return result;
}

}  // namespace tcts::ad
