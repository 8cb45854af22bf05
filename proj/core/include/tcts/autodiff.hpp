// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode differentiation over dense row-major f64 matrices.
//
// A Tape records every operation as a node whose inputs are strictly
// earlier nodes, so the node list is already in topological order and the
// backward sweep is a single reverse pass. The op inventory is closed:
// matmul, add, mul, concat, sigmoid, tanh, softmax, log, glu, gather_rows,
// sum, scale and transpose. Extending the model means extending this list.

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tcts::ad {

/// Dense rank-2 array; vectors are 1 x n rows and scalars are 1 x 1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor row(std::initializer_list<double> values);
  static Tensor row(std::span<const double> values);
  static Tensor scalar(double value) { return Tensor(1, 1, value); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  std::vector<std::size_t> shape() const { return {rows_, cols_}; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const double& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<const double> row_view(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  bool all_finite() const;
  bool operator==(const Tensor& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Named trainable tensors. Indices are stable once added.
class ParamSet {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return values_.size(); }
  const Tensor& operator[](std::size_t i) const { return values_[i]; }
  Tensor& operator[](std::size_t i) { return values_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index(const std::string& name) const;
  std::size_t num_scalars() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

using NodeId = std::uint32_t;

enum class Op : std::uint8_t {
  kConstant,
  kParam,
  kMatMul,
  kAdd,
  kMul,
  kConcat,
  kSigmoid,
  kTanh,
  kSoftmax,
  kLog,
  kGlu,
  kGatherRows,
  kSum,
  kScale,
  kTranspose,
};

inline constexpr double kLogFloor = 1e-12;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  NodeId constant(Tensor value);
  /// Leaf referencing params[index]; one node per parameter per tape. The
  /// ParamSet must outlive the tape and stay unmodified while it is in use.
  NodeId param(const ParamSet& params, std::size_t index);

  NodeId matmul(NodeId a, NodeId b);
  /// Same shapes, or b a 1 x cols row broadcast over a's rows.
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  /// Joins along columns; both inputs need the same row count.
  NodeId concat(NodeId a, NodeId b);
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  /// Row-wise, max-subtracted.
  NodeId softmax(NodeId a);
  /// log(max(x, kLogFloor)); gradient is zero below the floor.
  NodeId log(NodeId a);
  /// First half of the columns gated by the sigmoid of the second half.
  NodeId glu(NodeId a);
  NodeId gather_rows(NodeId a, std::vector<std::size_t> rows);
  NodeId sum(NodeId a);
  NodeId scale(NodeId a, double factor);
  NodeId transpose(NodeId a);

  const Tensor& value(NodeId id) const;
  Op op(NodeId id) const { return nodes_[id].op; }
  std::size_t size() const { return nodes_.size(); }
  const ParamSet* params() const { return params_; }

 private:
  friend class Backward;

  struct Node {
    Op op;
    bool requires_grad = false;
    NodeId a = 0;
    NodeId b = 0;
    double scalar = 0.0;           // scale factor, or the param index
    std::vector<std::size_t> rows;  // gather_rows indices
    Tensor value;
    const Tensor* external = nullptr;
  };

  NodeId push(Node node);
  NodeId unary(Op op, NodeId a, Tensor value);
  const Node& node(NodeId id) const;

  std::deque<Node> nodes_;  // stable addresses: value() references survive later pushes
  const ParamSet* params_ = nullptr;
  std::unordered_map<std::size_t, NodeId> param_nodes_;
};

/// Gradient per entry of the ParamSet the tape referenced; unreached
/// parameters get zero tensors of their shape.
struct Gradients {
  std::vector<Tensor> per_param;

  double global_norm() const;
  void scale(double factor);
  void accumulate(const Gradients& other);
};

/// Exact reverse-mode gradients of the scalar node `loss` with respect to
/// every parameter of `params`. Throws kNonFinite naming the offending node.
Gradients backward(const Tape& tape, NodeId loss, const ParamSet& params);

/// Builds a scalar loss on a fresh tape from the given parameters.
using LossBuilder = std::function<NodeId(Tape&, const ParamSet&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
};

/// Central finite differences on a seeded random subsample of at most
/// `max_coordinates` parameter scalars, compared against backward().
/// Relative error is |g_ad - g_fd| / max(1, |g_ad| + |g_fd|). Coordinates
/// are perturbed in place and restored, so `f` may read `params` through
/// another owner.
GradCheckResult grad_check(const LossBuilder& f, ParamSet& params, double eps = 1e-5,
                           std::size_t max_coordinates = 200, std::uint64_t seed = 7);

}  // namespace tcts::ad
