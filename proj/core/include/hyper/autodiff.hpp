#pragma once

// Minimal reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Tape records every operation of one forward pass. Values are column
// vectors or small matrices; batching happens by running independent tapes.
// Parameters are registered once per tape and their gradients are flushed
// into Parameter::grad by Tape::accumulate_parameter_grads().

#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hyper/rng.hpp"

namespace hyper::ad {

using Matrix = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; only valid while its tape lives.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  bool valid() const { return tape != nullptr; }
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() { nodes_.reserve(4096); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// A differentiable input that is not a Parameter (used by gradient checks).
  Var input(Matrix value);
  Var param(Parameter& p);

  Var push(Matrix value, const std::vector<Var>& parents, BackwardFn backward);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  /// Gradient of the last backward() target w.r.t. node `id`; zero-size when
  /// the node did not receive any gradient.
  const Matrix& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

  template <typename Expr>
  void add_grad(int id, const Expr& g) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  /// Seeds d(output)/d(output) = 1 for a 1x1 output and propagates.
  void backward(Var output);
  /// Adds gradients of registered parameter nodes into Parameter::grad.
  void accumulate_parameter_grads() const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
  std::vector<std::pair<int, Parameter*>> params_;
  std::unordered_map<const Parameter*, int> param_ids_;
};

// Elementwise and shape operations.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var relu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var matmul(Var a, Var b);
Var transpose(Var a);
/// W * x + b, with the bias column broadcast across the columns of x.
Var linear(Var w, Var x, Var b);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);

// Reductions.
Var sum(Var a);
Var squared_norm(Var a);
/// Row-wise maximum across columns (max pooling over a set of columns).
Var max_cols(Var a);
/// Element (r, c) as a 1x1 node.
Var pick(Var a, Eigen::Index r, Eigen::Index c = 0);
/// The smallest of several 1x1 nodes; gradient flows to the argmin only.
Var min_of(const std::vector<Var>& scalars);

// Probability helpers, column-wise.
Var softmax(Var a);
Var log_softmax(Var a);

/// Inverted dropout with a fixed Bernoulli mask drawn from rng.
Var dropout(Var a, double rate, Rng& rng);

/// Forward value of `hard`, gradient routed to `soft` unchanged.
Var straight_through(const Matrix& hard, Var soft);

struct LstmOut {
  Var h;
  Var c;
};

/// Fused LSTM cell. `w` is (4H x (in + H)), `b` is (4H x 1), gate order
/// input, forget, candidate, output.
LstmOut lstm_cell(Var x, Var h, Var c, Var w, Var b);

/// Fused linear recurrent cell h' = W [x; h] + b used by the linear decoder
/// ablation; the cell state passes through unchanged.
LstmOut linear_cell(Var x, Var h, Var c, Var w, Var b);

}  // namespace hyper::ad
