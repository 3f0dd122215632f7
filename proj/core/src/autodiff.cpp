#include "hyper/autodiff.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "hyper/error.hpp"

namespace hyper::ad {

const Matrix& Var::value() const { return tape->value(id); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, false});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, true});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(Parameter& p) {
  if (auto it = param_ids_.find(&p); it != param_ids_.end()) return Var{this, it->second};
  Var v = input(p.value);
  param_ids_.emplace(&p, v.id);
  params_.emplace_back(v.id, &p);
  return v;
}

Var Tape::push(Matrix value, const std::vector<Var>& parents, BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) needs = needs || requires_grad(p.id);
  nodes_.push_back(Node{std::move(value), Matrix(), needs ? std::move(backward) : nullptr, needs});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var output) {
  if (output.rows() != 1 || output.cols() != 1) {
    throw Error(ErrorKind::kInvalidArgument, "backward() needs a scalar output");
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!requires_grad(output.id)) return;
  nodes_[static_cast<std::size_t>(output.id)].grad = Matrix::Ones(1, 1);
  for (int id = output.id; id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.backward && n.grad.size() != 0) n.backward(*this, id);
  }
}

void Tape::accumulate_parameter_grads() const {
  for (const auto& [id, p] : params_) {
    const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
    if (g.size() != 0) p->grad += g;
  }
}

namespace {

Tape& tape_of(Var a) {
  assert(a.tape != nullptr);
  return *a.tape;
}

void check_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  return tape_of(a).push(a.value() + b.value(), {a, b}, [a, b](Tape& t, int self) {
    t.add_grad(a.id, t.grad(self));
    t.add_grad(b.id, t.grad(self));
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  return tape_of(a).push(a.value() - b.value(), {a, b}, [a, b](Tape& t, int self) {
    t.add_grad(a.id, t.grad(self));
    t.add_grad(b.id, -t.grad(self));
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  return tape_of(a).push(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, int self) {
    t.add_grad(a.id, t.grad(self).cwiseProduct(t.value(b.id)));
    t.add_grad(b.id, t.grad(self).cwiseProduct(t.value(a.id)));
  });
}

Var scale(Var a, double s) {
  return tape_of(a).push(a.value() * s, {a},
                         [a, s](Tape& t, int self) { t.add_grad(a.id, t.grad(self) * s); });
}

Var relu(Var a) {
  return tape_of(a).push(a.value().cwiseMax(0.0), {a}, [a](Tape& t, int self) {
    t.add_grad(a.id, (t.value(a.id).array() > 0.0).cast<double>().matrix().cwiseProduct(t.grad(self)));
  });
}

Var tanh(Var a) {
  return tape_of(a).push(a.value().array().tanh().matrix(), {a}, [a](Tape& t, int self) {
    const auto& y = t.value(self);
    t.add_grad(a.id, (t.grad(self).array() * (1.0 - y.array().square())).matrix());
  });
}

Var sigmoid(Var a) {
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return tape_of(a).push(std::move(y), {a}, [a](Tape& t, int self) {
    const auto& s = t.value(self);
    t.add_grad(a.id, (t.grad(self).array() * s.array() * (1.0 - s.array())).matrix());
  });
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::kDimensionMismatch, "matmul: inner dimension");
  return tape_of(a).push(a.value() * b.value(), {a, b}, [a, b](Tape& t, int self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(a.id)) t.add_grad(a.id, g * t.value(b.id).transpose());
    if (t.requires_grad(b.id)) t.add_grad(b.id, t.value(a.id).transpose() * g);
  });
}

Var transpose(Var a) {
  return tape_of(a).push(a.value().transpose(), {a}, [a](Tape& t, int self) {
    t.add_grad(a.id, t.grad(self).transpose());
  });
}

Var linear(Var w, Var x, Var b) {
  if (w.cols() != x.rows() || b.rows() != w.rows() || b.cols() != 1) {
    throw Error(ErrorKind::kDimensionMismatch, "linear: shape mismatch");
  }
  Matrix y = w.value() * x.value();
  y.colwise() += b.value().col(0);
  return tape_of(w).push(std::move(y), {w, x, b}, [w, x, b](Tape& t, int self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(w.id)) t.add_grad(w.id, g * t.value(x.id).transpose());
    if (t.requires_grad(x.id)) t.add_grad(x.id, t.value(w.id).transpose() * g);
    if (t.requires_grad(b.id)) t.add_grad(b.id, g.rowwise().sum());
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(ErrorKind::kInvalidArgument, "concat_rows: no parts");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  for (const Var& p : parts) {
    if (p.cols() != cols) throw Error(ErrorKind::kDimensionMismatch, "concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix y(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    y.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return tape_of(parts.front()).push(std::move(y), parts, [parts](Tape& t, int self) {
    const auto& g = t.grad(self);
    Eigen::Index row = 0;
    for (const Var& p : parts) {
      const Eigen::Index n = t.value(p.id).rows();
      if (t.requires_grad(p.id)) t.add_grad(p.id, g.middleRows(row, n));
      row += n;
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(ErrorKind::kInvalidArgument, "concat_cols: no parts");
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts.front().rows();
  for (const Var& p : parts) {
    if (p.rows() != rows) throw Error(ErrorKind::kDimensionMismatch, "concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix y(rows, cols);
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    y.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return tape_of(parts.front()).push(std::move(y), parts, [parts](Tape& t, int self) {
    const auto& g = t.grad(self);
    Eigen::Index col = 0;
    for (const Var& p : parts) {
      const Eigen::Index n = t.value(p.id).cols();
      if (t.requires_grad(p.id)) t.add_grad(p.id, g.middleCols(col, n));
      col += n;
    }
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "slice_rows: out of range");
  }
  return tape_of(a).push(a.value().middleRows(start, count), {a},
                         [a, start, count](Tape& t, int self) {
                           Matrix full = Matrix::Zero(t.value(a.id).rows(), t.value(a.id).cols());
                           full.middleRows(start, count) = t.grad(self);
                           t.add_grad(a.id, full);
                         });
}

Var sum(Var a) {
  Matrix y(1, 1);
  y(0, 0) = a.value().sum();
  return tape_of(a).push(std::move(y), {a}, [a](Tape& t, int self) {
    const double g = t.grad(self)(0, 0);
    t.add_grad(a.id, Matrix::Constant(t.value(a.id).rows(), t.value(a.id).cols(), g));
  });
}

Var squared_norm(Var a) {
  Matrix y(1, 1);
  y(0, 0) = a.value().squaredNorm();
  return tape_of(a).push(std::move(y), {a}, [a](Tape& t, int self) {
    t.add_grad(a.id, 2.0 * t.grad(self)(0, 0) * t.value(a.id));
  });
}

Var max_cols(Var a) {
  const Matrix& v = a.value();
  Matrix y(v.rows(), 1);
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(v.rows()));
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    Eigen::Index c = 0;
    y(r, 0) = v.row(r).maxCoeff(&c);
    arg[static_cast<std::size_t>(r)] = c;
  }
  return tape_of(a).push(std::move(y), {a}, [a, arg = std::move(arg)](Tape& t, int self) {
    const auto& g = t.grad(self);
    Matrix full = Matrix::Zero(t.value(a.id).rows(), t.value(a.id).cols());
    for (Eigen::Index r = 0; r < full.rows(); ++r) full(r, arg[static_cast<std::size_t>(r)]) = g(r, 0);
    t.add_grad(a.id, full);
  });
}

Var pick(Var a, Eigen::Index r, Eigen::Index c) {
  Matrix y(1, 1);
  y(0, 0) = a.value()(r, c);
  return tape_of(a).push(std::move(y), {a}, [a, r, c](Tape& t, int self) {
    Matrix full = Matrix::Zero(t.value(a.id).rows(), t.value(a.id).cols());
    full(r, c) = t.grad(self)(0, 0);
    t.add_grad(a.id, full);
  });
}

Var min_of(const std::vector<Var>& scalars) {
  if (scalars.empty()) throw Error(ErrorKind::kInvalidArgument, "min_of: empty set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scalars.size(); ++i) {
    if (scalars[i].scalar() < scalars[best].scalar()) best = i;
  }
  const Var chosen = scalars[best];
  return tape_of(chosen).push(chosen.value(), scalars, [chosen](Tape& t, int self) {
    t.add_grad(chosen.id, t.grad(self));
  });
}

namespace {

Matrix softmax_value(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double m = x.col(c).maxCoeff();
    const Eigen::ArrayXd e = (x.col(c).array() - m).exp();
    y.col(c) = (e / e.sum()).matrix();
  }
  return y;
}

}  // namespace

Var softmax(Var a) {
  return tape_of(a).push(softmax_value(a.value()), {a}, [a](Tape& t, int self) {
    const auto& y = t.value(self);
    const auto& g = t.grad(self);
    Matrix dx(y.rows(), y.cols());
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      const double dot = g.col(c).dot(y.col(c));
      dx.col(c) = (y.col(c).array() * (g.col(c).array() - dot)).matrix();
    }
    t.add_grad(a.id, dx);
  });
}

Var log_softmax(Var a) {
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double m = x.col(c).maxCoeff();
    const double lse = m + std::log((x.col(c).array() - m).exp().sum());
    y.col(c) = x.col(c).array() - lse;
  }
  return tape_of(a).push(std::move(y), {a}, [a](Tape& t, int self) {
    const auto& y = t.value(self);
    const auto& g = t.grad(self);
    Matrix dx(y.rows(), y.cols());
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      dx.col(c) = g.col(c) - y.col(c).array().exp().matrix() * g.col(c).sum();
    }
    t.add_grad(a.id, dx);
  });
}

Var dropout(Var a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  const double keep = 1.0 - rate;
  Matrix mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = uniform_open(rng) < keep ? 1.0 / keep : 0.0;
  }
  Matrix y = a.value().cwiseProduct(mask);
  return tape_of(a).push(std::move(y), {a}, [a, mask = std::move(mask)](Tape& t, int self) {
    t.add_grad(a.id, t.grad(self).cwiseProduct(mask));
  });
}

Var straight_through(const Matrix& hard, Var soft) {
  check_same_shape(soft, soft, "straight_through");
  if (hard.rows() != soft.rows() || hard.cols() != soft.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "straight_through: shape mismatch");
  }
  return tape_of(soft).push(hard, {soft},
                            [soft](Tape& t, int self) { t.add_grad(soft.id, t.grad(self)); });
}

namespace {

Matrix stack_input(Var x, Var h) {
  Matrix xh(x.rows() + h.rows(), 1);
  xh.topRows(x.rows()) = x.value();
  xh.bottomRows(h.rows()) = h.value();
  return xh;
}

LstmOut split_state(Var stacked, Eigen::Index hidden) {
  return {slice_rows(stacked, 0, hidden), slice_rows(stacked, hidden, hidden)};
}

}  // namespace

LstmOut lstm_cell(Var x, Var h, Var c, Var w, Var b) {
  const Eigen::Index hs = h.rows();
  if (x.cols() != 1 || h.cols() != 1 || c.rows() != hs || w.rows() != 4 * hs ||
      w.cols() != x.rows() + hs || b.rows() != 4 * hs) {
    throw Error(ErrorKind::kDimensionMismatch, "lstm_cell: shape mismatch");
  }
  Matrix xh = stack_input(x, h);
  const Eigen::VectorXd z = w.value() * xh + b.value();
  auto sig = [](const auto& v) { return (1.0 / (1.0 + (-v.array()).exp())).matrix().eval(); };
  Eigen::VectorXd gi = sig(z.segment(0, hs));
  Eigen::VectorXd gf = sig(z.segment(hs, hs));
  Eigen::VectorXd gg = z.segment(2 * hs, hs).array().tanh().matrix();
  Eigen::VectorXd go = sig(z.segment(3 * hs, hs));
  Eigen::VectorXd c_prev = c.value().col(0);
  Eigen::VectorXd c_new = gf.cwiseProduct(c_prev) + gi.cwiseProduct(gg);
  Eigen::VectorXd tc = c_new.array().tanh().matrix();
  Matrix out(2 * hs, 1);
  out.col(0).head(hs) = go.cwiseProduct(tc);
  out.col(0).tail(hs) = c_new;

  Var stacked = tape_of(x).push(
      std::move(out), {x, h, c, w, b},
      [x, h, c, w, b, hs, xh = std::move(xh), gi = std::move(gi), gf = std::move(gf),
       gg = std::move(gg), go = std::move(go), c_prev = std::move(c_prev),
       tc = std::move(tc)](Tape& t, int self) {
        const auto& g = t.grad(self);
        const Eigen::VectorXd dh = g.col(0).head(hs);
        const Eigen::VectorXd dc_out = g.col(0).tail(hs);
        const Eigen::VectorXd d_o = dh.cwiseProduct(tc);
        const Eigen::VectorXd dc =
            dc_out + (dh.array() * go.array() * (1.0 - tc.array().square())).matrix();
        Eigen::VectorXd dz(4 * hs);
        dz.segment(0, hs) = (dc.array() * gg.array() * gi.array() * (1.0 - gi.array())).matrix();
        dz.segment(hs, hs) = (dc.array() * c_prev.array() * gf.array() * (1.0 - gf.array())).matrix();
        dz.segment(2 * hs, hs) = (dc.array() * gi.array() * (1.0 - gg.array().square())).matrix();
        dz.segment(3 * hs, hs) = (d_o.array() * go.array() * (1.0 - go.array())).matrix();
        if (t.requires_grad(w.id)) t.add_grad(w.id, dz * xh.transpose());
        if (t.requires_grad(b.id)) t.add_grad(b.id, dz);
        if (t.requires_grad(x.id) || t.requires_grad(h.id)) {
          const Eigen::VectorXd dxh = t.value(w.id).transpose() * dz;
          const Eigen::Index nx = t.value(x.id).rows();
          t.add_grad(x.id, dxh.head(nx));
          t.add_grad(h.id, dxh.tail(hs));
        }
        t.add_grad(c.id, dc.cwiseProduct(gf));
      });
  return split_state(stacked, hs);
}

LstmOut linear_cell(Var x, Var h, Var c, Var w, Var b) {
  const Eigen::Index hs = h.rows();
  if (x.cols() != 1 || h.cols() != 1 || w.rows() != hs || w.cols() != x.rows() + hs ||
      b.rows() != hs) {
    throw Error(ErrorKind::kDimensionMismatch, "linear_cell: shape mismatch");
  }
  Var h_new = linear(w, concat_rows({x, h}), b);
  return {h_new, c};
}

}  // namespace hyper::ad
