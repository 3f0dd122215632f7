#include "hyper/nn.hpp"

#include <cmath>

#include "hyper/error.hpp"

namespace hyper::nn {

Parameter& ParameterStore::create(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                                  Eigen::Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
  Matrix v(rows, cols);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = bound * (2.0 * uniform_open(rng) - 1.0);
  if (index_.count(name)) throw Error(ErrorKind::kInvalidArgument, "duplicate parameter " + name);
  index_[name] = params_.size();
  params_.push_back(std::make_unique<Parameter>(name, std::move(v)));
  return *params_.back();
}

Parameter& ParameterStore::create_constant(const std::string& name, Eigen::Index rows,
                                           Eigen::Index cols, double value) {
  if (index_.count(name)) throw Error(ErrorKind::kInvalidArgument, "duplicate parameter " + name);
  index_[name] = params_.size();
  params_.push_back(std::make_unique<Parameter>(name, Matrix::Constant(rows, cols, value)));
  return *params_.back();
}

Parameter& ParameterStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::kInvalidArgument, "no parameter named " + name);
  return *params_[it->second];
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::kInvalidArgument, "no parameter named " + name);
  return *params_[it->second];
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

double ParameterStore::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) s += p->grad.squaredNorm();
  return std::sqrt(s);
}

void ParameterStore::scale_grad(double factor) {
  for (auto& p : params_) p->grad *= factor;
}

Var ForwardContext::maybe_dropout(Var x) const {
  if (!training || dropout <= 0.0 || rng == nullptr) return x;
  return ad::dropout(x, dropout, *rng);
}

Dense Dense::create(ParameterStore& store, const std::string& name, Eigen::Index in,
                    Eigen::Index out, Rng& rng) {
  Dense d;
  d.weight = &store.create(name + ".weight", out, in, in, rng);
  d.bias = &store.create(name + ".bias", out, 1, in, rng);
  return d;
}

Var Dense::operator()(Tape& tape, Var x) const {
  return ad::linear(tape.param(*weight), x, tape.param(*bias));
}

Mlp Mlp::create(ParameterStore& store, const std::string& name, Eigen::Index in,
                Eigen::Index width, Eigen::Index out, Rng& rng, bool linear) {
  Mlp m;
  m.hidden = Dense::create(store, name + ".hidden", in, width, rng);
  m.output = Dense::create(store, name + ".output", width, out, rng);
  m.linear = linear;
  return m;
}

Var Mlp::operator()(const ForwardContext& ctx, Var x) const {
  Var h = hidden(ctx.tape, x);
  if (!linear) h = ctx.maybe_dropout(ad::relu(h));
  return output(ctx.tape, h);
}

void Adam::step(ParameterStore& store) {
  ++t_;
  if (settings_.clip_norm > 0.0) {
    const double norm = store.grad_norm();
    if (std::isfinite(norm) && norm > settings_.clip_norm) store.scale_grad(settings_.clip_norm / norm);
  }
  const double bc1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(t_));
  for (Parameter* p : store.all()) {
    auto [it, inserted] = moments_.try_emplace(p);
    auto& [m, v] = it->second;
    if (inserted) {
      m = Matrix::Zero(p->value.rows(), p->value.cols());
      v = Matrix::Zero(p->value.rows(), p->value.cols());
    }
    m = settings_.beta1 * m + (1.0 - settings_.beta1) * p->grad;
    v = settings_.beta2 * v + (1.0 - settings_.beta2) * p->grad.cwiseAbs2();
    p->value.array() -= settings_.learning_rate * (m.array() / bc1) /
                        ((v.array() / bc2).sqrt() + settings_.epsilon);
  }
}

}  // namespace hyper::nn
