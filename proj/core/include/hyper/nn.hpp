#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hyper/autodiff.hpp"
#include "hyper/rng.hpp"

namespace hyper::nn {

using ad::Matrix;
using ad::Parameter;
using ad::Tape;
using ad::Var;

/// Owns named parameters in creation order. Names are module paths such as
/// "decoder.transition.hidden.weight".
class ParameterStore {
 public:
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
  Parameter& create(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                    Eigen::Index fan_in, Rng& rng);
  Parameter& create_constant(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                             double value);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t scalar_count() const;

  void zero_grad();
  double grad_norm() const;
  void scale_grad(double factor);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

/// Dropout and sampling context of one forward pass.
struct ForwardContext {
  Tape& tape;
  bool training = false;
  double dropout = 0.0;
  Rng* rng = nullptr;

  Var maybe_dropout(Var x) const;
};

struct Dense {
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;

  static Dense create(ParameterStore& store, const std::string& name, Eigen::Index in,
                      Eigen::Index out, Rng& rng);
  Var operator()(Tape& tape, Var x) const;
};

/// Two-layer perceptron: hidden layer (ReLU + dropout unless `linear`),
/// then an affine output layer.
struct Mlp {
  Dense hidden;
  Dense output;
  bool linear = false;

  static Mlp create(ParameterStore& store, const std::string& name, Eigen::Index in,
                    Eigen::Index width, Eigen::Index out, Rng& rng, bool linear = false);
  Var operator()(const ForwardContext& ctx, Var x) const;
};

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global gradient-norm clip; non-positive disables clipping.
  double clip_norm = 5.0;
};

class Adam {
 public:
  explicit Adam(AdamSettings settings) : settings_(settings) {}

  /// Applies one update from the gradients currently stored in `store`.
  void step(ParameterStore& store);
  long steps() const { return t_; }

 private:
  AdamSettings settings_;
  long t_ = 0;
  std::map<const Parameter*, std::pair<Matrix, Matrix>> moments_;
};

}  // namespace hyper::nn
