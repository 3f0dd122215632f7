#pragma once

#include <vector>

#include <Eigen/Core>

#include "hyper/types.hpp"

namespace hyper {

enum class MaternNu { kHalf, kOneAndHalf, kTwoAndHalf };

struct SmootherConfig {
  MaternNu nu = MaternNu::kOneAndHalf;
  /// Added to the kernel diagonal (observation noise variance).
  double noise_alpha = 0.1;
  /// Length-scale search range in time steps; the value maximizing the
  /// log marginal likelihood is used.
  double min_length_scale = 0.1;
  double max_length_scale = 1000.0;

  void validate() const;
};

double matern_kernel(double distance, double length_scale, MaternNu nu);

/// Posterior mean at the training inputs of a zero-mean GP.
Eigen::VectorXd gp_posterior_mean(const Eigen::VectorXd& inputs, const Eigen::VectorXd& targets,
                                  double length_scale, double noise_alpha, MaternNu nu);

double gp_log_marginal_likelihood(const Eigen::VectorXd& inputs, const Eigen::VectorXd& targets,
                                  double length_scale, double noise_alpha, MaternNu nu);

/// GP filter over time indices, one coordinate at a time, sharing one fitted
/// length scale. The prior mean is the least-squares line through the data,
/// so straight constant-velocity motion passes through unchanged.
std::vector<Vec2> smooth_trajectory(const std::vector<Vec2>& raw, const SmootherConfig& config);

}  // namespace hyper
