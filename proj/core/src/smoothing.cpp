#include "hyper/smoothing.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace hyper {

void SmootherConfig::validate() const {
  if (!(noise_alpha > 0.0)) throw Error(ErrorKind::kConfig, "noise_alpha must be > 0");
  if (!(min_length_scale > 0.0) || !(max_length_scale >= min_length_scale)) {
    throw Error(ErrorKind::kConfig, "invalid length-scale search range");
  }
}

double matern_kernel(double distance, double length_scale, MaternNu nu) {
  const double r = std::abs(distance) / length_scale;
  switch (nu) {
    case MaternNu::kHalf:
      return std::exp(-r);
    case MaternNu::kOneAndHalf: {
      const double a = std::sqrt(3.0) * r;
      return (1.0 + a) * std::exp(-a);
    }
    case MaternNu::kTwoAndHalf: {
      const double a = std::sqrt(5.0) * r;
      return (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
  }
  return 0.0;
}

namespace {

Eigen::MatrixXd gram(const Eigen::VectorXd& x, double length_scale, double noise_alpha,
                     MaternNu nu) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = matern_kernel(x(i) - x(j), length_scale, nu);
    }
  }
  k.diagonal().array() += noise_alpha;
  return k;
}

}  // namespace

Eigen::VectorXd gp_posterior_mean(const Eigen::VectorXd& inputs, const Eigen::VectorXd& targets,
                                  double length_scale, double noise_alpha, MaternNu nu) {
  const Eigen::MatrixXd k_noisy = gram(inputs, length_scale, noise_alpha, nu);
  Eigen::MatrixXd k = k_noisy;
  k.diagonal().array() -= noise_alpha;
  const Eigen::VectorXd weights = k_noisy.llt().solve(targets);
  return k * weights;
}

double gp_log_marginal_likelihood(const Eigen::VectorXd& inputs, const Eigen::VectorXd& targets,
                                  double length_scale, double noise_alpha, MaternNu nu) {
  const Eigen::LLT<Eigen::MatrixXd> llt(gram(inputs, length_scale, noise_alpha, nu));
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd weights = llt.solve(targets);
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det_half = l.diagonal().array().log().sum();
  return -0.5 * targets.dot(weights) - log_det_half -
         0.5 * static_cast<double>(inputs.size()) * std::log(2.0 * M_PI);
}

std::vector<Vec2> smooth_trajectory(const std::vector<Vec2>& raw, const SmootherConfig& config) {
  config.validate();
  if (raw.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "smooth_trajectory needs at least 2 points");
  }
  const auto n = static_cast<Eigen::Index>(raw.size());
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) t(i) = static_cast<double>(i);

  // Least-squares linear trend per coordinate.
  Eigen::MatrixXd design(n, 2);
  design.col(0).setOnes();
  design.col(1) = t;
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) y.row(i) = raw[static_cast<std::size_t>(i)].transpose();
  const Eigen::MatrixXd coef = design.colPivHouseholderQr().solve(y);
  const Eigen::MatrixXd trend = design * coef;
  const Eigen::MatrixXd residual = y - trend;

  auto objective = [&](double log_ls) {
    const double ls = std::exp(log_ls);
    return gp_log_marginal_likelihood(t, residual.col(0), ls, config.noise_alpha, config.nu) +
           gp_log_marginal_likelihood(t, residual.col(1), ls, config.noise_alpha, config.nu);
  };

  // Coarse log-spaced grid, then golden-section refinement around the best cell.
  const double lo = std::log(config.min_length_scale);
  const double hi = std::log(config.max_length_scale);
  constexpr int kGrid = 48;
  const double step = (hi - lo) / kGrid;
  double best_x = lo;
  double best_f = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double x = lo + step * i;
    const double f = objective(x);
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int it = 0; it < 40; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  const double mid = 0.5 * (a + b);
  const double length_scale = std::exp(objective(mid) >= best_f ? mid : best_x);

  std::vector<Vec2> out(raw.size());
  for (int dim = 0; dim < 2; ++dim) {
    const Eigen::VectorXd mean =
        gp_posterior_mean(t, residual.col(dim), length_scale, config.noise_alpha, config.nu);
    for (Eigen::Index i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)](dim) = trend(i, dim) + mean(i);
    }
  }
  return out;
}

}  // namespace hyper
