#include "doctest.h"

#include <cmath>
#include <vector>

#include "hyper/error.hpp"
#include "hyper/rng.hpp"
#include "hyper/smoothing.hpp"

using namespace hyper;

namespace {

using Mat = std::vector<std::vector<double>>;

// Oracle: Gauss-Jordan with partial pivoting on an augmented system; also
// returns log|A| from the pivots.
std::vector<double> solve(Mat a, std::vector<double> b, double* log_det = nullptr) {
  const std::size_t n = b.size();
  double ld = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    ld += std::log(std::abs(a[c][c]));
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  if (log_det) *log_det = ld;
  return b;
}

double matern32(double d, double l) {
  const double s = std::sqrt(3.0) * d / l;
  return (1.0 + s) * std::exp(-s);
}

Mat gram(int n, double l, double alpha) {
  Mat k(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) k[i][j] = matern32(std::abs(i - j), l) + (i == j ? alpha : 0.0);
  }
  return k;
}

}  // namespace

TEST_SUITE("data-pipeline") {
  TEST_CASE("Matern kernel closed forms") {
    CHECK(matern_kernel(0.0, 2.0, MaternNu::kOneAndHalf) == doctest::Approx(1.0));
    CHECK(matern_kernel(1.0, 2.0, MaternNu::kHalf) == doctest::Approx(std::exp(-0.5)));
    CHECK(matern_kernel(1.5, 2.0, MaternNu::kOneAndHalf) == doctest::Approx(matern32(1.5, 2.0)).epsilon(1e-12));
    const double s = std::sqrt(5.0) * 1.5 / 2.0;
    CHECK(matern_kernel(1.5, 2.0, MaternNu::kTwoAndHalf) ==
          doctest::Approx((1.0 + s + s * s / 3.0) * std::exp(-s)).epsilon(1e-12));
  }

  TEST_CASE("posterior mean and marginal likelihood match the closed form") {
    Rng rng(11);
    const int n = 25;
    Eigen::VectorXd x(n), y(n);
    std::vector<double> yv(n);
    for (int i = 0; i < n; ++i) {
      x(i) = i;
      y(i) = yv[static_cast<std::size_t>(i)] = std::sin(0.3 * i) + 0.2 * standard_normal(rng);
    }
    for (double l : {0.5, 3.0, 20.0}) {
      const Mat k_noisy = gram(n, l, 0.1);
      double log_det = 0.0;
      const auto w = solve(k_noisy, yv, &log_det);
      const auto mean = gp_posterior_mean(x, y, l, 0.1, MaternNu::kOneAndHalf);
      for (int i = 0; i < n; ++i) {
        double m = 0.0;
        for (int j = 0; j < n; ++j) m += matern32(std::abs(i - j), l) * w[static_cast<std::size_t>(j)];
        CHECK(mean(i) == doctest::Approx(m).epsilon(1e-9));
      }
      double quad = 0.0;
      for (int i = 0; i < n; ++i) quad += yv[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
      const double lml = -0.5 * quad - 0.5 * log_det - 0.5 * n * std::log(2.0 * M_PI);
      CHECK(gp_log_marginal_likelihood(x, y, l, 0.1, MaternNu::kOneAndHalf) ==
            doctest::Approx(lml).epsilon(1e-9));
    }
  }

  TEST_CASE("straight noiseless line passes through within 1e-3 m") {
    std::vector<Vec2> line;
    for (int i = 0; i < 50; ++i) line.emplace_back(-10.0 + 0.7 * i, 2.0 - 0.3 * i);
    const auto out = smooth_trajectory(line, SmootherConfig{});
    REQUIRE(out.size() == line.size());
    for (std::size_t i = 0; i < line.size(); ++i) CHECK((out[i] - line[i]).norm() < 1e-3);
  }

  TEST_CASE("constant point stays constant") {
    std::vector<Vec2> pts(30, Vec2(4.0, -2.0));
    const auto out = smooth_trajectory(pts, SmootherConfig{});
    for (const auto& p : out) CHECK((p - Vec2(4.0, -2.0)).norm() < 1e-9);
  }

  TEST_CASE("smoothing reduces noise around a line (100 seeds)") {
    int better = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      std::vector<Vec2> truth, noisy;
      for (int i = 0; i < 50; ++i) {
        truth.emplace_back(0.8 * i, 0.1 * i);
        noisy.push_back(truth.back() + 0.3 * Vec2(standard_normal(rng), standard_normal(rng)));
      }
      const auto out = smooth_trajectory(noisy, SmootherConfig{});
      double raw = 0, smooth = 0;
      for (std::size_t i = 0; i < truth.size(); ++i) {
        raw += (noisy[i] - truth[i]).squaredNorm();
        smooth += (out[i] - truth[i]).squaredNorm();
      }
      better += smooth < raw;
    }
    CHECK(better == 100);
  }

  TEST_CASE("too few points and bad config are errors") {
    CHECK_THROWS_AS(smooth_trajectory({Vec2(0, 0)}, SmootherConfig{}), Error);
    SmootherConfig bad;
    bad.noise_alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}
