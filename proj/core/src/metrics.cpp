#include "hyper/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hyper/error.hpp"

namespace hyper {

std::vector<std::vector<Vec2>> positions_of(const std::vector<HybridSequence>& sequences) {
  std::vector<std::vector<Vec2>> out;
  for (const auto& s : sequences) {
    auto& p = out.emplace_back();
    for (const auto& st : s.steps) p.push_back(st.position);
  }
  return out;
}

std::vector<std::vector<ModeId>> modes_of(const std::vector<HybridSequence>& sequences) {
  std::vector<std::vector<ModeId>> out;
  for (const auto& s : sequences) {
    auto& m = out.emplace_back();
    for (const auto& st : s.steps) m.push_back(st.mode);
  }
  return out;
}

DisplacementErrors min_ade_fde(const std::vector<std::vector<Vec2>>& predictions,
                               const std::vector<Vec2>& ground_truth, int horizon_steps) {
  if (predictions.empty()) throw Error(ErrorKind::kInvalidArgument, "no predictions");
  if (horizon_steps < 1) throw Error(ErrorKind::kInvalidArgument, "horizon must be >= 1");
  const auto h = static_cast<std::size_t>(horizon_steps);
  if (ground_truth.size() < h) {
    throw Error(ErrorKind::kDimensionMismatch, "horizon exceeds ground-truth length");
  }
  DisplacementErrors out{std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity()};
  for (const auto& p : predictions) {
    if (p.size() < h) throw Error(ErrorKind::kDimensionMismatch, "horizon exceeds prediction length");
    double ade = 0.0;
    for (std::size_t t = 0; t < h; ++t) ade += (p[t] - ground_truth[t]).norm();
    out.min_ade = std::min(out.min_ade, ade / static_cast<double>(h));
    out.min_fde = std::min(out.min_fde, (p[h - 1] - ground_truth[h - 1]).norm());
  }
  return out;
}

DisplacementErrors min_ade_fde(const std::vector<HybridSequence>& predictions,
                               const std::vector<Vec2>& ground_truth, int horizon_steps) {
  return min_ade_fde(positions_of(predictions), ground_truth, horizon_steps);
}

double min_der(const std::vector<std::vector<ModeId>>& predictions,
               const std::vector<ModeId>& ground_truth) {
  if (predictions.empty()) throw Error(ErrorKind::kInvalidArgument, "no predictions");
  if (ground_truth.empty()) throw Error(ErrorKind::kInvalidArgument, "empty mode sequence");
  double best = 1.0;
  for (const auto& p : predictions) {
    if (p.size() != ground_truth.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "mode sequence length mismatch");
    }
    std::size_t wrong = 0;
    for (std::size_t t = 0; t < p.size(); ++t) wrong += p[t] != ground_truth[t];
    best = std::min(best, static_cast<double>(wrong) / static_cast<double>(p.size()));
  }
  return best;
}

double min_der(const std::vector<HybridSequence>& predictions,
               const std::vector<ModeId>& ground_truth) {
  return min_der(modes_of(predictions), ground_truth);
}

double nll(const SelectionResult& predictions, const std::vector<Vec2>& ground_truth) {
  if (predictions.selected.empty()) throw Error(ErrorKind::kInvalidArgument, "no predictions");
  if (predictions.probabilities.size() != predictions.selected.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "one probability per prediction required");
  }
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  std::vector<double> terms;
  for (std::size_t i = 0; i < predictions.selected.size(); ++i) {
    const double p = predictions.probabilities[i];
    if (p <= 0.0) continue;
    const auto& steps = predictions.selected[i].steps;
    if (steps.size() != ground_truth.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "prediction length differs from ground truth");
    }
    double lp = std::log(p);
    for (std::size_t t = 0; t < steps.size(); ++t) {
      lp += -0.5 * (steps[t].position - ground_truth[t]).squaredNorm() - log_2pi;
    }
    terms.push_back(lp);
  }
  if (terms.empty()) throw Error(ErrorKind::kInvalidArgument, "all probabilities are zero");
  const double top = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return -(top + std::log(acc));
}

}  // namespace hyper
