#include "hyper/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hyper/error.hpp"

namespace hyper {

std::string_view to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::kFps: return "fps";
    case SelectionMethod::kNms: return "nms";
    case SelectionMethod::kMostLikely: return "most_likely";
    case SelectionMethod::kRandom: return "random";
  }
  return "?";
}

SelectionMethod selection_method_from_string(std::string_view name) {
  for (auto m : {SelectionMethod::kFps, SelectionMethod::kNms, SelectionMethod::kMostLikely,
                 SelectionMethod::kRandom}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown selection method '" + std::string(name) + "'");
}

SampleSet generate_samples(const SceneRecord& record, const PhaModel& model, Rng& rng, int M,
                           const RolloutOptions& options) {
  if (M < 1) throw Error(ErrorKind::kInvalidArgument, "M must be >= 1");
  SampleSet set;
  set.sequences.reserve(static_cast<std::size_t>(M));
  for (int k = 0; k < M; ++k) {
    set.sequences.push_back(rollout(record, model, rng, set.sequences, options));
    set.generation_order.push_back(static_cast<std::size_t>(k));
  }
  return set;
}

std::vector<double> renormalize(const std::vector<double>& log_likelihoods) {
  if (log_likelihoods.empty()) return {};
  const double top = *std::max_element(log_likelihoods.begin(), log_likelihoods.end());
  std::vector<double> out(log_likelihoods.size());
  if (!std::isfinite(top)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return out;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) total += out[i] = std::exp(log_likelihoods[i] - top);
  for (auto& p : out) p /= total;
  return out;
}

namespace {

double ll(const SampleSet& set, std::size_t i) {
  const auto& v = set.sequences[i].log_likelihood;
  if (!v) throw Error(ErrorKind::kInvalidArgument, "sample without a log-likelihood");
  return *v;
}

void check(const SampleSet& set, std::size_t n) {
  if (n > set.sequences.size()) {
    throw Error(ErrorKind::kInvalidArgument, "cannot select " + std::to_string(n) + " of " +
                                                 std::to_string(set.sequences.size()) + " samples");
  }
  for (const auto& s : set.sequences) {
    if (s.steps.empty()) throw Error(ErrorKind::kInvalidArgument, "empty sample sequence");
  }
}

SelectionResult finish(const SampleSet& set, std::vector<std::size_t> indices) {
  SelectionResult r;
  std::vector<double> lls;
  for (auto i : indices) {
    r.selected.push_back(set.sequences[i]);
    lls.push_back(ll(set, i));
  }
  r.probabilities = renormalize(lls);
  r.indices = std::move(indices);
  return r;
}

// Indices by descending likelihood, ties by lower index.
std::vector<std::size_t> likelihood_order(const SampleSet& set) {
  std::vector<std::size_t> order(set.sequences.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ll(set, a) > ll(set, b); });
  return order;
}

}  // namespace

SelectionResult select_fps(const SampleSet& set, std::size_t n) {
  check(set, n);
  std::vector<std::size_t> picked;
  if (n == 0) return finish(set, picked);
  const std::size_t m = set.sequences.size();
  picked.push_back(likelihood_order(set).front());
  std::vector<double> dist(m, std::numeric_limits<double>::infinity());
  std::vector<bool> used(m, false);
  used[picked[0]] = true;
  while (picked.size() < n) {
    const Vec2 last = set.sequences[picked.back()].endpoint();
    std::size_t best = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (used[i]) continue;
      dist[i] = std::min(dist[i], (set.sequences[i].endpoint() - last).norm());
      if (best == m || dist[i] > dist[best] || (dist[i] == dist[best] && ll(set, i) > ll(set, best))) {
        best = i;
      }
    }
    used[best] = true;
    picked.push_back(best);
  }
  return finish(set, picked);
}

SelectionResult select_nms(const SampleSet& set, std::size_t n, double threshold_m, Rng& rng) {
  check(set, n);
  if (!(threshold_m > 0.0)) throw Error(ErrorKind::kInvalidArgument, "NMS threshold must be > 0");
  std::vector<std::size_t> picked;
  std::vector<std::size_t> rejected;
  for (auto i : likelihood_order(set)) {
    const Vec2 e = set.sequences[i].endpoint();
    bool ok = picked.size() < n;
    for (auto j : picked) {
      if (!ok) break;
      ok = (set.sequences[j].endpoint() - e).norm() >= threshold_m;
    }
    (ok ? picked : rejected).push_back(i);
  }
  // Random fill from the rejected pool (rejected stays in likelihood order).
  while (picked.size() < n) {
    const std::size_t k = uniform_index(rng, rejected.size());
    picked.push_back(rejected[k]);
    rejected.erase(rejected.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return finish(set, picked);
}

SelectionResult select_most_likely(const SampleSet& set, std::size_t n) {
  check(set, n);
  auto order = likelihood_order(set);
  order.resize(n);
  return finish(set, order);
}

SelectionResult select_random(const SampleSet& set, std::size_t n, Rng& rng) {
  check(set, n);
  std::vector<std::size_t> pool(set.sequences.size());
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<double> lls;
  for (auto i : pool) lls.push_back(ll(set, i));
  std::vector<double> w = renormalize(lls);
  std::vector<std::size_t> picked;
  while (picked.size() < n) {
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::size_t k = 0;
    if (total > 0.0) {
      const double u = uniform_open(rng) * total;
      double acc = 0.0;
      k = w.size() - 1;
      for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (u < acc) {
          k = i;
          break;
        }
      }
      // Guard against rounding landing on a zero-weight tail entry.
      while (w[k] == 0.0 && k > 0) --k;
    } else {
      k = uniform_index(rng, w.size());
    }
    picked.push_back(pool[k]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
    w.erase(w.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return finish(set, picked);
}

SelectionResult select(const SampleSet& set, SelectionMethod method, std::size_t n,
                       double nms_threshold_m, Rng& rng) {
  switch (method) {
    case SelectionMethod::kFps: return select_fps(set, n);
    case SelectionMethod::kNms: return select_nms(set, n, nms_threshold_m, rng);
    case SelectionMethod::kMostLikely: return select_most_likely(set, n);
    case SelectionMethod::kRandom: return select_random(set, n, rng);
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown selection method");
}

double min_pairwise_endpoint_distance(const std::vector<HybridSequence>& sequences) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    for (std::size_t j = i + 1; j < sequences.size(); ++j) {
      best = std::min(best, (sequences[i].endpoint() - sequences[j].endpoint()).norm());
    }
  }
  return best;
}

}  // namespace hyper
