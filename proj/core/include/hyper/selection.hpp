#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "hyper/model.hpp"
#include "hyper/rng.hpp"
#include "hyper/types.hpp"

namespace hyper {

struct SampleSet {
  std::vector<HybridSequence> sequences;
  /// Order in which the sequences were generated (each conditioned on the
  /// ones before it).
  std::vector<std::size_t> generation_order;
};

struct SelectionResult {
  std::vector<HybridSequence> selected;
  std::vector<double> probabilities;
  /// Index of each selected sequence in the source SampleSet.
  std::vector<std::size_t> indices;
};

enum class SelectionMethod { kFps, kNms, kMostLikely, kRandom };
std::string_view to_string(SelectionMethod m);
SelectionMethod selection_method_from_string(std::string_view name);

/// M sequential rollouts; rollout k is conditioned on rollouts 1..k-1.
SampleSet generate_samples(const SceneRecord& record, const PhaModel& model, Rng& rng, int M,
                           const RolloutOptions& options = {});

/// exp(ll_i) / sum_j exp(ll_j), log-sum-exp stabilized.
std::vector<double> renormalize(const std::vector<double>& log_likelihoods);

/// Farthest point sampling on endpoints, seeded with the most likely sample.
SelectionResult select_fps(const SampleSet& set, std::size_t n);
/// Greedy endpoint NMS in likelihood order with seeded random fill.
SelectionResult select_nms(const SampleSet& set, std::size_t n, double threshold_m, Rng& rng);
SelectionResult select_most_likely(const SampleSet& set, std::size_t n);
/// n draws without replacement, proportional to normalized likelihood.
SelectionResult select_random(const SampleSet& set, std::size_t n, Rng& rng);

SelectionResult select(const SampleSet& set, SelectionMethod method, std::size_t n,
                       double nms_threshold_m, Rng& rng);

/// Smallest pairwise endpoint distance (infinity for fewer than 2 items).
double min_pairwise_endpoint_distance(const std::vector<HybridSequence>& sequences);

}  // namespace hyper
