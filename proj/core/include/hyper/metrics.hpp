#pragma once

#include <vector>

#include "hyper/selection.hpp"
#include "hyper/types.hpp"

namespace hyper {

struct DisplacementErrors {
  double min_ade = 0.0;
  double min_fde = 0.0;
};

/// Per-metric minimum over predictions of ADE and FDE on the first
/// `horizon_steps` steps. Throws when a prediction or the ground truth is
/// shorter than the horizon, or when there are no predictions.
DisplacementErrors min_ade_fde(const std::vector<std::vector<Vec2>>& predictions,
                               const std::vector<Vec2>& ground_truth, int horizon_steps);
DisplacementErrors min_ade_fde(const std::vector<HybridSequence>& predictions,
                               const std::vector<Vec2>& ground_truth, int horizon_steps);

/// Minimum over predictions of the fraction of steps with the wrong mode.
double min_der(const std::vector<std::vector<ModeId>>& predictions,
               const std::vector<ModeId>& ground_truth);
double min_der(const std::vector<HybridSequence>& predictions,
               const std::vector<ModeId>& ground_truth);

/// -log sum_i p_i prod_t N(o_t; x_it, I), log-sum-exp stabilized.
double nll(const SelectionResult& predictions, const std::vector<Vec2>& ground_truth);

std::vector<std::vector<Vec2>> positions_of(const std::vector<HybridSequence>& sequences);
std::vector<std::vector<ModeId>> modes_of(const std::vector<HybridSequence>& sequences);

}  // namespace hyper
