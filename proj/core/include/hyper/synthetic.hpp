#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyper/labeling.hpp"
#include "hyper/smoothing.hpp"
#include "hyper/types.hpp"

namespace hyper {

enum class ScenarioKind {
  kLaneFollow,
  kLaneChangeMidHorizon,
  kTurnAfterFollow,
  kDecelerateToStop,
};

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(std::string_view name);

/// Scenario kind -> proportion. Proportions must be non-negative and sum to 1.
using ScenarioMix = std::vector<std::pair<ScenarioKind, double>>;

/// 40% lane follow; the remaining 60% split evenly across the intent-changing
/// kinds.
ScenarioMix default_mix();

/// Parses "lane_follow=0.5,lane_change_mid_horizon=0.5" and validates the
/// proportions.
ScenarioMix parse_mix(std::string_view text);
std::string format_mix(const ScenarioMix& mix);

struct SyntheticOptions {
  int obs_horizon = 20;
  int horizon = 30;
  /// Std-dev of i.i.d. position noise in meters. When positive, labels are
  /// computed on the GP-smoothed trajectory.
  double noise_std = 0.0;
  LabelThresholds thresholds;
  SmootherConfig smoother;
};

/// Deterministic in (count, seed, mix, options). Kind counts are allocated by
/// largest remainder, so each kind gets at least floor(p * count) records.
/// Every kind except lane_follow changes mode inside the future horizon.
std::vector<SceneRecord> generate_synthetic(int count, std::uint64_t seed, const ScenarioMix& mix,
                                            const SyntheticOptions& options = {});

}  // namespace hyper
