#pragma once

#include <cstdint>
#include <vector>

#include "hyper/types.hpp"

namespace hyper {

struct LabelThresholds {
  /// Heading change per step, degrees.
  double theta_deg = 2.0;
  /// Speed thresholds, m/s.
  double v_fast = 1.0;
  double v_slow = 0.05;
  double step_seconds = 0.1;

  void validate() const;
};

/// Per-step kinematic quantities the labeler decides on.
struct StepKinematics {
  double speed = 0.0;
  double heading_change_deg = 0.0;
};

/// Speed from the displacement into each point; heading change between that
/// displacement and the previous one. The first point reuses the forward
/// quantities of the second. Heading change is zero when either displacement
/// is at or below `v_slow` (heading undefined while stopped).
std::vector<StepKinematics> step_kinematics(const std::vector<Vec2>& trajectory,
                                            const LabelThresholds& thresholds);

/// Rule chain evaluated in order: left turn, right turn, fast forward,
/// slow forward, stop.
ModeId classify_step(const StepKinematics& k, const LabelThresholds& thresholds);

/// One mode label per point. Requires at least two points.
std::vector<ModeId> auto_label(const std::vector<Vec2>& trajectory,
                               const LabelThresholds& thresholds);

/// Labels the future of a scene using the observed tail as context, so the
/// first future label describes the step out of the last observed position.
std::vector<ModeId> label_future(const std::vector<Vec2>& observed,
                                 const std::vector<Vec2>& future,
                                 const LabelThresholds& thresholds);

/// Replaces exactly round(fraction * total_steps) labels, chosen uniformly
/// without replacement, each by a uniformly drawn different mode.
std::vector<SceneRecord> perturb_labels(std::vector<SceneRecord> records, double fraction,
                                        std::uint64_t seed,
                                        int vocab_size = modes::kDefaultVocabSize);

}  // namespace hyper
