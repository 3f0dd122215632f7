#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hyper/error.hpp"

namespace hyper {

using Vec2 = Eigen::Vector2d;
using Polyline = std::vector<Vec2>;

/// Index into the mode vocabulary. The default vocabulary has five maneuvers.
struct ModeId {
  int value = 0;

  constexpr ModeId() = default;
  constexpr explicit ModeId(int v) : value(v) {}

  friend constexpr bool operator==(ModeId, ModeId) = default;
  friend constexpr auto operator<=>(ModeId, ModeId) = default;
};

namespace modes {
inline constexpr ModeId kStop{0};
inline constexpr ModeId kFastForward{1};
inline constexpr ModeId kSlowForward{2};
inline constexpr ModeId kLeftTurn{3};
inline constexpr ModeId kRightTurn{4};
inline constexpr int kDefaultVocabSize = 5;
}  // namespace modes

std::string_view mode_name(ModeId mode);

/// One time step of an agent: discrete mode plus planar position (meters,
/// agent-centric frame).
struct HybridState {
  ModeId mode;
  Vec2 position = Vec2::Zero();
};

struct HybridSequence {
  std::vector<HybridState> steps;
  /// Sum of log P_T(mode) and log N(position; mean, I) over the horizon.
  /// Empty until the sequence has been evaluated by the model.
  std::optional<double> log_likelihood;

  Vec2 endpoint() const { return steps.back().position; }
};

struct SceneRecord {
  std::string scene_id;
  std::vector<Vec2> observed;
  std::vector<Vec2> future;
  std::vector<ModeId> future_modes;
  std::vector<Polyline> centerlines;

  friend bool operator==(const SceneRecord&, const SceneRecord&) = default;
};

enum class Variant {
  kFull,
  kTransitionOnly,
  kNonAdaptiveProposal,
  kCoverageOnly,
  kSingleMode,
  kLinearDecoder,
  kFixedModeBaseline,
};

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);

struct ModelConfig {
  int vocab_size = modes::kDefaultVocabSize;
  int horizon = 30;
  int obs_horizon = 20;
  int hidden_size = 32;
  int K = 6;
  int M = 50;
  int N = 6;
  double alpha = 1.0;
  double beta = 1.0;
  double gumbel_temperature = 1.0;
  double dropout = 0.1;
  /// Straight-through one-hot in the forward pass. Disabled only for
  /// gradient verification, where the relaxed sample keeps the loss smooth.
  bool straight_through = true;
  /// Add unit-variance noise to sampled positions; otherwise x' = mean.
  bool stochastic_positions = false;
  Variant variant = Variant::kFull;

  /// Throws Error(kConfig) when an invariant is violated.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Checks horizons, label range and finiteness. Returns the record unchanged.
const SceneRecord& validate_record(const SceneRecord& record, const ModelConfig& config);

/// Maps every label to mode 0; used when training or evaluating the
/// single-mode variant.
SceneRecord collapse_modes(SceneRecord record);

}  // namespace hyper
