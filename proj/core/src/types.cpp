#include "hyper/types.hpp"

#include <cmath>
#include <sstream>

namespace hyper {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kNonFiniteValue: return "non_finite_value";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kMalformedLine: return "malformed_line";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kCheckpointMismatch: return "checkpoint_mismatch";
    case ErrorKind::kMissingData: return "missing_data";
    case ErrorKind::kMissingCheckpoint: return "missing_checkpoint";
  }
  return "unknown";
}

std::string_view mode_name(ModeId mode) {
  static constexpr std::array<std::string_view, 5> kNames = {
      "stop", "fast_forward", "slow_forward", "left_turn", "right_turn"};
  if (mode.value >= 0 && mode.value < static_cast<int>(kNames.size())) {
    return kNames[static_cast<std::size_t>(mode.value)];
  }
  return "mode";
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kTransitionOnly: return "transition_only";
    case Variant::kNonAdaptiveProposal: return "nonadaptive_proposal";
    case Variant::kCoverageOnly: return "coverage_only";
    case Variant::kSingleMode: return "single_mode";
    case Variant::kLinearDecoder: return "linear_decoder";
    case Variant::kFixedModeBaseline: return "fixed_mode_baseline";
  }
  return "unknown";
}

Variant variant_from_string(std::string_view name) {
  for (Variant v : {Variant::kFull, Variant::kTransitionOnly, Variant::kNonAdaptiveProposal,
                    Variant::kCoverageOnly, Variant::kSingleMode, Variant::kLinearDecoder,
                    Variant::kFixedModeBaseline}) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorKind::kConfig, "unknown variant '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kConfig, msg); };
  if (vocab_size < 1) fail("vocab_size must be >= 1");
  if (horizon < 1) fail("horizon must be >= 1");
  if (obs_horizon < 1) fail("obs_horizon must be >= 1");
  if (hidden_size < 1) fail("hidden_size must be >= 1");
  if (K < 1) fail("K must be >= 1");
  if (M < 1) fail("M must be >= 1");
  if (N < 1 || N > M) fail("N must satisfy 1 <= N <= M");
  if (!(gumbel_temperature > 0.0)) fail("gumbel_temperature must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (!std::isfinite(alpha) || !std::isfinite(beta)) fail("alpha and beta must be finite");
  if (variant == Variant::kSingleMode && vocab_size != 1) {
    fail("single_mode variant requires vocab_size = 1");
  }
}

namespace {

void check_finite(const std::vector<Vec2>& points, const std::string& field) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      std::ostringstream os;
      os << "non-finite value in " << field << "[" << i << "]";
      throw Error(ErrorKind::kNonFiniteValue, os.str());
    }
  }
}

void check_length(std::size_t actual, int expected, const std::string& field) {
  if (actual != static_cast<std::size_t>(expected)) {
    std::ostringstream os;
    os << field << " has length " << actual << ", expected " << expected;
    throw Error(ErrorKind::kDimensionMismatch, os.str());
  }
}

}  // namespace

const SceneRecord& validate_record(const SceneRecord& record, const ModelConfig& config) {
  check_length(record.observed.size(), config.obs_horizon, "observed");
  check_length(record.future.size(), config.horizon, "future");
  check_length(record.future_modes.size(), config.horizon, "future_modes");
  check_finite(record.observed, "observed");
  check_finite(record.future, "future");
  for (std::size_t i = 0; i < record.centerlines.size(); ++i) {
    check_finite(record.centerlines[i], "centerlines[" + std::to_string(i) + "]");
  }
  for (std::size_t i = 0; i < record.future_modes.size(); ++i) {
    const int m = record.future_modes[i].value;
    if (m < 0 || m >= config.vocab_size) {
      std::ostringstream os;
      os << "future_modes[" << i << "] = " << m << " outside vocabulary of size "
         << config.vocab_size;
      throw Error(ErrorKind::kInvalidArgument, os.str());
    }
  }
  return record;
}

SceneRecord collapse_modes(SceneRecord record) {
  for (auto& m : record.future_modes) m = ModeId{0};
  return record;
}

}  // namespace hyper
