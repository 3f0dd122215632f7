#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hyper/labeling.hpp"
#include "hyper/smoothing.hpp"
#include "hyper/types.hpp"

namespace hyper {

struct OptimizerSettings {
  double learning_rate = 1e-3;
  int batch_size = 16;
  int epochs = 30;
  /// Early stopping patience in epochs on the validation total loss.
  int patience = 5;
  double val_fraction = 0.1;
  double clip_norm = 5.0;

  void validate() const;
};

struct SamplingSettings {
  double nms_threshold = 2.0;
  /// Repetitions averaged for stochastic methods.
  int runs = 5;
};

struct RunConfig {
  ModelConfig model;
  LabelThresholds labels;
  SmootherConfig smoother;
  OptimizerSettings optimizer;
  SamplingSettings sampling;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-purpose seeds fanned out from the global seed.
struct DerivedSeeds {
  std::uint64_t data;
  std::uint64_t init;
  std::uint64_t rollout;
  std::uint64_t selection;
};
DerivedSeeds derive_seeds(std::uint64_t global_seed);

/// Resolves defaults <- file <- overrides. Override keys are dotted paths
/// ("model.M") or unambiguous leaf names ("M"); values are JSON literals or
/// bare strings. Throws Error(kConfig) naming the key on unknown keys or type
/// errors. Applies the single-mode vocabulary constraint after resolution.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides = {});

RunConfig config_from_json(const std::string& json_text);
/// Fully resolved config as a JSON object (all keys present).
std::string config_to_json(const RunConfig& config);

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& json_text);

}  // namespace hyper
