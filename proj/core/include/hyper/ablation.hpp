#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hyper/model.hpp"
#include "hyper/selection.hpp"

namespace hyper {

enum class Protocol { kTable1, kTable2, kTable4, kFull };
std::string_view to_string(Protocol p);
Protocol protocol_from_string(std::string_view name);

/// One evaluation cell: how predictions are produced from a model.
struct EvalCell {
  std::string method;  // row label, e.g. "fps", "nms-2m", "fixed_mode"
  SelectionMethod selection = SelectionMethod::kFps;
  double nms_threshold = 2.0;
  int M = 50;
  int N = 6;
  /// One rollout per mode with the mode held fixed (fixed-mode baseline).
  bool forced_modes = false;
};

struct EvalReport {
  std::string model;  // variant name
  std::string method;
  int M = 0;
  int N = 0;
  int n_scenes = 0;
  int n_runs = 0;
  double min_ade_1s = 0.0;
  double min_fde_1s = 0.0;
  double min_ade = 0.0;  // full horizon (3 s)
  double min_fde = 0.0;
  double min_der = 0.0;
  double nll = 0.0;
};

struct AblationOptions {
  std::uint64_t seed = 0;
  int runs = 5;
  std::vector<double> nms_thresholds{2.0, 4.0};
  /// Scenes rendered per row (first run only) when out_dir is set.
  int plot_scenes = 2;
  std::optional<std::filesystem::path> out_dir;
  /// Resolved run config echoed into every report line.
  std::string config_json;
};

struct AblationResult {
  std::vector<EvalReport> rows;
  std::string markdown;
};

/// Evaluates cells on one model, averaging every metric over `runs`
/// repetitions. Cells share the generated samples of a run (smaller M uses
/// the prefix of the sequential sample set).
std::vector<EvalReport> evaluate_cells(const std::vector<SceneRecord>& scenes, const PhaModel& model,
                                       const std::vector<EvalCell>& cells, int runs,
                                       std::uint64_t seed,
                                       const std::optional<std::filesystem::path>& plot_dir = {},
                                       int plot_scenes = 0);

/// Protocols:
///  table1  transition_only, nonadaptive_proposal and full models, M = N
///  table2  full model; FPS, NMS, most-likely, random for several M
///  table4  full model vs. the fixed-mode baseline, min-of-5
///  full    every given model at its configured M and N
/// Throws Error(kMissingData) on an empty dataset and
/// Error(kMissingCheckpoint) when a required model is absent.
AblationResult run_ablation(const std::vector<SceneRecord>& dataset,
                            const std::vector<const PhaModel*>& models, Protocol protocol,
                            const AblationOptions& options);
AblationResult run_ablation(const std::vector<SceneRecord>& dataset,
                            const std::vector<std::filesystem::path>& checkpoints,
                            Protocol protocol, const AblationOptions& options);

std::string report_line(const EvalReport& row, const std::string& config_json, std::uint64_t seed);
std::string markdown_table(const std::vector<EvalReport>& rows);

}  // namespace hyper
