#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hyper/types.hpp"

namespace hyper {

struct PlotOptions {
  int width = 640;
  int height = 640;
  std::string title;
};

/// Centerlines (gray), observed past (blue), ground-truth future (cyan),
/// predictions (red) with red dots where a prediction changes mode.
std::string render_scene_svg(const SceneRecord& record,
                             const std::vector<HybridSequence>& predictions,
                             const PlotOptions& options = {});

void write_scene_svg(const std::filesystem::path& path, const SceneRecord& record,
                     const std::vector<HybridSequence>& predictions,
                     const PlotOptions& options = {});

}  // namespace hyper
