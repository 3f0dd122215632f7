#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "hyper/model.hpp"

namespace hyper {

/// JSON document holding the model config, init seed, provenance (the resolved
/// run config) and every parameter tensor keyed by module path.
void save_checkpoint(const PhaModel& model, const std::filesystem::path& path,
                     const std::string& provenance_json = {});

/// Rebuilds the model from the stored config and parameters. With
/// `expected` set, any difference in model config is an error
/// (kCheckpointMismatch), as is any missing, extra or mis-shaped tensor.
PhaModel load_checkpoint(const std::filesystem::path& path,
                         const std::optional<ModelConfig>& expected = std::nullopt);

/// The provenance object stored in a checkpoint, as JSON text.
std::string checkpoint_provenance(const std::filesystem::path& path);

}  // namespace hyper
