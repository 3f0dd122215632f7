#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hyper/types.hpp"

namespace hyper {

/// One record as a single-line JSON object with keys scene_id, observed,
/// future, future_modes, centerlines. Doubles are written round-trip exact.
std::string record_to_line(const SceneRecord& record);

/// Throws Error(kMalformedLine) on any parse or schema problem.
SceneRecord record_from_line(std::string_view line);

/// Writes one record per line. When `provenance_json` is non-empty it must be
/// a JSON object; it is written as a leading `{"meta": ...}` line.
void write_dataset(const std::vector<SceneRecord>& records, const std::filesystem::path& path,
                   const std::string& provenance_json = {});

/// Reads a dataset file. A leading meta line is skipped, blank lines are
/// ignored. Errors name the 1-based line number.
std::vector<SceneRecord> read_dataset(const std::filesystem::path& path);

/// Returns the meta object of a dataset file as JSON text, or "" if absent.
std::string read_dataset_meta(const std::filesystem::path& path);

}  // namespace hyper
