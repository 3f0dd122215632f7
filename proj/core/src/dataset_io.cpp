#include "hyper/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace hyper {

using detail::json;

std::string record_to_line(const SceneRecord& record) {
  json j;
  j["scene_id"] = record.scene_id;
  j["observed"] = detail::points_to_json(record.observed);
  j["future"] = detail::points_to_json(record.future);
  json modes = json::array();
  for (ModeId m : record.future_modes) modes.push_back(m.value);
  j["future_modes"] = std::move(modes);
  json lines = json::array();
  for (const auto& c : record.centerlines) lines.push_back(detail::points_to_json(c));
  j["centerlines"] = std::move(lines);
  return j.dump();
}

namespace {

SceneRecord record_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  for (const char* key : {"scene_id", "observed", "future", "future_modes", "centerlines"}) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing key '") + key + "'");
  }
  SceneRecord r;
  if (!j["scene_id"].is_string()) throw std::invalid_argument("scene_id is not a string");
  r.scene_id = j["scene_id"].get<std::string>();
  r.observed = detail::points_from_json(j["observed"], "observed");
  r.future = detail::points_from_json(j["future"], "future");
  const auto& modes = j["future_modes"];
  if (!modes.is_array()) throw std::invalid_argument("future_modes is not an array");
  for (const auto& m : modes) {
    if (!m.is_number_integer()) throw std::invalid_argument("future_modes entry is not an integer");
    r.future_modes.emplace_back(m.get<int>());
  }
  const auto& lines = j["centerlines"];
  if (!lines.is_array()) throw std::invalid_argument("centerlines is not an array");
  for (const auto& c : lines) r.centerlines.push_back(detail::points_from_json(c, "centerlines"));
  return r;
}

}  // namespace

SceneRecord record_from_line(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::kMalformedLine, "invalid JSON");
  try {
    return record_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::kMalformedLine, e.what());
  }
}

void write_dataset(const std::vector<SceneRecord>& records, const std::filesystem::path& path,
                   const std::string& provenance_json) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  if (!provenance_json.empty()) {
    json meta = detail::parse_object_or_null(provenance_json);
    if (!meta.is_object()) throw Error(ErrorKind::kInvalidArgument, "provenance must be a JSON object");
    out << json{{"meta", meta}}.dump() << '\n';
  }
  for (const auto& r : records) out << record_to_line(r) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

namespace {

bool is_meta_line(const std::string& line) {
  if (line.find("\"meta\"") == std::string::npos) return false;
  json j = json::parse(line, nullptr, false);
  return !j.is_discarded() && j.is_object() && j.contains("meta") && !j.contains("scene_id");
}

}  // namespace

std::vector<SceneRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::vector<SceneRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (first_content && is_meta_line(line)) {
      first_content = false;
      continue;
    }
    first_content = false;
    try {
      records.push_back(record_from_line(line));
    } catch (const Error& e) {
      std::ostringstream os;
      os << path.string() << ":" << line_no << ": malformed line: " << e.what();
      throw Error(ErrorKind::kMalformedLine, os.str());
    }
  }
  return records;
}

std::string read_dataset_meta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (is_meta_line(line)) return json::parse(line)["meta"].dump();
    return {};
  }
  return {};
}

}  // namespace hyper
