#include "hyper/checkpoint.hpp"

#include <fstream>
#include <set>

#include "hyper/config.hpp"
#include "json_util.hpp"

namespace hyper {

using detail::json;

namespace {

constexpr const char* kFormat = "hyper-checkpoint";
constexpr int kVersion = 1;

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingCheckpoint, "cannot open checkpoint '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != kFormat) {
    throw Error(ErrorKind::kCheckpointMismatch, "'" + path.string() + "' is not a checkpoint");
  }
  return j;
}

}  // namespace

void save_checkpoint(const PhaModel& model, const std::filesystem::path& path,
                     const std::string& provenance_json) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["model_config"] = json::parse(model_config_to_json(model.config()));
  json prov = detail::parse_object_or_null(provenance_json);
  j["provenance"] = prov.is_object() ? prov : json::object();
  json params = json::object();
  for (const auto* p : model.parameters().all()) {
    std::vector<double> data(p->value.data(), p->value.data() + p->value.size());
    params[p->name] = {{"shape", {p->value.rows(), p->value.cols()}}, {"data", data}};
  }
  j["parameters"] = std::move(params);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write checkpoint '" + path.string() + "'");
  out << j.dump() << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

PhaModel load_checkpoint(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
  const json j = read_json_file(path);
  if (j.value("version", 0) != kVersion) {
    throw Error(ErrorKind::kCheckpointMismatch, "unsupported checkpoint version");
  }
  const ModelConfig stored = model_config_from_json(j.at("model_config").dump());
  if (expected && !(*expected == stored)) {
    throw Error(ErrorKind::kCheckpointMismatch,
                "checkpoint config " + model_config_to_json(stored) + " does not match expected " +
                    model_config_to_json(*expected));
  }
  PhaModel model(stored, 0);
  const json& params = j.at("parameters");
  std::set<std::string> seen;
  for (auto* p : model.parameters().all()) {
    if (!params.contains(p->name)) {
      throw Error(ErrorKind::kCheckpointMismatch, "checkpoint is missing tensor '" + p->name + "'");
    }
    const json& t = params.at(p->name);
    const auto rows = t.at("shape").at(0).get<Eigen::Index>();
    const auto cols = t.at("shape").at(1).get<Eigen::Index>();
    const auto data = t.at("data").get<std::vector<double>>();
    if (rows != p->value.rows() || cols != p->value.cols() ||
        static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw Error(ErrorKind::kCheckpointMismatch, "tensor '" + p->name + "' has the wrong shape");
    }
    p->value = Eigen::Map<const ad::Matrix>(data.data(), rows, cols);
    seen.insert(p->name);
  }
  for (const auto& [name, _] : params.items()) {
    if (!seen.count(name)) {
      throw Error(ErrorKind::kCheckpointMismatch, "checkpoint has unexpected tensor '" + name + "'");
    }
  }
  return model;
}

std::string checkpoint_provenance(const std::filesystem::path& path) {
  return read_json_file(path).value("provenance", json::object()).dump();
}

}  // namespace hyper
