#include "hyper/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "hyper/rng.hpp"
#include "json_util.hpp"

namespace hyper {

using detail::json;

void OptimizerSettings::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::kConfig, "optimizer.learning_rate must be > 0");
  if (batch_size < 1) throw Error(ErrorKind::kConfig, "optimizer.batch_size must be >= 1");
  if (epochs < 1) throw Error(ErrorKind::kConfig, "optimizer.epochs must be >= 1");
  if (patience < 1) throw Error(ErrorKind::kConfig, "optimizer.patience must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw Error(ErrorKind::kConfig, "optimizer.val_fraction must be in [0, 1)");
  }
}

void RunConfig::validate() const {
  model.validate();
  labels.validate();
  smoother.validate();
  optimizer.validate();
  if (!(sampling.nms_threshold > 0.0)) throw Error(ErrorKind::kConfig, "sampling.nms_threshold must be > 0");
  if (sampling.runs < 1) throw Error(ErrorKind::kConfig, "sampling.runs must be >= 1");
}

DerivedSeeds derive_seeds(std::uint64_t global_seed) {
  return {derive_seed(global_seed, "data"), derive_seed(global_seed, "init"),
          derive_seed(global_seed, "rollout"), derive_seed(global_seed, "selection")};
}

namespace {

struct Field {
  std::string path;
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

[[noreturn]] void type_error(const std::string& key, const char* expected) {
  throw Error(ErrorKind::kConfig, "config key '" + key + "' must be " + expected);
}

template <typename Getter>
Field int_field(std::string path, Getter ref) {
  return {path,
          [path, ref](RunConfig& c, const json& v) {
            if (!v.is_number_integer()) type_error(path, "an integer");
            ref(c) = v.get<int>();
          },
          [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); }};
}

template <typename Getter>
Field double_field(std::string path, Getter ref) {
  return {path,
          [path, ref](RunConfig& c, const json& v) {
            if (!v.is_number()) type_error(path, "a number");
            ref(c) = v.get<double>();
          },
          [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); }};
}

template <typename Getter>
Field bool_field(std::string path, Getter ref) {
  return {path,
          [path, ref](RunConfig& c, const json& v) {
            if (!v.is_boolean()) type_error(path, "a boolean");
            ref(c) = v.get<bool>();
          },
          [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); }};
}

double nu_value(MaternNu nu) {
  switch (nu) {
    case MaternNu::kHalf: return 0.5;
    case MaternNu::kOneAndHalf: return 1.5;
    case MaternNu::kTwoAndHalf: return 2.5;
  }
  return 1.5;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = [] {
    std::vector<Field> f;
    f.push_back(int_field("model.vocab_size", [](RunConfig& c) -> int& { return c.model.vocab_size; }));
    f.push_back(int_field("model.horizon", [](RunConfig& c) -> int& { return c.model.horizon; }));
    f.push_back(int_field("model.obs_horizon", [](RunConfig& c) -> int& { return c.model.obs_horizon; }));
    f.push_back(int_field("model.hidden_size", [](RunConfig& c) -> int& { return c.model.hidden_size; }));
    f.push_back(int_field("model.K", [](RunConfig& c) -> int& { return c.model.K; }));
    f.push_back(int_field("model.M", [](RunConfig& c) -> int& { return c.model.M; }));
    f.push_back(int_field("model.N", [](RunConfig& c) -> int& { return c.model.N; }));
    f.push_back(double_field("model.alpha", [](RunConfig& c) -> double& { return c.model.alpha; }));
    f.push_back(double_field("model.beta", [](RunConfig& c) -> double& { return c.model.beta; }));
    f.push_back(double_field("model.gumbel_temperature",
                             [](RunConfig& c) -> double& { return c.model.gumbel_temperature; }));
    f.push_back(double_field("model.dropout", [](RunConfig& c) -> double& { return c.model.dropout; }));
    f.push_back(bool_field("model.straight_through",
                           [](RunConfig& c) -> bool& { return c.model.straight_through; }));
    f.push_back(bool_field("model.stochastic_positions",
                           [](RunConfig& c) -> bool& { return c.model.stochastic_positions; }));
    f.push_back({"model.variant",
                 [](RunConfig& c, const json& v) {
                   if (!v.is_string()) type_error("model.variant", "a string");
                   c.model.variant = variant_from_string(v.get<std::string>());
                 },
                 [](const RunConfig& c) { return json(std::string(to_string(c.model.variant))); }});
    f.push_back(double_field("labels.theta", [](RunConfig& c) -> double& { return c.labels.theta_deg; }));
    f.push_back(double_field("labels.vfast", [](RunConfig& c) -> double& { return c.labels.v_fast; }));
    f.push_back(double_field("labels.vslow", [](RunConfig& c) -> double& { return c.labels.v_slow; }));
    f.push_back(double_field("labels.step_seconds",
                             [](RunConfig& c) -> double& { return c.labels.step_seconds; }));
    f.push_back({"smoother.nu",
                 [](RunConfig& c, const json& v) {
                   if (!v.is_number()) type_error("smoother.nu", "one of 0.5, 1.5, 2.5");
                   const double nu = v.get<double>();
                   if (nu == 0.5) c.smoother.nu = MaternNu::kHalf;
                   else if (nu == 1.5) c.smoother.nu = MaternNu::kOneAndHalf;
                   else if (nu == 2.5) c.smoother.nu = MaternNu::kTwoAndHalf;
                   else type_error("smoother.nu", "one of 0.5, 1.5, 2.5");
                 },
                 [](const RunConfig& c) { return json(nu_value(c.smoother.nu)); }});
    f.push_back(double_field("smoother.alpha", [](RunConfig& c) -> double& { return c.smoother.noise_alpha; }));
    f.push_back(double_field("optimizer.learning_rate",
                             [](RunConfig& c) -> double& { return c.optimizer.learning_rate; }));
    f.push_back(int_field("optimizer.batch_size", [](RunConfig& c) -> int& { return c.optimizer.batch_size; }));
    f.push_back(int_field("optimizer.epochs", [](RunConfig& c) -> int& { return c.optimizer.epochs; }));
    f.push_back(int_field("optimizer.patience", [](RunConfig& c) -> int& { return c.optimizer.patience; }));
    f.push_back(double_field("optimizer.val_fraction",
                             [](RunConfig& c) -> double& { return c.optimizer.val_fraction; }));
    f.push_back(double_field("optimizer.clip_norm",
                             [](RunConfig& c) -> double& { return c.optimizer.clip_norm; }));
    f.push_back(double_field("sampling.nms_threshold",
                             [](RunConfig& c) -> double& { return c.sampling.nms_threshold; }));
    f.push_back(int_field("sampling.runs", [](RunConfig& c) -> int& { return c.sampling.runs; }));
    f.push_back({"seed",
                 [](RunConfig& c, const json& v) {
                   if (!v.is_number_integer() || v.get<long long>() < 0) type_error("seed", "a non-negative integer");
                   c.seed = v.get<std::uint64_t>();
                 },
                 [](const RunConfig& c) { return json(c.seed); }});
    return f;
  }();
  return kFields;
}

const Field& find_field(const std::string& key) {
  const Field* match = nullptr;
  for (const auto& f : fields()) {
    if (f.path == key) return f;
    const auto dot = f.path.rfind('.');
    const std::string leaf = dot == std::string::npos ? f.path : f.path.substr(dot + 1);
    if (leaf == key) {
      if (match) throw Error(ErrorKind::kConfig, "config key '" + key + "' is ambiguous");
      match = &f;
    }
  }
  if (!match) throw Error(ErrorKind::kConfig, "unknown config key '" + key + "'");
  return *match;
}

void apply_object(RunConfig& config, const json& j, const std::string& prefix) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kConfig, "config section '" + (prefix.empty() ? "<root>" : prefix) +
                                        "' must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      bool is_section = false;
      for (const auto& f : fields()) is_section = is_section || f.path.rfind(path + ".", 0) == 0;
      if (!is_section) throw Error(ErrorKind::kConfig, "unknown config key '" + path + "'");
      apply_object(config, value, path);
      continue;
    }
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (f.path == path) field = &f;
    }
    if (!field) throw Error(ErrorKind::kConfig, "unknown config key '" + path + "'");
    field->set(config, value);
  }
}

json to_json_object(const RunConfig& config) {
  json root = json::object();
  for (const auto& f : fields()) {
    json* node = &root;
    std::stringstream ss(f.path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
    (*node)[parts.back()] = f.get(config);
  }
  return root;
}

void finalize(RunConfig& config) {
  if (config.model.variant == Variant::kSingleMode) config.model.vocab_size = 1;
  config.validate();
}

}  // namespace

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorKind::kIo, "cannot open config '" + file->string() + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::kConfig, "config '" + file->string() + "' is not valid JSON");
    apply_object(config, j, "");
  }
  for (const auto& [key, text] : overrides) {
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    find_field(key).set(config, value);
  }
  finalize(config);
  return config;
}

RunConfig config_from_json(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::kConfig, "config is not valid JSON");
  RunConfig config;
  apply_object(config, j, "");
  finalize(config);
  return config;
}

std::string config_to_json(const RunConfig& config) { return to_json_object(config).dump(); }

std::string model_config_to_json(const ModelConfig& config) {
  RunConfig rc;
  rc.model = config;
  return to_json_object(rc)["model"].dump();
}

ModelConfig model_config_from_json(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::kConfig, "model config is not valid JSON");
  RunConfig rc;
  apply_object(rc, json{{"model", j}}, "");
  rc.model.validate();
  return rc.model;
}

}  // namespace hyper
