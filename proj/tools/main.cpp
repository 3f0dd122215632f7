// hyper: synthetic data, training, sampling and evaluation of the hybrid
// trajectory predictor.

#include <cstdio>
#include <fstream>
#include <map>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "hyper/ablation.hpp"
#include "hyper/checkpoint.hpp"
#include "hyper/config.hpp"
#include "hyper/dataset_io.hpp"
#include "hyper/error.hpp"
#include "hyper/labeling.hpp"
#include "hyper/selection.hpp"
#include "hyper/svg_plot.hpp"
#include "hyper/synthetic.hpp"
#include "hyper/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct Common {
  std::optional<fs::path> config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--set", c.sets, "Config override key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Global seed");
}

hyper::RunConfig resolve(const Common& c, Overrides extra) {
  Overrides all;
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw hyper::Error(hyper::ErrorKind::kConfig, "override '" + s + "' is not key=value");
    }
    all.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  // Dedicated flags win over --set.
  for (auto& e : extra) all.push_back(std::move(e));
  if (c.seed) all.emplace_back("seed", std::to_string(*c.seed));
  return hyper::load_config(c.config, all);
}

template <typename T>
void flag_override(Overrides& out, const char* key, const std::optional<T>& v) {
  if (!v) return;
  out.emplace_back(key, json(*v).dump());
}

std::string provenance(const char* command, const hyper::RunConfig& cfg, json extra = json::object()) {
  json j;
  j["command"] = command;
  j["seed"] = cfg.seed;
  j["config"] = json::parse(hyper::config_to_json(cfg));
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j.dump();
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw hyper::Error(hyper::ErrorKind::kIo, "cannot write " + p.string());
  return out;
}

json sequence_json(const hyper::HybridSequence& s, double probability) {
  json modes = json::array(), pos = json::array();
  for (const auto& st : s.steps) {
    modes.push_back(st.mode.value);
    pos.push_back({st.position.x(), st.position.y()});
  }
  return {{"modes", modes},
          {"positions", pos},
          {"probability", probability},
          {"log_likelihood", s.log_likelihood.value_or(0.0)}};
}

std::vector<hyper::HybridSequence> sequences_from_json(const json& arr) {
  std::vector<hyper::HybridSequence> out;
  for (const auto& s : arr) {
    hyper::HybridSequence seq;
    const auto& modes = s.at("modes");
    const auto& pos = s.at("positions");
    for (std::size_t t = 0; t < pos.size(); ++t) {
      seq.steps.push_back({hyper::ModeId{modes.at(t).get<int>()},
                           hyper::Vec2(pos[t].at(0).get<double>(), pos[t].at(1).get<double>())});
    }
    if (s.contains("log_likelihood")) seq.log_likelihood = s["log_likelihood"].get<double>();
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("hyper"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Hybrid trajectory prediction toolkit"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  // generate
  Common gen_c;
  int gen_count = 1000;
  std::string gen_mix;
  fs::path gen_out;
  double gen_noise = 0.0;
  auto* gen = app.add_subcommand("generate", "Generate synthetic scenes");
  add_common(gen, gen_c);
  gen->add_option("--count", gen_count, "Number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--mix", gen_mix, "Scenario mix, e.g. lane_follow=0.4,decelerate_to_stop=0.6");
  gen->add_option("--noise", gen_noise, "Position noise std-dev in meters");
  gen->add_option("--out", gen_out, "Output dataset (JSON lines)")->required();

  // label
  Common lab_c;
  fs::path lab_in, lab_out;
  std::optional<double> lab_theta, lab_vfast, lab_vslow;
  auto* lab = app.add_subcommand("label", "Recompute future mode labels");
  add_common(lab, lab_c);
  lab->add_option("--in", lab_in)->required();
  lab->add_option("--out", lab_out)->required();
  lab->add_option("--theta", lab_theta, "Turn threshold in degrees per step");
  lab->add_option("--vfast", lab_vfast, "Fast speed threshold (m/s)");
  lab->add_option("--vslow", lab_vslow, "Slow speed threshold (m/s)");

  // perturb
  Common per_c;
  fs::path per_in, per_out;
  double per_fraction = 0.05;
  auto* per = app.add_subcommand("perturb", "Randomly corrupt a fraction of mode labels");
  add_common(per, per_c);
  per->add_option("--in", per_in)->required();
  per->add_option("--out", per_out)->required();
  per->add_option("--fraction", per_fraction)->check(CLI::Range(0.0, 1.0));

  // train
  Common tr_c;
  fs::path tr_data, tr_ckpt;
  std::optional<fs::path> tr_log;
  std::optional<int> tr_epochs;
  std::optional<std::string> tr_variant;
  auto* tr = app.add_subcommand("train", "Train a model");
  add_common(tr, tr_c);
  tr->add_option("--data", tr_data)->required();
  tr->add_option("--out-checkpoint", tr_ckpt)->required();
  tr->add_option("--epochs", tr_epochs);
  tr->add_option("--variant", tr_variant);
  tr->add_option("--log", tr_log, "Epoch log file (JSON lines); stdout by default");

  // sample
  Common sa_c;
  fs::path sa_ckpt, sa_data, sa_out;
  std::optional<int> sa_M, sa_N;
  std::string sa_method = "fps";
  std::optional<double> sa_thr;
  auto* sa = app.add_subcommand("sample", "Generate and select predictions");
  add_common(sa, sa_c);
  sa->add_option("--checkpoint", sa_ckpt)->required();
  sa->add_option("--data", sa_data)->required();
  sa->add_option("--M", sa_M);
  sa->add_option("--N", sa_N);
  sa->add_option("--method", sa_method)->check(CLI::IsMember({"fps", "nms", "most_likely", "random"}));
  sa->add_option("--nms-threshold", sa_thr);
  sa->add_option("--out", sa_out)->required();

  // eval
  Common ev_c;
  std::vector<fs::path> ev_ckpts;
  fs::path ev_data, ev_dir;
  std::string ev_protocol = "full";
  std::optional<int> ev_runs;
  auto* ev = app.add_subcommand("eval", "Run an evaluation protocol");
  add_common(ev, ev_c);
  ev->add_option("--checkpoint", ev_ckpts, "Checkpoint (repeatable)")->required();
  ev->add_option("--data", ev_data)->required();
  ev->add_option("--protocol", ev_protocol)->check(CLI::IsMember({"table1", "table2", "table4", "full"}));
  ev->add_option("--out-dir", ev_dir)->required();
  ev->add_option("--runs", ev_runs, "Repetitions averaged per row");

  // plot
  fs::path pl_data, pl_dir;
  std::optional<fs::path> pl_pred;
  int pl_count = 10;
  auto* pl = app.add_subcommand("plot", "Render scenes and predictions as SVG");
  pl->add_option("--data", pl_data)->required();
  pl->add_option("--predictions", pl_pred, "Output of the sample command");
  pl->add_option("--count", pl_count)->check(CLI::NonNegativeNumber);
  pl->add_option("--out-dir", pl_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::fprintf(stderr, "error: usage: %s\n", msg.c_str());
    return 2;
  }
  if (quiet) spdlog::set_level(spdlog::level::warn);

  try {
    if (*gen) {
      auto cfg = resolve(gen_c, {});
      hyper::SyntheticOptions opts;
      opts.obs_horizon = cfg.model.obs_horizon;
      opts.horizon = cfg.model.horizon;
      opts.noise_std = gen_noise;
      opts.thresholds = cfg.labels;
      opts.smoother = cfg.smoother;
      const auto mix = gen_mix.empty() ? hyper::default_mix() : hyper::parse_mix(gen_mix);
      const auto records = hyper::generate_synthetic(gen_count, hyper::derive_seeds(cfg.seed).data, mix, opts);
      hyper::write_dataset(records, gen_out,
                           provenance("generate", cfg, {{"count", gen_count},
                                                        {"mix", hyper::format_mix(mix)},
                                                        {"noise", gen_noise}}));
      spdlog::info("wrote {} scenes to {}", records.size(), gen_out.string());
    } else if (*lab) {
      Overrides o;
      flag_override(o, "labels.theta", lab_theta);
      flag_override(o, "labels.vfast", lab_vfast);
      flag_override(o, "labels.vslow", lab_vslow);
      auto cfg = resolve(lab_c, o);
      auto records = hyper::read_dataset(lab_in);
      for (auto& r : records) r.future_modes = hyper::label_future(r.observed, r.future, cfg.labels);
      hyper::write_dataset(records, lab_out, provenance("label", cfg, {{"input", lab_in.string()}}));
      spdlog::info("labeled {} scenes", records.size());
    } else if (*per) {
      auto cfg = resolve(per_c, {});
      auto records = hyper::perturb_labels(hyper::read_dataset(per_in), per_fraction,
                                           hyper::derive_seed(cfg.seed, "perturb"), cfg.model.vocab_size);
      hyper::write_dataset(records, per_out,
                           provenance("perturb", cfg, {{"input", per_in.string()}, {"fraction", per_fraction}}));
      spdlog::info("perturbed {} scenes", records.size());
    } else if (*tr) {
      Overrides o;
      flag_override(o, "optimizer.epochs", tr_epochs);
      flag_override(o, "model.variant", tr_variant);
      auto cfg = resolve(tr_c, o);
      const auto data = hyper::read_dataset(tr_data);
      std::ofstream log_file;
      if (tr_log) log_file = open_out(*tr_log);
      std::ostream& log = tr_log ? static_cast<std::ostream&>(log_file) : std::cout;
      spdlog::info("training {} on {} scenes", hyper::to_string(cfg.model.variant), data.size());
      auto result = hyper::train(data, cfg.model, cfg.optimizer, cfg.seed, [&](const hyper::EpochLog& e) {
        log << hyper::epoch_log_line(e) << std::endl;
      });
      hyper::save_checkpoint(result.model, tr_ckpt,
                             provenance("train", cfg, {{"data", tr_data.string()}, {"best_epoch", result.best_epoch}}));
      spdlog::info("best epoch {}; checkpoint {}", result.best_epoch, tr_ckpt.string());
    } else if (*sa) {
      Overrides o;
      flag_override(o, "model.M", sa_M);
      flag_override(o, "model.N", sa_N);
      flag_override(o, "sampling.nms_threshold", sa_thr);
      auto cfg = resolve(sa_c, o);
      auto model = hyper::load_checkpoint(sa_ckpt);
      const auto data = hyper::read_dataset(sa_data);
      if (data.empty()) throw hyper::Error(hyper::ErrorKind::kMissingData, "dataset is empty");
      const auto method = hyper::selection_method_from_string(sa_method);
      const auto seeds = hyper::derive_seeds(cfg.seed);
      auto out = open_out(sa_out);
      json meta = json::parse(provenance("sample", cfg, {{"checkpoint", sa_ckpt.string()}, {"method", sa_method}}));
      out << json{{"meta", meta}}.dump() << "\n";
      for (std::size_t i = 0; i < data.size(); ++i) {
        auto rec = model.config().vocab_size == 1 ? hyper::collapse_modes(data[i]) : data[i];
        hyper::validate_record(rec, model.config());
        hyper::Rng gen(hyper::derive_seed(seeds.rollout, "sample", i));
        hyper::Rng pick(hyper::derive_seed(seeds.selection, "sample", i));
        const auto set = hyper::generate_samples(rec, model, gen, cfg.model.M);
        const auto sel = hyper::select(set, method, static_cast<std::size_t>(cfg.model.N),
                                       cfg.sampling.nms_threshold, pick);
        json seqs = json::array();
        for (std::size_t k = 0; k < sel.selected.size(); ++k) {
          seqs.push_back(sequence_json(sel.selected[k], sel.probabilities[k]));
        }
        out << json{{"scene_id", rec.scene_id}, {"sequences", seqs}}.dump() << "\n";
      }
      spdlog::info("wrote predictions for {} scenes to {}", data.size(), sa_out.string());
    } else if (*ev) {
      Overrides o;
      flag_override(o, "sampling.runs", ev_runs);
      auto cfg = resolve(ev_c, o);
      hyper::AblationOptions opts;
      opts.seed = hyper::derive_seeds(cfg.seed).rollout;
      opts.runs = cfg.sampling.runs;
      opts.out_dir = ev_dir;
      opts.config_json = hyper::config_to_json(cfg);
      const auto data = hyper::read_dataset(ev_data);
      const auto result = hyper::run_ablation(data, ev_ckpts, hyper::protocol_from_string(ev_protocol), opts);
      std::cout << result.markdown;
      spdlog::info("report written to {}", ev_dir.string());
    } else if (*pl) {
      const auto data = hyper::read_dataset(pl_data);
      std::map<std::string, std::vector<hyper::HybridSequence>> preds;
      if (pl_pred) {
        std::ifstream in(*pl_pred);
        if (!in) throw hyper::Error(hyper::ErrorKind::kIo, "cannot read " + pl_pred->string());
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
          ++n;
          if (line.empty()) continue;
          json j = json::parse(line, nullptr, false);
          if (j.is_discarded()) {
            throw hyper::Error(hyper::ErrorKind::kMalformedLine,
                               pl_pred->string() + ":" + std::to_string(n) + ": malformed line");
          }
          if (j.contains("meta")) continue;
          try {
            preds[j.at("scene_id").get<std::string>()] = sequences_from_json(j.at("sequences"));
          } catch (const json::exception& e) {
            throw hyper::Error(hyper::ErrorKind::kMalformedLine,
                               pl_pred->string() + ":" + std::to_string(n) + ": " + e.what());
          }
        }
      }
      fs::create_directories(pl_dir);
      int written = 0;
      for (const auto& r : data) {
        if (written >= pl_count) break;
        hyper::PlotOptions po;
        po.title = r.scene_id;
        auto it = preds.find(r.scene_id);
        hyper::write_scene_svg(pl_dir / (r.scene_id + ".svg"), r,
                               it == preds.end() ? std::vector<hyper::HybridSequence>{} : it->second, po);
        ++written;
      }
      spdlog::info("wrote {} plots to {}", written, pl_dir.string());
    }
  } catch (const hyper::Error& e) {
    std::string msg = e.what();
    for (char& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::fprintf(stderr, "error: %s: %s\n", std::string(hyper::to_string(e.kind())).c_str(), msg.c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
