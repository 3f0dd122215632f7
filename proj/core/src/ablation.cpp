#include "hyper/ablation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>

#include "hyper/checkpoint.hpp"
#include "hyper/config.hpp"
#include "hyper/error.hpp"
#include "hyper/metrics.hpp"
#include "hyper/svg_plot.hpp"
#include "json_util.hpp"

namespace hyper {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kTable1: return "table1";
    case Protocol::kTable2: return "table2";
    case Protocol::kTable4: return "table4";
    case Protocol::kFull: return "full";
  }
  return "?";
}

Protocol protocol_from_string(std::string_view name) {
  for (auto p : {Protocol::kTable1, Protocol::kTable2, Protocol::kTable4, Protocol::kFull}) {
    if (to_string(p) == name) return p;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown protocol '" + std::string(name) + "'");
}

namespace {

struct Sums {
  double ade1 = 0, fde1 = 0, ade = 0, fde = 0, der = 0, nll = 0;
};

std::string safe_name(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s;
}

SampleSet forced_mode_samples(const SceneRecord& record, const PhaModel& model, Rng& rng, int count) {
  SampleSet set;
  for (int z = 0; z < count; ++z) {
    RolloutOptions opts;
    opts.forced_mode = ModeId{z};
    set.sequences.push_back(rollout(record, model, rng, set.sequences, opts));
    set.generation_order.push_back(static_cast<std::size_t>(z));
  }
  return set;
}

SampleSet prefix(const SampleSet& set, int m) {
  SampleSet out;
  out.sequences.assign(set.sequences.begin(), set.sequences.begin() + m);
  out.generation_order.assign(set.generation_order.begin(), set.generation_order.begin() + m);
  return out;
}

}  // namespace

std::vector<EvalReport> evaluate_cells(const std::vector<SceneRecord>& scenes, const PhaModel& model,
                                       const std::vector<EvalCell>& cells, int runs,
                                       std::uint64_t seed,
                                       const std::optional<std::filesystem::path>& plot_dir,
                                       int plot_scenes) {
  if (scenes.empty()) throw Error(ErrorKind::kMissingData, "evaluation dataset is empty");
  if (runs < 1) throw Error(ErrorKind::kInvalidArgument, "runs must be >= 1");
  const ModelConfig& cfg = model.config();
  const int vocab = cfg.vocab_size;
  int max_m = 0;
  for (const auto& c : cells) {
    if (c.N < 1 || (!c.forced_modes && c.M < c.N)) {
      throw Error(ErrorKind::kInvalidArgument, "cell " + c.method + " needs 1 <= N <= M");
    }
    if (c.forced_modes && c.N > vocab) {
      throw Error(ErrorKind::kInvalidArgument, "fixed-mode cell needs N <= vocab size");
    }
    if (!c.forced_modes) max_m = std::max(max_m, c.M);
  }
  std::vector<SceneRecord> records;
  records.reserve(scenes.size());
  for (const auto& s : scenes) {
    records.push_back(vocab == 1 ? collapse_modes(s) : s);
    validate_record(records.back(), cfg);
  }
  const int h = cfg.horizon;
  const int h1 = std::min(10, h);

  std::vector<Sums> sums(cells.size());
  for (int run = 0; run < runs; ++run) {
    for (std::size_t si = 0; si < records.size(); ++si) {
      const auto& rec = records[si];
      const std::uint64_t stream = static_cast<std::uint64_t>(run) * 1000003ULL + si;
      SampleSet adaptive;
      if (max_m > 0) {
        Rng gen(derive_seed(seed, "eval.generate", stream));
        adaptive = generate_samples(rec, model, gen, max_m);
      }
      std::optional<SampleSet> fixed;
      for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const auto& cell = cells[ci];
        SelectionResult sel;
        if (cell.forced_modes) {
          if (!fixed) {
            Rng gen(derive_seed(seed, "eval.generate.fixed", stream));
            fixed = forced_mode_samples(rec, model, gen, cell.N);
          }
          sel = select_most_likely(prefix(*fixed, cell.N), static_cast<std::size_t>(cell.N));
        } else {
          Rng pick(derive_seed(seed, "eval.select." + cell.method + "." + std::to_string(cell.M), stream));
          sel = select(prefix(adaptive, cell.M), cell.selection, static_cast<std::size_t>(cell.N),
                       cell.nms_threshold, pick);
        }
        const auto d1 = min_ade_fde(sel.selected, rec.future, h1);
        const auto d3 = min_ade_fde(sel.selected, rec.future, h);
        auto& acc = sums[ci];
        acc.ade1 += d1.min_ade;
        acc.fde1 += d1.min_fde;
        acc.ade += d3.min_ade;
        acc.fde += d3.min_fde;
        acc.der += min_der(sel.selected, rec.future_modes);
        acc.nll += nll(sel, rec.future);

        if (plot_dir && run == 0 && static_cast<int>(si) < plot_scenes) {
          std::filesystem::create_directories(*plot_dir);
          const std::string label = std::string(to_string(cfg.variant)) + "_" + cell.method + "_M" +
                                    std::to_string(cell.M) + "_N" + std::to_string(cell.N);
          PlotOptions po;
          po.title = rec.scene_id + "  " + label;
          write_scene_svg(*plot_dir / (safe_name(label + "_" + rec.scene_id) + ".svg"), rec, sel.selected, po);
        }
      }
    }
  }

  std::vector<EvalReport> out;
  const double denom = static_cast<double>(runs) * static_cast<double>(records.size());
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    EvalReport r;
    r.model = std::string(to_string(cfg.variant));
    r.method = cells[ci].method;
    r.M = cells[ci].forced_modes ? cells[ci].N : cells[ci].M;
    r.N = cells[ci].N;
    r.n_scenes = static_cast<int>(records.size());
    r.n_runs = runs;
    r.min_ade_1s = sums[ci].ade1 / denom;
    r.min_fde_1s = sums[ci].fde1 / denom;
    r.min_ade = sums[ci].ade / denom;
    r.min_fde = sums[ci].fde / denom;
    r.min_der = sums[ci].der / denom;
    r.nll = sums[ci].nll / denom;
    out.push_back(r);
  }
  return out;
}

std::string report_line(const EvalReport& row, const std::string& config_json, std::uint64_t seed) {
  detail::json j;
  j["model"] = row.model;
  j["method"] = row.method;
  j["M"] = row.M;
  j["N"] = row.N;
  j["n_scenes"] = row.n_scenes;
  j["n_runs"] = row.n_runs;
  j["min_ade_1s"] = row.min_ade_1s;
  j["min_fde_1s"] = row.min_fde_1s;
  j["min_ade_3s"] = row.min_ade;
  j["min_fde_3s"] = row.min_fde;
  j["min_der"] = row.min_der;
  j["nll"] = row.nll;
  j["seed"] = seed;
  detail::json cfg = detail::parse_object_or_null(config_json);
  if (!cfg.is_null()) j["config"] = cfg;
  return j.dump();
}

std::string markdown_table(const std::vector<EvalReport>& rows) {
  std::string out =
      "| model | method | M | N | minADE@1s | minFDE@1s | minADE@3s | minFDE@3s | minDER | NLL |\n"
      "|---|---|---|---|---|---|---|---|---|---|\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "| %s | %s | %d | %d | %.3f | %.3f | %.3f | %.3f | %.3f | %.2f |\n",
                  r.model.c_str(), r.method.c_str(), r.M, r.N, r.min_ade_1s, r.min_fde_1s, r.min_ade,
                  r.min_fde, r.min_der, r.nll);
    out += buf;
  }
  return out;
}

namespace {

const PhaModel& require(const std::vector<const PhaModel*>& models, Variant v) {
  for (const auto* m : models) {
    if (m && m->config().variant == v) return *m;
  }
  throw Error(ErrorKind::kMissingCheckpoint,
              "protocol needs a checkpoint of variant '" + std::string(to_string(v)) + "'");
}

EvalCell cell(std::string method, SelectionMethod sel, int M, int N, double thr = 2.0) {
  EvalCell c;
  c.method = std::move(method);
  c.selection = sel;
  c.M = M;
  c.N = N;
  c.nms_threshold = thr;
  return c;
}

std::string threshold_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "nms-%gm", t);
  return buf;
}

}  // namespace

AblationResult run_ablation(const std::vector<SceneRecord>& dataset,
                            const std::vector<const PhaModel*>& models, Protocol protocol,
                            const AblationOptions& options) {
  if (dataset.empty()) throw Error(ErrorKind::kMissingData, "evaluation dataset is empty");
  if (models.empty()) throw Error(ErrorKind::kMissingCheckpoint, "no checkpoints given");
  AblationResult result;
  std::optional<std::filesystem::path> plots;
  if (options.out_dir) plots = *options.out_dir / "plots";
  auto run = [&](const PhaModel& m, const std::vector<EvalCell>& cells) {
    auto rows = evaluate_cells(dataset, m, cells, options.runs, options.seed, plots, options.plot_scenes);
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  };

  switch (protocol) {
    case Protocol::kTable1: {
      for (Variant v : {Variant::kTransitionOnly, Variant::kNonAdaptiveProposal, Variant::kFull}) {
        const PhaModel& m = require(models, v);
        const int n = m.config().N;
        run(m, {cell("all", SelectionMethod::kMostLikely, n, n)});
      }
      break;
    }
    case Protocol::kTable2: {
      const PhaModel& m = require(models, Variant::kFull);
      const int n = m.config().N;
      std::vector<int> ms{n, 30, m.config().M};
      std::sort(ms.begin(), ms.end());
      ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
      std::vector<EvalCell> cells;
      for (int M : ms) {
        if (M < n) continue;
        cells.push_back(cell("fps", SelectionMethod::kFps, M, n));
        for (double t : options.nms_thresholds) {
          cells.push_back(cell(threshold_label(t), SelectionMethod::kNms, M, n, t));
        }
        cells.push_back(cell("most_likely", SelectionMethod::kMostLikely, M, n));
        cells.push_back(cell("random", SelectionMethod::kRandom, M, n));
      }
      run(m, cells);
      break;
    }
    case Protocol::kTable4: {
      const PhaModel& m = require(models, Variant::kFull);
      const int n = std::min(5, m.config().vocab_size);
      EvalCell fixed = cell("fixed_mode", SelectionMethod::kMostLikely, n, n);
      fixed.forced_modes = true;
      run(m, {fixed, cell("fps", SelectionMethod::kFps, m.config().M, n)});
      break;
    }
    case Protocol::kFull: {
      for (const auto* m : models) {
        const auto& c = m->config();
        if (c.variant == Variant::kFixedModeBaseline) {
          EvalCell fixed = cell("fixed_mode", SelectionMethod::kMostLikely, c.vocab_size,
                                std::min(c.N, c.vocab_size));
          fixed.forced_modes = true;
          run(*m, {fixed});
        } else {
          run(*m, {cell("fps", SelectionMethod::kFps, c.M, c.N)});
        }
      }
      break;
    }
  }

  result.markdown = markdown_table(result.rows);
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    std::ofstream jl(*options.out_dir / "report.jsonl");
    std::ofstream md(*options.out_dir / "report.md");
    if (!jl || !md) throw Error(ErrorKind::kIo, "cannot write report in " + options.out_dir->string());
    for (const auto& r : result.rows) jl << report_line(r, options.config_json, options.seed) << "\n";
    md << "# " << to_string(protocol) << "\n\n" << result.markdown;
  }
  return result;
}

AblationResult run_ablation(const std::vector<SceneRecord>& dataset,
                            const std::vector<std::filesystem::path>& checkpoints,
                            Protocol protocol, const AblationOptions& options) {
  if (dataset.empty()) throw Error(ErrorKind::kMissingData, "evaluation dataset is empty");
  std::vector<std::unique_ptr<PhaModel>> owned;
  std::vector<const PhaModel*> models;
  for (const auto& p : checkpoints) {
    owned.push_back(std::make_unique<PhaModel>(load_checkpoint(p, std::nullopt)));
    models.push_back(owned.back().get());
  }
  return run_ablation(dataset, models, protocol, options);
}

}  // namespace hyper
