#include "hyper/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "hyper/rng.hpp"
#include "json_util.hpp"

namespace hyper {

std::string epoch_log_line(const EpochLog& log) {
  detail::json j;
  j["epoch"] = log.epoch;
  j["mle"] = log.train.mle;
  j["coverage"] = log.train.coverage;
  j["regularization"] = log.train.regularization;
  j["total"] = log.train.total;
  j["val_total"] = log.val_total;
  return j.dump();
}

LossBreakdown accumulate_gradients(const SceneRecord& record, PhaModel& model, Rng& rng,
                                   bool training, double weight) {
  ad::Tape tape;
  nn::ForwardContext ctx{tape, training, model.config().dropout, &rng};
  LossGraph loss = build_total_loss(ctx, record, model);
  ad::Var objective = weight == 1.0 ? loss.total : ad::scale(loss.total, weight);
  tape.backward(objective);
  tape.accumulate_parameter_grads();
  return loss.values;
}

namespace {

std::vector<ad::Matrix> snapshot(const PhaModel& model) {
  std::vector<ad::Matrix> out;
  for (const auto* p : model.parameters().all()) out.push_back(p->value);
  return out;
}

void restore(PhaModel& model, const std::vector<ad::Matrix>& values) {
  auto params = model.parameters().all();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

TrainResult train(const std::vector<SceneRecord>& dataset, const ModelConfig& config,
                  const OptimizerSettings& optimizer, std::uint64_t seed,
                  const EpochCallback& on_epoch) {
  config.validate();
  optimizer.validate();
  if (dataset.empty()) throw Error(ErrorKind::kMissingData, "training dataset is empty");

  std::vector<SceneRecord> records;
  records.reserve(dataset.size());
  for (const auto& r : dataset) {
    records.push_back(config.vocab_size == 1 ? collapse_modes(r) : r);
    validate_record(records.back(), config);
  }

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(derive_seed(seed, "train.split"));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(split_rng, i)]);
  const auto n_val = static_cast<std::size_t>(std::floor(optimizer.val_fraction * static_cast<double>(records.size())));
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  if (train_idx.empty()) throw Error(ErrorKind::kMissingData, "no training records after the validation split");

  TrainResult result{PhaModel(config, derive_seed(seed, "init")), {}, 0};
  PhaModel& model = result.model;
  nn::Adam adam(nn::AdamSettings{optimizer.learning_rate, 0.9, 0.999, 1e-8, optimizer.clip_norm});
  Rng shuffle_rng(derive_seed(seed, "train.shuffle"));

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<ad::Matrix> best_params = snapshot(model);
  int since_best = 0;
  std::uint64_t example_counter = 0;

  for (int epoch = 1; epoch <= optimizer.epochs; ++epoch) {
    for (std::size_t i = train_idx.size(); i > 1; --i) {
      std::swap(train_idx[i - 1], train_idx[uniform_index(shuffle_rng, i)]);
    }
    EpochLog log;
    log.epoch = epoch;
    std::size_t counted = 0;
    for (std::size_t b = 0; b < train_idx.size(); b += static_cast<std::size_t>(optimizer.batch_size)) {
      const std::size_t end = std::min(train_idx.size(), b + static_cast<std::size_t>(optimizer.batch_size));
      model.parameters().zero_grad();
      const double weight = 1.0 / static_cast<double>(end - b);
      for (std::size_t i = b; i < end; ++i) {
        Rng rng(derive_seed(seed, "train.example", example_counter++));
        const LossBreakdown l = accumulate_gradients(records[train_idx[i]], model, rng, true, weight);
        if (std::isfinite(l.total)) {
          log.train += l;
          ++counted;
        }
      }
      if (std::isfinite(model.parameters().grad_norm())) adam.step(model.parameters());
    }
    if (counted) log.train /= static_cast<double>(counted);

    if (val.empty()) {
      log.val_total = log.train.total;
    } else {
      double total = 0.0;
      for (std::size_t i = 0; i < val.size(); ++i) {
        Rng rng(derive_seed(seed, "train.val", i));
        total += total_loss(records[val[i]], model, rng, false).total;
      }
      log.val_total = total / static_cast<double>(val.size());
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);

    if (log.val_total < best_val) {
      best_val = log.val_total;
      best_params = snapshot(model);
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= optimizer.patience) {
      break;
    }
  }
  restore(model, best_params);
  return result;
}

}  // namespace hyper
