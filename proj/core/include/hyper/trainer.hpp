#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hyper/config.hpp"
#include "hyper/losses.hpp"
#include "hyper/model.hpp"

namespace hyper {

struct EpochLog {
  int epoch = 0;
  /// Mean training losses over the epoch.
  LossBreakdown train;
  /// Mean validation total loss (training mean when there is no split).
  double val_total = 0.0;
};

/// One JSON line: epoch, mle, coverage, regularization, total, val_total.
std::string epoch_log_line(const EpochLog& log);

struct TrainResult {
  PhaModel model;
  std::vector<EpochLog> log;
  /// Epoch whose parameters were kept (lowest validation total).
  int best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Adam on the joint loss with mini-batches, a seeded train/validation
/// split and early stopping on the validation total. Labels are collapsed to
/// mode 0 for single-vocabulary configs. Throws Error(kMissingData) on an
/// empty dataset.
TrainResult train(const std::vector<SceneRecord>& dataset, const ModelConfig& config,
                  const OptimizerSettings& optimizer, std::uint64_t seed,
                  const EpochCallback& on_epoch = {});

/// Accumulates d(total)/d(params) for one record into the parameter grads
/// and returns the loss values.
LossBreakdown accumulate_gradients(const SceneRecord& record, PhaModel& model, Rng& rng,
                                   bool training, double weight = 1.0);

}  // namespace hyper
