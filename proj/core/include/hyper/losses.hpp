#pragma once

#include <vector>

#include <Eigen/Core>

#include "hyper/model.hpp"
#include "hyper/nn.hpp"

namespace hyper {

struct LossBreakdown {
  /// Negated teacher-forced log-likelihood.
  double mle = 0.0;
  /// Min-of-K summed squared position error.
  double coverage = 0.0;
  /// Squared L2 distance between transition and proposal logits.
  double regularization = 0.0;
  /// mle + alpha * coverage + beta * regularization.
  double total = 0.0;

  LossBreakdown& operator+=(const LossBreakdown& o);
  LossBreakdown& operator/=(double d);
};

/// min over samples of sum_t ||x_t - o_t||^2. Throws on empty input or a
/// length mismatch.
double coverage_loss(const std::vector<std::vector<Vec2>>& samples,
                     const std::vector<Vec2>& ground_truth);

/// sum over steps of ||T_t - Q_t||^2. Throws Error(kDimensionMismatch) on a
/// shape mismatch.
double regularization_loss(const std::vector<Eigen::VectorXd>& transition_logits,
                           const std::vector<Eigen::VectorXd>& proposal_logits);

/// Which terms a variant trains with.
struct LossTerms {
  bool mle = true;
  bool coverage = true;
  bool regularization = true;
};
LossTerms loss_terms(const ModelConfig& config);

struct LossGraph {
  ad::Var total;
  LossBreakdown values;
};

/// Builds the joint objective on `ctx.tape`: teacher-forced MLE plus K
/// sequential proposal rollouts for the coverage and regularization terms.
/// The regularization term is averaged over the K rollouts.
LossGraph build_total_loss(const nn::ForwardContext& ctx, const SceneRecord& record,
                           const PhaModel& model);

/// Value-only evaluation. `training` enables dropout.
LossBreakdown total_loss(const SceneRecord& record, const PhaModel& model, Rng& rng,
                         bool training = false);

}  // namespace hyper
