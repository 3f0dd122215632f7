#include "hyper/losses.hpp"

#include <cmath>
#include <limits>

namespace hyper {

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  mle += o.mle;
  coverage += o.coverage;
  regularization += o.regularization;
  total += o.total;
  return *this;
}

LossBreakdown& LossBreakdown::operator/=(double d) {
  mle /= d;
  coverage /= d;
  regularization /= d;
  total /= d;
  return *this;
}

double coverage_loss(const std::vector<std::vector<Vec2>>& samples,
                     const std::vector<Vec2>& ground_truth) {
  if (samples.empty()) throw Error(ErrorKind::kInvalidArgument, "coverage_loss needs at least one sample");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (s.size() != ground_truth.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "sample length differs from ground truth");
    }
    double err = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) err += (s[t] - ground_truth[t]).squaredNorm();
    best = std::min(best, err);
  }
  return best;
}

double regularization_loss(const std::vector<Eigen::VectorXd>& transition_logits,
                           const std::vector<Eigen::VectorXd>& proposal_logits) {
  if (transition_logits.size() != proposal_logits.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "logit sequences differ in length");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < transition_logits.size(); ++t) {
    if (transition_logits[t].size() != proposal_logits[t].size()) {
      throw Error(ErrorKind::kDimensionMismatch, "logit vectors differ in size");
    }
    total += (transition_logits[t] - proposal_logits[t]).squaredNorm();
  }
  return total;
}

LossTerms loss_terms(const ModelConfig& config) {
  LossTerms terms;
  switch (config.variant) {
    case Variant::kTransitionOnly:
      terms.coverage = false;
      terms.regularization = false;
      break;
    case Variant::kCoverageOnly:
      terms.mle = false;
      terms.regularization = false;
      break;
    default:
      break;
  }
  if (config.alpha == 0.0) terms.coverage = false;
  if (config.beta == 0.0) terms.regularization = false;
  return terms;
}

namespace {

ad::Matrix column(const Vec2& v) {
  ad::Matrix m(2, 1);
  m << v.x(), v.y();
  return m;
}

}  // namespace

LossGraph build_total_loss(const nn::ForwardContext& ctx, const SceneRecord& record,
                           const PhaModel& model) {
  const ModelConfig& cfg = model.config();
  const LossTerms terms = loss_terms(cfg);
  ad::Tape& tape = ctx.tape;
  const auto start = model.encode_graph(ctx, record);
  const double log_2pi = std::log(2.0 * M_PI);

  LossGraph out;
  std::vector<ad::Var> total_parts;

  if (terms.mle) {
    std::vector<ad::Var> nll_terms;
    auto carry = start;
    for (int t = 0; t < cfg.horizon; ++t) {
      PhaModel::StepRequest req;
      req.kind = PhaModel::StepKind::kTeacher;
      req.mode = record.future_modes[static_cast<std::size_t>(t)];
      req.teacher_position = record.future[static_cast<std::size_t>(t)];
      auto step = model.decode_step_graph(ctx, carry, req);
      ad::Var log_p_mode = ad::pick(ad::log_softmax(step.transition_logits), req.mode.value);
      ad::Var sq = ad::squared_norm(ad::sub(step.next.position, step.mean));
      // -log N(o; mean, I) = log(2 pi) + |o - mean|^2 / 2
      nll_terms.push_back(ad::sub(ad::scale(sq, 0.5), log_p_mode));
      carry = step.next;
    }
    ad::Var mle = ad::sum(ad::concat_rows(nll_terms));
    mle = ad::add(mle, tape.constant(ad::Matrix::Constant(1, 1, log_2pi * cfg.horizon)));
    out.values.mle = mle.scalar();
    total_parts.push_back(mle);
  }

  if (terms.coverage || terms.regularization) {
    std::vector<ad::Var> sample_errors;
    std::vector<ad::Var> reg_terms;
    std::vector<ad::Var> completed;
    for (int k = 0; k < cfg.K; ++k) {
      ad::Var prev = model.previous_samples_graph(ctx, completed);
      auto carry = start;
      std::vector<ad::Var> positions;
      std::vector<ad::Var> errors;
      for (int t = 0; t < cfg.horizon; ++t) {
        PhaModel::StepRequest req;
        req.kind = PhaModel::StepKind::kProposal;
        req.previous_samples = prev;
        req.position_noise = cfg.stochastic_positions;
        auto step = model.decode_step_graph(ctx, carry, req);
        positions.push_back(step.next.position);
        errors.push_back(ad::squared_norm(ad::sub(
            step.next.position, tape.constant(column(record.future[static_cast<std::size_t>(t)])))));
        if (terms.regularization) {
          reg_terms.push_back(ad::squared_norm(ad::sub(step.transition_logits, step.proposal_logits)));
        }
        carry = step.next;
      }
      sample_errors.push_back(ad::sum(ad::concat_rows(errors)));
      completed.push_back(ad::concat_rows(positions));
    }
    if (terms.coverage) {
      ad::Var cov = ad::min_of(sample_errors);
      out.values.coverage = cov.scalar();
      total_parts.push_back(ad::scale(cov, cfg.alpha));
    }
    if (terms.regularization) {
      ad::Var reg = ad::scale(ad::sum(ad::concat_rows(reg_terms)), 1.0 / cfg.K);
      out.values.regularization = reg.scalar();
      total_parts.push_back(ad::scale(reg, cfg.beta));
    }
  }

  out.total = ad::sum(ad::concat_rows(total_parts));
  out.values.total = out.total.scalar();
  return out;
}

LossBreakdown total_loss(const SceneRecord& record, const PhaModel& model, Rng& rng, bool training) {
  ad::Tape tape;
  nn::ForwardContext ctx{tape, training, model.config().dropout, &rng};
  return build_total_loss(ctx, record, model).values;
}

}  // namespace hyper
