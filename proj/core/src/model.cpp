#include "hyper/model.hpp"

#include <cmath>

#include "hyper/labeling.hpp"

namespace hyper {

namespace {

constexpr double kPositionScale = 0.1;
constexpr Eigen::Index kPointFeatures = 4;
constexpr Eigen::Index kStateFeatures = 4;  // scaled position + displacement

ad::Matrix column(const Vec2& v) {
  ad::Matrix m(2, 1);
  m << v.x(), v.y();
  return m;
}

ad::Matrix one_hot(int size, int index) {
  ad::Matrix m = ad::Matrix::Zero(size, 1);
  m(index, 0) = 1.0;
  return m;
}

Vec2 to_vec2(const ad::Matrix& m) { return Vec2(m(0, 0), m(1, 0)); }

}  // namespace

double unit_gaussian_log_density(const Vec2& x, const Vec2& mean) {
  return -std::log(2.0 * M_PI) - 0.5 * (x - mean).squaredNorm();
}

PhaModel::PhaModel(ModelConfig config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  Rng rng(init_seed);
  const Eigen::Index w = config_.hidden_size;
  const Eigen::Index z = config_.vocab_size;
  const bool linear = config_.variant == Variant::kLinearDecoder;

  path_net_ = nn::Mlp::create(store_, "encoder.path", kStateFeatures, w, w, rng);
  map_node_ = nn::Dense::create(store_, "encoder.map.node", kPointFeatures, w, rng);
  map_line_ = nn::Dense::create(store_, "encoder.map.line", w, w, rng);
  attn_query_ = nn::Dense::create(store_, "encoder.map.attention.query", w, w, rng);
  attn_key_ = nn::Dense::create(store_, "encoder.map.attention.key", w, w, rng);
  attn_value_ = nn::Dense::create(store_, "encoder.map.attention.value", w, w, rng);
  attn_pool_ = nn::Dense::create(store_, "encoder.map.attention.pool", w, 1, rng);
  encoder_lstm_ = nn::Dense::create(store_, "encoder.lstm", 2 * w + w, 4 * w, rng);
  encoder_lstm_.bias->value.middleRows(w, w).setOnes();

  const Eigen::Index decoder_in = kStateFeatures + z + w;
  decoder_cell_ = nn::Dense::create(store_, "decoder.cell", decoder_in, linear ? w : 4 * w, rng);
  if (!linear) decoder_cell_.bias->value.middleRows(w, w).setOnes();
  transition_ = nn::Mlp::create(store_, "decoder.transition", w, w, z, rng, linear);
  proposal_ = nn::Mlp::create(store_, "decoder.proposal", z + w + w, w, z, rng, linear);
  dynamics_ = nn::Mlp::create(store_, "decoder.dynamics", w + z, w, 2, rng, linear);
  // Start from constant-velocity extrapolation.
  dynamics_.output.weight->value *= 0.1;
  dynamics_.output.bias->value.setZero();
  sample_encoder_ = nn::Dense::create(store_, "decoder.samples.encoder", 2 * config_.horizon, w, rng);
  sample_pool_ = nn::Dense::create(store_, "decoder.samples.pool", w, w, rng);
}

ModeId PhaModel::initial_mode(const SceneRecord& record) const {
  if (config_.vocab_size == 1 || record.observed.size() < 2) return ModeId{0};
  const auto labels = auto_label(record.observed, LabelThresholds{});
  const ModeId m = labels.back();
  return m.value < config_.vocab_size ? m : ModeId{0};
}

ad::Var PhaModel::encode_map(const nn::ForwardContext& ctx,
                             const std::vector<Polyline>& centerlines) const {
  ad::Tape& tape = ctx.tape;
  const Eigen::Index w = config_.hidden_size;
  std::vector<ad::Var> lines;
  for (const auto& line : centerlines) {
    if (line.empty()) continue;
    ad::Matrix feats(kPointFeatures, static_cast<Eigen::Index>(line.size()));
    for (std::size_t i = 0; i < line.size(); ++i) {
      Vec2 tangent = Vec2::Zero();
      if (line.size() > 1) {
        tangent = i + 1 < line.size() ? line[i + 1] - line[i] : line[i] - line[i - 1];
        const double n = tangent.norm();
        if (n > 0.0) tangent /= n;
      }
      const auto c = static_cast<Eigen::Index>(i);
      feats(0, c) = line[i].x() * kPositionScale;
      feats(1, c) = line[i].y() * kPositionScale;
      feats(2, c) = tangent.x();
      feats(3, c) = tangent.y();
    }
    ad::Var nodes = ad::relu(map_node_(tape, tape.constant(std::move(feats))));
    ad::Var pooled = ad::max_cols(nodes);
    lines.push_back(ctx.maybe_dropout(ad::relu(map_line_(tape, pooled))));
  }
  if (lines.empty()) return tape.constant(ad::Matrix::Zero(w, 1));

  // Self-attention across centerlines, then attention pooling to one vector.
  ad::Var e = ad::concat_cols(lines);
  ad::Var q = attn_query_(tape, e);
  ad::Var k = attn_key_(tape, e);
  ad::Var v = attn_value_(tape, e);
  ad::Var scores = ad::scale(ad::matmul(ad::transpose(k), q), 1.0 / std::sqrt(static_cast<double>(w)));
  ad::Var attended = ad::relu(ad::add(e, ad::matmul(v, ad::softmax(scores))));
  ad::Var weights = ad::softmax(ad::transpose(attn_pool_(tape, attended)));
  return ad::matmul(attended, weights);
}

PhaModel::GraphCarry PhaModel::encode_graph(const nn::ForwardContext& ctx,
                                            const SceneRecord& record) const {
  ad::Tape& tape = ctx.tape;
  const Eigen::Index w = config_.hidden_size;
  ad::Var map = encode_map(ctx, record.centerlines);

  const auto& obs = record.observed;
  ad::LstmOut state{tape.constant(ad::Matrix::Zero(w, 1)), tape.constant(ad::Matrix::Zero(w, 1))};
  for (std::size_t i = 0; i < obs.size(); ++i) {
    Vec2 disp = Vec2::Zero();
    if (obs.size() > 1) disp = i > 0 ? obs[i] - obs[i - 1] : obs[1] - obs[0];
    ad::Matrix feat(kStateFeatures, 1);
    feat << obs[i].x() * kPositionScale, obs[i].y() * kPositionScale, disp.x(), disp.y();
    ad::Var path = ctx.maybe_dropout(ad::relu(path_net_.hidden(tape, tape.constant(std::move(feat)))));
    path = path_net_.output(tape, path);
    ad::Var input = ad::concat_rows({path, map});
    state = ad::lstm_cell(input, state.h, state.c, tape.param(*encoder_lstm_.weight),
                          tape.param(*encoder_lstm_.bias));
  }

  Vec2 last_disp = obs.size() > 1 ? Vec2(obs.back() - obs[obs.size() - 2]) : Vec2::Zero();
  GraphCarry carry{state, tape.constant(column(obs.back())), tape.constant(column(last_disp)),
                   tape.constant(one_hot(config_.vocab_size, initial_mode(record).value))};
  return carry;
}

ad::LstmOut PhaModel::cell(const nn::ForwardContext& ctx, const nn::Dense& weights, ad::Var x,
                           const ad::LstmOut& state) const {
  ad::Tape& tape = ctx.tape;
  if (config_.variant == Variant::kLinearDecoder) {
    return ad::linear_cell(x, state.h, state.c, tape.param(*weights.weight), tape.param(*weights.bias));
  }
  return ad::lstm_cell(x, state.h, state.c, tape.param(*weights.weight), tape.param(*weights.bias));
}

ad::Var PhaModel::previous_samples_graph(const nn::ForwardContext& ctx,
                                         const std::vector<ad::Var>& sample_positions) const {
  ad::Tape& tape = ctx.tape;
  if (sample_positions.empty() || config_.variant == Variant::kNonAdaptiveProposal) {
    return tape.constant(ad::Matrix::Zero(sample_encoding_size(), 1));
  }
  ad::Var stacked = ad::scale(ad::concat_cols(sample_positions), kPositionScale);
  ad::Var per_sample = ctx.maybe_dropout(ad::relu(sample_encoder_(tape, stacked)));
  return ad::relu(sample_pool_(tape, ad::max_cols(per_sample)));
}

PhaModel::GraphStep PhaModel::decode_step_graph(const nn::ForwardContext& ctx,
                                                const GraphCarry& carry,
                                                const StepRequest& request) const {
  ad::Tape& tape = ctx.tape;
  const int z = config_.vocab_size;

  ad::Var input = ad::concat_rows(
      {ad::scale(carry.position, kPositionScale), carry.velocity, carry.mode});
  ad::LstmOut state = cell(ctx, decoder_cell_, input, carry.state);
  ad::Var y = state.h;

  GraphStep step;
  step.output = y;
  step.transition_logits = transition_(ctx, y);

  ad::Var mode_vec;
  if (request.kind == StepKind::kTeacher) {
    step.mode = request.mode;
    mode_vec = tape.constant(one_hot(z, request.mode.value));
  } else {
    if (config_.variant == Variant::kTransitionOnly) {
      step.proposal_logits = step.transition_logits;
    } else {
      ad::Var prev = request.previous_samples.valid()
                         ? request.previous_samples
                         : tape.constant(ad::Matrix::Zero(sample_encoding_size(), 1));
      if (config_.variant == Variant::kNonAdaptiveProposal) {
        prev = tape.constant(ad::Matrix::Zero(sample_encoding_size(), 1));
      }
      ad::Var q_in = ad::concat_rows({ad::softmax(step.transition_logits), y, prev});
      step.proposal_logits = proposal_(ctx, q_in);
    }

    if (request.kind == StepKind::kForced) {
      step.mode = request.mode;
      mode_vec = tape.constant(one_hot(z, request.mode.value));
    } else {
      // Gumbel-softmax over the proposal logits.
      const GumbelDraw draw = gumbel_perturb(step.proposal_logits.value().col(0), *ctx.rng);
      ad::Var perturbed = ad::add(step.proposal_logits, tape.constant(draw.noise));
      ad::Var soft = ad::softmax(ad::scale(perturbed, 1.0 / config_.gumbel_temperature));
      const int chosen = static_cast<int>(draw.index);
      step.mode = ModeId{chosen};
      mode_vec = config_.straight_through ? ad::straight_through(one_hot(z, chosen), soft) : soft;
    }
  }

  ad::Var delta = dynamics_(ctx, ad::concat_rows({y, mode_vec}));
  step.mean = ad::add(ad::add(carry.position, carry.velocity), delta);

  ad::Var position;
  if (request.teacher_position) {
    position = tape.constant(column(*request.teacher_position));
  } else if (request.position_noise) {
    ad::Matrix eps(2, 1);
    eps << standard_normal(*ctx.rng), standard_normal(*ctx.rng);
    position = ad::add(step.mean, tape.constant(eps));
  } else {
    position = step.mean;
  }

  step.next.state = state;
  step.next.position = position;
  step.next.velocity = ad::sub(position, carry.position);
  step.next.mode = mode_vec;
  return step;
}

GumbelDraw gumbel_perturb(const Eigen::VectorXd& logits, Rng& rng) {
  GumbelDraw d;
  d.noise.resize(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) d.noise(i) = gumbel(rng);
  (logits + d.noise).maxCoeff(&d.index);
  return d;
}

EncoderState encode(const SceneRecord& record, const PhaModel& model) {
  ad::Tape tape;
  nn::ForwardContext ctx{tape};
  auto carry = model.encode_graph(ctx, record);
  EncoderState out;
  out.h0 = carry.state.h.value().col(0);
  out.c0 = carry.state.c.value().col(0);
  return out;
}

DecoderCarry initial_carry(const SceneRecord& record, const PhaModel& model) {
  const EncoderState enc = encode(record, model);
  DecoderCarry carry;
  carry.hidden = enc.h0;
  carry.cell = enc.c0;
  carry.state.mode = model.initial_mode(record);
  carry.state.position = record.observed.back();
  if (record.observed.size() > 1) carry.velocity = record.observed.back() - record.observed[record.observed.size() - 2];
  return carry;
}

DecoderStep decode_step(const DecoderCarry& carry, const Eigen::VectorXd& previous_samples_encoding,
                        const PhaModel& model, Rng& rng, bool greedy, const RolloutOptions& options) {
  ad::Tape tape;
  nn::ForwardContext ctx{tape, false, 0.0, &rng};
  PhaModel::GraphCarry gc{
      {tape.constant(carry.hidden), tape.constant(carry.cell)},
      tape.constant(column(carry.state.position)),
      tape.constant(column(carry.velocity)),
      tape.constant(one_hot(model.config().vocab_size, carry.state.mode.value))};
  PhaModel::StepRequest req;
  req.kind = options.forced_mode ? PhaModel::StepKind::kForced : PhaModel::StepKind::kProposal;
  if (options.forced_mode) req.mode = *options.forced_mode;
  req.previous_samples = tape.constant(previous_samples_encoding);
  req.position_noise = !greedy;
  auto step = model.decode_step_graph(ctx, gc, req);

  DecoderStep out;
  out.hidden = step.next.state.h.value().col(0);
  out.cell = step.next.state.c.value().col(0);
  out.output = step.output.value().col(0);
  out.transition_logits = step.transition_logits.value().col(0);
  out.proposal_logits = step.proposal_logits.value().col(0);
  out.mode = step.mode;
  out.mean = to_vec2(step.mean.value());
  out.position = to_vec2(step.next.position.value());
  return out;
}

namespace {

ad::Matrix stacked_positions(const HybridSequence& seq) {
  ad::Matrix m(2 * static_cast<Eigen::Index>(seq.steps.size()), 1);
  for (std::size_t t = 0; t < seq.steps.size(); ++t) {
    m(2 * static_cast<Eigen::Index>(t), 0) = seq.steps[t].position.x();
    m(2 * static_cast<Eigen::Index>(t) + 1, 0) = seq.steps[t].position.y();
  }
  return m;
}

double log_prob(const ad::Matrix& logits, int index) {
  const double m = logits.col(0).maxCoeff();
  const double lse = m + std::log((logits.col(0).array() - m).exp().sum());
  return logits(index, 0) - lse;
}

}  // namespace

Eigen::VectorXd encode_previous_samples(const std::vector<HybridSequence>& samples,
                                        const PhaModel& model) {
  ad::Tape tape;
  nn::ForwardContext ctx{tape};
  std::vector<ad::Var> cols;
  for (const auto& s : samples) cols.push_back(tape.constant(stacked_positions(s)));
  return model.previous_samples_graph(ctx, cols).value().col(0);
}

HybridSequence rollout(const SceneRecord& record, const PhaModel& model, Rng& rng,
                       const std::vector<HybridSequence>& previous_samples,
                       const RolloutOptions& options) {
  ad::Tape tape;
  nn::ForwardContext ctx{tape, false, 0.0, &rng};
  std::vector<ad::Var> cols;
  for (const auto& s : previous_samples) cols.push_back(tape.constant(stacked_positions(s)));
  ad::Var prev = model.previous_samples_graph(ctx, cols);

  auto carry = model.encode_graph(ctx, record);
  HybridSequence seq;
  double ll = 0.0;
  for (int t = 0; t < model.config().horizon; ++t) {
    PhaModel::StepRequest req;
    req.kind = options.forced_mode ? PhaModel::StepKind::kForced : PhaModel::StepKind::kProposal;
    if (options.forced_mode) req.mode = *options.forced_mode;
    req.previous_samples = prev;
    req.position_noise = model.config().stochastic_positions;
    auto step = model.decode_step_graph(ctx, carry, req);
    const Vec2 pos = to_vec2(step.next.position.value());
    ll += log_prob(step.transition_logits.value(), step.mode.value) +
          unit_gaussian_log_density(pos, to_vec2(step.mean.value()));
    seq.steps.push_back(HybridState{step.mode, pos});
    carry = step.next;
  }
  seq.log_likelihood = ll;
  return seq;
}

double sequence_log_likelihood(const SceneRecord& record, const std::vector<Vec2>& future,
                               const std::vector<ModeId>& future_modes, const PhaModel& model) {
  const int h = model.config().horizon;
  if (static_cast<int>(future.size()) != h || static_cast<int>(future_modes.size()) != h) {
    throw Error(ErrorKind::kDimensionMismatch, "observed future must have horizon length");
  }
  ad::Tape tape;
  nn::ForwardContext ctx{tape};
  auto carry = model.encode_graph(ctx, record);
  double ll = 0.0;
  for (int t = 0; t < h; ++t) {
    PhaModel::StepRequest req;
    req.kind = PhaModel::StepKind::kTeacher;
    req.mode = future_modes[static_cast<std::size_t>(t)];
    req.teacher_position = future[static_cast<std::size_t>(t)];
    auto step = model.decode_step_graph(ctx, carry, req);
    ll += log_prob(step.transition_logits.value(), req.mode.value) +
          unit_gaussian_log_density(future[static_cast<std::size_t>(t)], to_vec2(step.mean.value()));
    carry = step.next;
  }
  return ll;
}

double sequence_log_likelihood(const SceneRecord& record, const HybridSequence& sequence,
                               const PhaModel& model) {
  std::vector<Vec2> pos;
  std::vector<ModeId> modes;
  for (const auto& s : sequence.steps) {
    pos.push_back(s.position);
    modes.push_back(s.mode);
  }
  return sequence_log_likelihood(record, pos, modes, model);
}

}  // namespace hyper
