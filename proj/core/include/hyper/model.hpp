#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hyper/autodiff.hpp"
#include "hyper/nn.hpp"
#include "hyper/rng.hpp"
#include "hyper/types.hpp"

namespace hyper {

/// Context encoding of one scene.
struct EncoderState {
  Eigen::VectorXd h0;
  Eigen::VectorXd c0;
  /// Per observed step context vectors fed to the encoder LSTM.
  std::vector<Eigen::VectorXd> context;
};

/// Decoder input for one step: previous hybrid state plus the displacement
/// that led into it, and the recurrent state.
struct DecoderCarry {
  Eigen::VectorXd hidden;
  Eigen::VectorXd cell;
  HybridState state;
  Vec2 velocity = Vec2::Zero();
};

struct DecoderStep {
  Eigen::VectorXd hidden;
  Eigen::VectorXd cell;
  Eigen::VectorXd output;
  Eigen::VectorXd transition_logits;
  Eigen::VectorXd proposal_logits;
  ModeId mode;
  Vec2 mean = Vec2::Zero();
  Vec2 position = Vec2::Zero();
};

struct RolloutOptions {
  /// Forces every step to this mode (fixed-mode baseline).
  std::optional<ModeId> forced_mode;
};

/// Learned hybrid automaton: encoder, recurrent decoder with transition (T),
/// dynamics (F) and proposal (Q) heads, and the previous-sample encoder.
class PhaModel {
 public:
  PhaModel(ModelConfig config, std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

  // ---- graph-level building blocks (shared by inference and training) ----

  struct GraphCarry {
    ad::LstmOut state;
    ad::Var position;  // 2x1, meters
    ad::Var velocity;  // 2x1, meters per step
    ad::Var mode;      // |Z|x1 one-hot or relaxed sample
  };

  struct GraphStep {
    GraphCarry next;
    ad::Var output;
    ad::Var transition_logits;
    ad::Var proposal_logits;  // invalid when the proposal was not evaluated
    ad::Var mean;
    ModeId mode;
  };

  enum class StepKind { kTeacher, kProposal, kForced };

  struct StepRequest {
    StepKind kind = StepKind::kProposal;
    ModeId mode;  // teacher or forced mode
    std::optional<Vec2> teacher_position;
    /// Adds N(0, I) noise to the sampled position (x' = mean otherwise).
    bool position_noise = false;
    /// Encoding of previously completed samples (zero vector when none).
    ad::Var previous_samples;
  };

  GraphCarry encode_graph(const nn::ForwardContext& ctx, const SceneRecord& record) const;
  GraphStep decode_step_graph(const nn::ForwardContext& ctx, const GraphCarry& carry,
                              const StepRequest& request) const;

  /// Encoding of completed sample trajectories, each given as a (2H x 1)
  /// column of stacked positions. Returns a zero vector for an empty set and
  /// for the non-adaptive variant.
  ad::Var previous_samples_graph(const nn::ForwardContext& ctx,
                                 const std::vector<ad::Var>& sample_positions) const;

  /// Mode of the initial decoder input, labeled from the observed tail.
  ModeId initial_mode(const SceneRecord& record) const;

  Eigen::Index sample_encoding_size() const { return config_.hidden_size; }

 private:
  ad::Var encode_map(const nn::ForwardContext& ctx, const std::vector<Polyline>& centerlines) const;
  ad::LstmOut cell(const nn::ForwardContext& ctx, const nn::Dense& weights, ad::Var x,
                   const ad::LstmOut& state) const;

  ModelConfig config_;
  nn::ParameterStore store_;

  nn::Mlp path_net_;
  nn::Dense map_node_;
  nn::Dense map_line_;
  nn::Dense attn_query_;
  nn::Dense attn_key_;
  nn::Dense attn_value_;
  nn::Dense attn_pool_;
  nn::Dense encoder_lstm_;
  nn::Dense decoder_cell_;
  nn::Mlp transition_;
  nn::Mlp proposal_;
  nn::Mlp dynamics_;
  nn::Dense sample_encoder_;
  nn::Dense sample_pool_;
};

struct GumbelDraw {
  Eigen::Index index = 0;
  Eigen::VectorXd noise;  // Gumbel(0, 1) per entry
};

/// Gumbel-max draw: `index` = argmax(logits + noise) is distributed as
/// softmax(logits).
GumbelDraw gumbel_perturb(const Eigen::VectorXd& logits, Rng& rng);

/// Log density of a 2-D unit-variance Gaussian.
double unit_gaussian_log_density(const Vec2& x, const Vec2& mean);

// ---- value-level operations (inference mode: dropout off) ----

EncoderState encode(const SceneRecord& record, const PhaModel& model);

/// Initial decoder carry: encoder state, last observed position and
/// displacement, and the auto-labeled observed mode.
DecoderCarry initial_carry(const SceneRecord& record, const PhaModel& model);

/// One decoder step. `greedy` sets x' = mean, otherwise x' = mean + N(0, I).
DecoderStep decode_step(const DecoderCarry& carry, const Eigen::VectorXd& previous_samples_encoding,
                        const PhaModel& model, Rng& rng, bool greedy = true,
                        const RolloutOptions& options = {});

Eigen::VectorXd encode_previous_samples(const std::vector<HybridSequence>& samples,
                                        const PhaModel& model);

/// Samples one hybrid sequence with the proposal (or T for the
/// transition-only variant). Its log-likelihood comes from T and F only.
/// Positions are greedy unless config().stochastic_positions is set.
HybridSequence rollout(const SceneRecord& record, const PhaModel& model, Rng& rng,
                       const std::vector<HybridSequence>& previous_samples,
                       const RolloutOptions& options = {});

/// Teacher-forced log-likelihood of an observed future (positions and modes).
double sequence_log_likelihood(const SceneRecord& record, const std::vector<Vec2>& future,
                               const std::vector<ModeId>& future_modes, const PhaModel& model);

/// Teacher-forced log-likelihood of a fixed sequence: sum over steps of
/// log softmax(T)[mode] + log N(position; mean, I).
double sequence_log_likelihood(const SceneRecord& record, const HybridSequence& sequence,
                               const PhaModel& model);

}  // namespace hyper
