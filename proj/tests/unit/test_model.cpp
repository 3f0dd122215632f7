#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "hyper/model.hpp"

using namespace hyper;
using testing::make_scene;

namespace {

PhaModel model_with(ModelConfig cfg, std::uint64_t seed = 1) { return PhaModel(cfg, seed); }

void zero(PhaModel& m, const std::string& name) { m.parameters().at(name).value.setZero(); }

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("encoder state is finite with the configured width") {
    const PhaModel m = model_with(ModelConfig{});
    const auto rec = make_scene();
    const auto enc = encode(rec, m);
    CHECK(enc.h0.size() == 32);
    CHECK(enc.h0.allFinite());
    auto empty = rec;
    empty.centerlines.clear();
    CHECK(encode(empty, m).h0.allFinite());
    CHECK(encode(rec, m).h0 == enc.h0);
  }

  TEST_CASE("map changes the encoding") {
    const PhaModel m = model_with(ModelConfig{});
    auto rec = make_scene();
    const auto a = encode(rec, m).h0;
    rec.centerlines.push_back({Vec2(0, -3.5), Vec2(30, -3.5)});
    CHECK((encode(rec, m).h0 - a).norm() > 0.0);
  }

  TEST_CASE("parameter count is a function of the config") {
    ModelConfig cfg;
    CHECK(model_with(cfg, 1).parameters().scalar_count() == model_with(cfg, 2).parameters().scalar_count());
    ModelConfig wider = cfg;
    wider.hidden_size = 16;
    CHECK(model_with(wider).parameters().scalar_count() != model_with(cfg).parameters().scalar_count());
    CHECK(model_with(cfg, 1).parameters().at("decoder.cell.weight").value !=
          model_with(cfg, 2).parameters().at("decoder.cell.weight").value);
  }

  TEST_CASE("Gumbel-max with a dominant logit picks it") {
    Eigen::VectorXd logits(5);
    logits << 100, 0, 0, 0, 0;
    Rng rng(4);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += gumbel_perturb(logits, rng).index == 0;
    CHECK(hits >= 9990);
  }

  TEST_CASE("transition_only proposes from T bit-for-bit") {
    const PhaModel m = model_with(testing::tiny_config(Variant::kTransitionOnly));
    const auto rec = make_scene(20, 3, 3);
    const auto carry = initial_carry(rec, m);
    Rng rng(3);
    const auto step = decode_step(carry, Eigen::VectorXd::Random(4), m, rng);
    CHECK(step.proposal_logits == step.transition_logits);
  }

  TEST_CASE("non-adaptive proposal ignores the sample encoding") {
    const PhaModel m = model_with(testing::tiny_config(Variant::kNonAdaptiveProposal));
    const auto rec = make_scene(20, 3, 3);
    const auto carry = initial_carry(rec, m);
    Rng a(3), b(3);
    const auto s1 = decode_step(carry, Eigen::VectorXd::Zero(4), m, a);
    const auto s2 = decode_step(carry, Eigen::VectorXd::Constant(4, 5.0), m, b);
    CHECK(s1.proposal_logits == s2.proposal_logits);
    CHECK(s1.mode == s2.mode);
    CHECK(s1.position == s2.position);
  }

  TEST_CASE("adaptive proposal depends on the sample encoding") {
    const PhaModel m = model_with(testing::tiny_config());
    const auto rec = make_scene(20, 3, 3);
    const auto carry = initial_carry(rec, m);
    Rng a(3), b(3);
    const auto s1 = decode_step(carry, Eigen::VectorXd::Zero(4), m, a);
    const auto s2 = decode_step(carry, Eigen::VectorXd::Constant(4, 5.0), m, b);
    CHECK(s1.proposal_logits != s2.proposal_logits);
  }

  TEST_CASE("single-mode vocabulary") {
    ModelConfig cfg = testing::tiny_config(Variant::kSingleMode);
    cfg.vocab_size = 1;
    const PhaModel m = model_with(cfg);
    const auto rec = collapse_modes(make_scene(20, 3, 3));
    Rng rng(1);
    for (int k = 0; k < 5; ++k) {
      const auto seq = rollout(rec, m, rng, {});
      for (const auto& s : seq.steps) CHECK(s.mode.value == 0);
    }
    const auto step = decode_step(initial_carry(rec, m), Eigen::VectorXd::Zero(4), m, rng);
    CHECK(step.transition_logits.size() == 1);
  }

  TEST_CASE("rollout shape, finiteness and determinism") {
    const PhaModel m = model_with(ModelConfig{});
    const auto rec = make_scene();
    Rng a(9), b(9);
    const auto s1 = rollout(rec, m, a, {});
    const auto s2 = rollout(rec, m, b, {});
    REQUIRE(s1.steps.size() == 30);
    REQUIRE(s1.log_likelihood.has_value());
    CHECK(std::isfinite(*s1.log_likelihood));
    CHECK(*s1.log_likelihood == *s2.log_likelihood);
    for (std::size_t t = 0; t < 30; ++t) {
      CHECK(s1.steps[t].mode == s2.steps[t].mode);
      CHECK(s1.steps[t].position == s2.steps[t].position);
    }
    // Conditioning on a previous sample changes the proposal.
    Rng c(9);
    const auto s3 = rollout(rec, m, c, {s1});
    CHECK(s3.steps.size() == 30);
  }

  TEST_CASE("forced mode holds for every step") {
    const PhaModel m = model_with(ModelConfig{});
    const auto rec = make_scene();
    Rng rng(2);
    for (int z = 0; z < 5; ++z) {
      RolloutOptions opt;
      opt.forced_mode = ModeId{z};
      const auto seq = rollout(rec, m, rng, {}, opt);
      for (const auto& s : seq.steps) CHECK(s.mode.value == z);
    }
  }

  TEST_CASE("rollout likelihood equals the teacher-forced likelihood of its own sequence") {
    const PhaModel m = model_with(ModelConfig{});
    const auto rec = make_scene();
    Rng rng(5);
    const auto seq = rollout(rec, m, rng, {});
    CHECK(sequence_log_likelihood(rec, seq, m) == doctest::Approx(*seq.log_likelihood).epsilon(1e-12));
  }

  TEST_CASE("single-step closed form: uniform over 2 modes, position at the mean") {
    ModelConfig cfg = testing::tiny_config();
    cfg.vocab_size = 2;
    cfg.horizon = 1;
    cfg.N = 1;
    PhaModel m = model_with(cfg);
    zero(m, "decoder.transition.output.weight");
    zero(m, "decoder.transition.output.bias");
    zero(m, "decoder.dynamics.output.weight");
    zero(m, "decoder.dynamics.output.bias");
    auto rec = make_scene(20, 1, 2);
    const Vec2 v = rec.observed.back() - rec.observed[rec.observed.size() - 2];
    rec.future = {rec.observed.back() + v};
    rec.future_modes = {ModeId{1}};
    const double ll = sequence_log_likelihood(rec, rec.future, rec.future_modes, m);
    CHECK(ll == doctest::Approx(std::log(0.5) - std::log(2.0 * M_PI)).epsilon(1e-12));
    CHECK(std::abs(ll - (-2.5310242469692907)) < 1e-6);

    // Shifting the observed position by delta costs |delta|^2 / 2.
    const Vec2 delta(0.3, -1.1);
    auto shifted = rec.future;
    shifted[0] += delta;
    const double ll2 = sequence_log_likelihood(rec, shifted, rec.future_modes, m);
    CHECK(ll2 - ll == doctest::Approx(-0.5 * delta.squaredNorm()).epsilon(1e-12));
  }

  TEST_CASE("certain modes and positions at the mean give -H log 2pi") {
    ModelConfig cfg = testing::tiny_config();
    cfg.horizon = 30;
    PhaModel m = model_with(cfg);
    zero(m, "decoder.transition.output.weight");
    auto& bias = m.parameters().at("decoder.transition.output.bias").value;
    bias << 1000.0, 0.0, 0.0;
    zero(m, "decoder.dynamics.output.weight");
    zero(m, "decoder.dynamics.output.bias");
    auto rec = make_scene(20, 30, 3);
    // Constant-velocity continuation is exactly the mean with zero residual.
    Vec2 p = rec.observed.back();
    const Vec2 v = p - rec.observed[rec.observed.size() - 2];
    for (int t = 0; t < 30; ++t) {
      p += v;
      rec.future[static_cast<std::size_t>(t)] = p;
      rec.future_modes[static_cast<std::size_t>(t)] = ModeId{0};
    }
    CHECK(sequence_log_likelihood(rec, rec.future, rec.future_modes, m) ==
          doctest::Approx(-30.0 * std::log(2.0 * M_PI)).epsilon(1e-12));
  }

  TEST_CASE("sequence weight does not depend on the proposal") {
    PhaModel m = model_with(ModelConfig{});
    const auto rec = make_scene();
    Rng rng(5);
    const auto seq = rollout(rec, m, rng, {});
    const double before = sequence_log_likelihood(rec, seq, m);
    m.parameters().at("decoder.proposal.output.weight").value.array() += 0.7;
    m.parameters().at("decoder.samples.pool.bias").value.array() -= 0.3;
    CHECK(sequence_log_likelihood(rec, seq, m) == before);
  }

  TEST_CASE("transition logits depend on the previous continuous state") {
    const PhaModel m = model_with(ModelConfig{});
    const auto rec = make_scene();
    auto carry = initial_carry(rec, m);
    Rng a(1), b(1);
    const auto s1 = decode_step(carry, Eigen::VectorXd::Zero(32), m, a);
    carry.state.position += Vec2(1.0, 0.5);
    const auto s2 = decode_step(carry, Eigen::VectorXd::Zero(32), m, b);
    CHECK((s1.transition_logits - s2.transition_logits).norm() > 1e-9);
  }

  TEST_CASE("softmax of T and Q sums to one along a rollout") {
    const PhaModel m = model_with(ModelConfig{});
    const auto rec = make_scene();
    auto carry = initial_carry(rec, m);
    Rng rng(7);
    for (int t = 0; t < 30; ++t) {
      const auto s = decode_step(carry, Eigen::VectorXd::Zero(32), m, rng);
      for (const auto* l : {&s.transition_logits, &s.proposal_logits}) {
        REQUIRE(l->allFinite());
        ad::Tape tape;
        const auto p = ad::softmax(tape.constant(*l)).value();
        CHECK(std::abs(p.sum() - 1.0) < 1e-6);
        CHECK(p.minCoeff() >= 0.0);
      }
      carry.hidden = s.hidden;
      carry.cell = s.cell;
      carry.velocity = s.position - carry.state.position;
      carry.state = {s.mode, s.position};
    }
  }

  TEST_CASE("linear decoder variant builds and rolls out") {
    const PhaModel m = model_with(testing::tiny_config(Variant::kLinearDecoder));
    CHECK(m.parameters().at("decoder.cell.weight").value.rows() == 4);
    Rng rng(1);
    const auto seq = rollout(make_scene(20, 3, 3), m, rng, {});
    CHECK(std::isfinite(*seq.log_likelihood));
  }

  TEST_CASE("initial mode comes from the observed tail") {
    const PhaModel m = model_with(ModelConfig{});
    CHECK(m.initial_mode(make_scene(20, 30, 5, 6.0)) == modes::kFastForward);
    CHECK(m.initial_mode(make_scene(20, 30, 5, 0.5)) == modes::kSlowForward);
  }
}
