#include "doctest.h"

#include "fixtures.hpp"
#include "hyper/error.hpp"
#include "hyper/labeling.hpp"
#include "hyper/synthetic.hpp"
#include "hyper/trainer.hpp"

using namespace hyper;

namespace {

ModelConfig small_config(Variant v = Variant::kFull) {
  ModelConfig c;
  c.hidden_size = 8;
  c.K = 2;
  c.M = 6;
  c.N = 2;
  c.horizon = 30;
  c.variant = v;
  return c;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("training lowers the MLE on synthetic data") {
    const auto data = generate_synthetic(200, 1, default_mix());
    OptimizerSettings opt;
    opt.epochs = 30;
    opt.patience = 30;
    auto cfg = small_config(Variant::kTransitionOnly);
    const auto result = train(data, cfg, opt, 3);
    REQUIRE(result.log.size() == 30);
    CHECK(result.log.back().train.mle < result.log.front().train.mle);
  }

  TEST_CASE("full objective trains a few epochs and logs every term") {
    const auto data = generate_synthetic(40, 2, default_mix());
    OptimizerSettings opt;
    opt.epochs = 3;
    std::vector<std::string> lines;
    const auto result = train(data, small_config(), opt, 3, [&](const EpochLog& e) { lines.push_back(epoch_log_line(e)); });
    REQUIRE(lines.size() == 3);
    for (const char* key : {"\"epoch\"", "\"mle\"", "\"coverage\"", "\"regularization\"", "\"total\"", "\"val_total\""}) {
      CHECK(lines[0].find(key) != std::string::npos);
    }
    CHECK(result.best_epoch >= 1);
    CHECK(result.log[0].train.coverage > 0.0);
  }

  TEST_CASE("training is deterministic") {
    const auto data = generate_synthetic(30, 4, default_mix());
    OptimizerSettings opt;
    opt.epochs = 2;
    const auto a = train(data, small_config(), opt, 9);
    const auto b = train(data, small_config(), opt, 9);
    const auto pa = a.model.parameters().all();
    const auto pb = b.model.parameters().all();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
  }

  TEST_CASE("empty dataset is a missing-data error") {
    try {
      train({}, small_config(), OptimizerSettings{}, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kMissingData);
    }
  }

  TEST_CASE("single-mode and perturbed-label data train") {
    const auto data = generate_synthetic(30, 5, default_mix());
    OptimizerSettings opt;
    opt.epochs = 1;
    auto cfg = small_config(Variant::kSingleMode);
    cfg.vocab_size = 1;
    const auto single = train(data, cfg, opt, 1);
    CHECK(single.model.parameters().at("decoder.transition.output.bias").value.rows() == 1);
    CHECK(single.model.parameters().at("decoder.proposal.output.bias").value.rows() == 1);
    const auto perturbed = train(perturb_labels(data, 0.05, 3), small_config(), opt, 1);
    CHECK(std::isfinite(perturbed.log.back().train.total));
  }

  TEST_CASE("large beta pulls the proposal toward the transition") {
    const auto data = generate_synthetic(16, 6, default_mix());
    OptimizerSettings opt;
    opt.epochs = 40;
    opt.patience = 40;
    opt.val_fraction = 0.0;
    auto weak = small_config();
    auto strong = small_config();
    strong.beta = 1000.0;
    const auto a = train(data, weak, opt, 2);
    const auto b = train(data, strong, opt, 2);
    double reg_a = 0, reg_b = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      Rng r1(i), r2(i);
      reg_a += total_loss(data[i], a.model, r1).regularization;
      reg_b += total_loss(data[i], b.model, r2).regularization;
    }
    CHECK(reg_b < reg_a);
  }
}
