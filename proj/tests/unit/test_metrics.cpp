#include "doctest.h"

#include <cmath>

#include "hyper/error.hpp"
#include "hyper/metrics.hpp"
#include "hyper/rng.hpp"

using namespace hyper;

namespace {

std::vector<Vec2> line(int h) {
  std::vector<Vec2> out;
  for (int t = 1; t <= h; ++t) out.emplace_back(1.2 * t, 0.1 * t * t);
  return out;
}

std::vector<Vec2> shifted(std::vector<Vec2> pts, Vec2 d) {
  for (auto& p : pts) p += d;
  return pts;
}

HybridSequence as_sequence(const std::vector<Vec2>& pts) {
  HybridSequence s;
  for (const auto& p : pts) s.steps.push_back({ModeId{0}, p});
  s.log_likelihood = 0.0;
  return s;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("minADE and minFDE examples") {
    const auto gt = line(30);
    auto r = min_ade_fde(std::vector<std::vector<Vec2>>{gt}, gt, 30);
    CHECK(r.min_ade == 0.0);
    CHECK(r.min_fde == 0.0);
    r = min_ade_fde(std::vector<std::vector<Vec2>>{shifted(gt, Vec2(3, 4))}, gt, 30);
    CHECK(r.min_ade == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.min_fde == doctest::Approx(5.0).epsilon(1e-12));
    r = min_ade_fde(std::vector<std::vector<Vec2>>{shifted(gt, Vec2(3, 4)), gt}, gt, 30);
    CHECK(r.min_ade == 0.0);
    CHECK(r.min_fde == 0.0);
  }

  TEST_CASE("minimum is per metric") {
    const auto gt = line(10);
    auto a = gt, b = gt;
    a.back() += Vec2(0, 6);                      // ADE 0.6, FDE 6
    for (auto& p : b) p += Vec2(1, 0);           // ADE 1, FDE 1
    const auto r = min_ade_fde(std::vector<std::vector<Vec2>>{a, b}, gt, 10);
    CHECK(r.min_ade == doctest::Approx(0.6));
    CHECK(r.min_fde == doctest::Approx(1.0));
  }

  TEST_CASE("1 s cut uses exactly the first 10 steps") {
    const auto gt = line(30);
    auto p = gt;
    for (std::size_t t = 10; t < 30; ++t) p[t] += Vec2(50, 50);
    const auto r = min_ade_fde(std::vector<std::vector<Vec2>>{p}, gt, 10);
    CHECK(r.min_ade == 0.0);
    CHECK(r.min_fde == 0.0);
    p[9] += Vec2(0, 1);
    CHECK(min_ade_fde(std::vector<std::vector<Vec2>>{p}, gt, 10).min_fde == doctest::Approx(1.0));
  }

  TEST_CASE("horizon beyond the sequences is an error") {
    const auto gt = line(5);
    CHECK_THROWS_AS(min_ade_fde(std::vector<std::vector<Vec2>>{gt}, gt, 6), Error);
    CHECK_THROWS_AS(min_ade_fde(std::vector<std::vector<Vec2>>{}, gt, 5), Error);
  }

  TEST_CASE("adding predictions never increases the minimum; translation invariance") {
    Rng rng(4);
    const auto gt = line(30);
    std::vector<std::vector<Vec2>> preds;
    double last_ade = 1e300, last_fde = 1e300;
    for (int k = 0; k < 8; ++k) {
      preds.push_back(shifted(gt, Vec2(3 * standard_normal(rng), 3 * standard_normal(rng))));
      const auto r = min_ade_fde(preds, gt, 30);
      CHECK(r.min_ade <= last_ade);
      CHECK(r.min_fde <= last_fde);
      last_ade = r.min_ade;
      last_fde = r.min_fde;
      std::vector<std::vector<Vec2>> moved;
      for (const auto& p : preds) moved.push_back(shifted(p, Vec2(100, -40)));
      const auto t = min_ade_fde(moved, shifted(gt, Vec2(100, -40)), 30);
      CHECK(t.min_ade == doctest::Approx(r.min_ade).epsilon(1e-9));
      CHECK(t.min_fde == doctest::Approx(r.min_fde).epsilon(1e-9));
    }
  }

  TEST_CASE("minDER examples") {
    std::vector<ModeId> gt(30, ModeId{1});
    CHECK(min_der(std::vector<std::vector<ModeId>>{gt}, gt) == 0.0);
    auto wrong3 = gt;
    for (int t = 0; t < 3; ++t) wrong3[static_cast<std::size_t>(t)] = ModeId{2};
    auto wrong9 = gt;
    for (int t = 0; t < 9; ++t) wrong9[static_cast<std::size_t>(t)] = ModeId{0};
    CHECK(min_der(std::vector<std::vector<ModeId>>{wrong9, wrong3}, gt) == doctest::Approx(0.1).epsilon(1e-12));
    // Single-mode vocabulary.
    std::vector<ModeId> zeros(30, ModeId{0});
    CHECK(min_der(std::vector<std::vector<ModeId>>{zeros}, zeros) == 0.0);
    CHECK_THROWS_AS(min_der(std::vector<std::vector<ModeId>>{std::vector<ModeId>(29)}, gt), Error);
  }

  TEST_CASE("NLL closed forms") {
    const auto gt = line(30);
    SelectionResult one;
    one.selected = {as_sequence(gt)};
    one.probabilities = {1.0};
    const double base = nll(one, gt);
    CHECK(base == doctest::Approx(30.0 * std::log(2.0 * M_PI)).epsilon(1e-12));
    CHECK(std::abs(base - 55.136) < 1e-3);

    // A zero-probability component changes nothing.
    SelectionResult two = one;
    two.selected.push_back(as_sequence(shifted(gt, Vec2(1, 1))));
    two.probabilities = {1.0, 0.0};
    CHECK(nll(two, gt) == doctest::Approx(base).epsilon(1e-12));

    // Moving one step by 1 m adds exactly 0.5.
    auto moved = gt;
    moved[7] += Vec2(0.6, 0.8);
    SelectionResult m;
    m.selected = {as_sequence(moved)};
    m.probabilities = {1.0};
    CHECK(nll(m, gt) - base == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("NLL mixture of two equal components") {
    const auto gt = line(3);
    SelectionResult r;
    r.selected = {as_sequence(gt), as_sequence(shifted(gt, Vec2(1, 0)))};
    r.probabilities = {0.5, 0.5};
    // -log(0.5 e^0 + 0.5 e^{-1.5}) + 3 log 2pi
    const double want = -std::log(0.5 + 0.5 * std::exp(-1.5)) + 3.0 * std::log(2.0 * M_PI);
    CHECK(nll(r, gt) == doctest::Approx(want).epsilon(1e-12));
  }
}
