#include "doctest.h"

#include <set>

#include "hyper/dataset_io.hpp"
#include "hyper/error.hpp"
#include "hyper/labeling.hpp"
#include "hyper/synthetic.hpp"

using namespace hyper;

TEST_SUITE("data-pipeline") {
  TEST_CASE("50/50 follow and lane change: at least 50 records with a mode change") {
    const ScenarioMix mix{{ScenarioKind::kLaneFollow, 0.5}, {ScenarioKind::kLaneChangeMidHorizon, 0.5}};
    const auto records = generate_synthetic(100, 7, mix);
    REQUIRE(records.size() == 100);
    int changing = 0;
    for (const auto& r : records) {
      std::set<int> distinct;
      for (auto m : r.future_modes) distinct.insert(m.value);
      changing += distinct.size() >= 2;
    }
    CHECK(changing >= 50);
  }

  TEST_CASE("every non-follow kind changes mode in the future") {
    for (auto kind : {ScenarioKind::kLaneChangeMidHorizon, ScenarioKind::kTurnAfterFollow,
                      ScenarioKind::kDecelerateToStop}) {
      const auto records = generate_synthetic(40, 21, {{kind, 1.0}});
      for (const auto& r : records) {
        std::set<int> distinct;
        for (auto m : r.future_modes) distinct.insert(m.value);
        CHECK_MESSAGE(distinct.size() >= 2, to_string(kind), " ", r.scene_id);
      }
    }
  }

  TEST_CASE("count zero and determinism") {
    CHECK(generate_synthetic(0, 1, default_mix()).empty());
    const auto a = generate_synthetic(30, 99, default_mix());
    const auto b = generate_synthetic(30, 99, default_mix());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(record_to_line(a[i]) == record_to_line(b[i]));
    const auto c = generate_synthetic(30, 100, default_mix());
    CHECK(record_to_line(a[0]) != record_to_line(c[0]));
  }

  TEST_CASE("records have configured shapes and agent-centric frame") {
    for (const auto& r : generate_synthetic(40, 4, default_mix())) {
      CHECK(r.observed.size() == 20);
      CHECK(r.future.size() == 30);
      CHECK(r.future_modes.size() == 30);
      CHECK(r.observed.back().norm() < 1e-12);
      CHECK(r.observed[r.observed.size() - 2].y() == doctest::Approx(0.0));
      CHECK(r.observed[r.observed.size() - 2].x() < 0.0);
      CHECK(!r.centerlines.empty());
    }
  }

  TEST_CASE("stored labels agree with relabeling the generated future") {
    const auto records = generate_synthetic(200, 8, default_mix());
    long agree = 0, total = 0;
    for (const auto& r : records) {
      const auto relabeled = label_future(r.observed, r.future, LabelThresholds{});
      for (std::size_t t = 0; t < relabeled.size(); ++t) agree += relabeled[t] == r.future_modes[t];
      total += static_cast<long>(relabeled.size());
    }
    CHECK(static_cast<double>(agree) / static_cast<double>(total) >= 0.95);
  }

  TEST_CASE("noisy generation labels the smoothed trajectory") {
    SyntheticOptions opt;
    opt.noise_std = 0.05;
    const auto noisy = generate_synthetic(20, 8, default_mix(), opt);
    const auto clean = generate_synthetic(20, 8, default_mix());
    long agree = 0, total = 0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      CHECK(noisy[i].future != clean[i].future);
      for (std::size_t t = 0; t < clean[i].future_modes.size(); ++t) {
        agree += noisy[i].future_modes[t] == clean[i].future_modes[t];
        ++total;
      }
    }
    // Smoothing recovers most of the noiseless labels.
    CHECK(static_cast<double>(agree) / static_cast<double>(total) >= 0.8);
  }

  TEST_CASE("mix allocation uses largest remainder") {
    const ScenarioMix mix{{ScenarioKind::kLaneFollow, 0.34}, {ScenarioKind::kDecelerateToStop, 0.66}};
    const auto records = generate_synthetic(10, 2, mix);
    REQUIRE(records.size() == 10);
    // 3.4 -> 3 follow scenes (single mode), 6.6 -> 7 stop scenes (always change).
    int single = 0;
    for (const auto& r : records) {
      std::set<int> distinct;
      for (auto m : r.future_modes) distinct.insert(m.value);
      single += distinct.size() == 1;
    }
    CHECK(single == 3);
  }

  TEST_CASE("mix parsing and validation") {
    const auto mix = parse_mix("lane_follow=0.25,turn_after_follow=0.75");
    REQUIRE(mix.size() == 2);
    CHECK(mix[1].first == ScenarioKind::kTurnAfterFollow);
    CHECK(parse_mix(format_mix(mix)) == mix);
    CHECK_THROWS_AS(parse_mix("lane_follow=0.5"), Error);
    CHECK_THROWS_AS(parse_mix("nope=1.0"), Error);
    CHECK_THROWS_AS(parse_mix("lane_follow=-1,turn_after_follow=2"), Error);
    CHECK_THROWS_AS(generate_synthetic(5, 1, {}), Error);
  }
}
