#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

#include "hyper/error.hpp"
#include "hyper/labeling.hpp"
#include "hyper/synthetic.hpp"

using namespace hyper;

namespace {

std::vector<Vec2> arc(int n, double speed, double turn_deg) {
  std::vector<Vec2> pts{Vec2::Zero()};
  double h = 0.0;
  for (int i = 1; i < n; ++i) {
    h += turn_deg * M_PI / 180.0;
    pts.push_back(pts.back() + speed * 0.1 * Vec2(std::cos(h), std::sin(h)));
  }
  return pts;
}

}  // namespace

TEST_SUITE("data-pipeline") {
  TEST_CASE("stationary trajectory is all stop") {
    const auto labels = auto_label(std::vector<Vec2>(20, Vec2(3, 3)), LabelThresholds{});
    for (auto m : labels) CHECK(m == modes::kStop);
  }

  TEST_CASE("straight 2 m/s line is all fast forward") {
    for (auto m : auto_label(arc(30, 2.0, 0.0), LabelThresholds{})) CHECK(m == modes::kFastForward);
  }

  TEST_CASE("0.5 m/s arc turning +3 deg per step is all left turn") {
    for (auto m : auto_label(arc(30, 0.5, 3.0), LabelThresholds{})) CHECK(m == modes::kLeftTurn);
  }

  TEST_CASE("right turn and slow forward") {
    for (auto m : auto_label(arc(30, 4.0, -3.0), LabelThresholds{})) CHECK(m == modes::kRightTurn);
    for (auto m : auto_label(arc(30, 0.5, 0.0), LabelThresholds{})) CHECK(m == modes::kSlowForward);
  }

  TEST_CASE("doubling speed and sampling rate keeps heading labels") {
    // Same path sampled at 20 Hz with twice the speed per 0.1 s label step
    // gives the same per-step displacement and heading change.
    const auto a = auto_label(arc(40, 3.0, 4.0), LabelThresholds{});
    LabelThresholds fast;
    fast.step_seconds = 0.05;
    const auto b = auto_label(arc(40, 3.0, 4.0), fast);
    CHECK(a == b);
  }

  TEST_CASE("exactly one rule fires") {
    const LabelThresholds th;
    for (double s : {0.0, 0.03, 0.5, 2.0}) {
      for (double w : {-5.0, -1.0, 0.0, 1.0, 5.0}) {
        const auto m = classify_step({s, w}, th);
        CHECK(m.value >= 0);
        CHECK(m.value < 5);
      }
    }
  }

  TEST_CASE("too few points") {
    CHECK_THROWS_AS(auto_label({Vec2(0, 0)}, LabelThresholds{}), Error);
  }

  TEST_CASE("threshold validation") {
    LabelThresholds th;
    th.v_fast = 0.01;
    CHECK_THROWS_AS(th.validate(), Error);
    th = LabelThresholds{};
    th.theta_deg = 0.0;
    CHECK_THROWS_AS(th.validate(), Error);
  }

  TEST_CASE("golden corpus agrees 100%") {
    std::ifstream in(std::filesystem::path(HYPER_TEST_DATA_DIR) / "autolabel_golden.jsonl");
    REQUIRE(in.good());
    std::string line;
    int trajectories = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      std::vector<Vec2> pts;
      for (const auto& p : j["points"]) pts.emplace_back(p[0].get<double>(), p[1].get<double>());
      const auto got = auto_label(pts, LabelThresholds{});
      const auto want = j["labels"].get<std::vector<int>>();
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        INFO(j["id"].get<std::string>(), " step ", i);
        CHECK(got[i].value == want[i]);
      }
      ++trajectories;
    }
    CHECK(trajectories == 50);
  }

  TEST_CASE("perturb_labels changes exactly round(fraction * total) labels") {
    const auto clean = generate_synthetic(100, 3, default_mix());
    const auto noisy = perturb_labels(clean, 0.05, 17);
    int changed = 0;
    for (std::size_t r = 0; r < clean.size(); ++r) {
      CHECK(noisy[r].observed == clean[r].observed);
      CHECK(noisy[r].future == clean[r].future);
      for (std::size_t t = 0; t < clean[r].future_modes.size(); ++t) {
        changed += noisy[r].future_modes[t] != clean[r].future_modes[t];
      }
    }
    CHECK(changed == 150);
    CHECK(perturb_labels(clean, 0.05, 17) == noisy);
  }

  TEST_CASE("perturb fraction 0 and 1") {
    const auto clean = generate_synthetic(20, 3, default_mix());
    CHECK(perturb_labels(clean, 0.0, 1) == clean);
    const auto all = perturb_labels(clean, 1.0, 1);
    for (std::size_t r = 0; r < clean.size(); ++r) {
      for (std::size_t t = 0; t < clean[r].future_modes.size(); ++t) {
        CHECK(all[r].future_modes[t] != clean[r].future_modes[t]);
        CHECK(all[r].future_modes[t].value < modes::kDefaultVocabSize);
      }
    }
    CHECK_THROWS_AS(perturb_labels(clean, 1.5, 1), Error);
  }
}
