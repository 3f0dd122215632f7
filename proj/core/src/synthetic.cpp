#include "hyper/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "hyper/rng.hpp"

namespace hyper {

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kLaneFollow: return "lane_follow";
    case ScenarioKind::kLaneChangeMidHorizon: return "lane_change_mid_horizon";
    case ScenarioKind::kTurnAfterFollow: return "turn_after_follow";
    case ScenarioKind::kDecelerateToStop: return "decelerate_to_stop";
  }
  return "unknown";
}

ScenarioKind scenario_from_string(std::string_view name) {
  for (auto k : {ScenarioKind::kLaneFollow, ScenarioKind::kLaneChangeMidHorizon,
                 ScenarioKind::kTurnAfterFollow, ScenarioKind::kDecelerateToStop}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown scenario kind '" + std::string(name) + "'");
}

ScenarioMix default_mix() {
  return {{ScenarioKind::kLaneFollow, 0.4},
          {ScenarioKind::kLaneChangeMidHorizon, 0.2},
          {ScenarioKind::kTurnAfterFollow, 0.2},
          {ScenarioKind::kDecelerateToStop, 0.2}};
}

std::string format_mix(const ScenarioMix& mix) {
  std::ostringstream os;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (i) os << ',';
    os << to_string(mix[i].first) << '=' << mix[i].second;
  }
  return os.str();
}

namespace {

void validate_mix(const ScenarioMix& mix) {
  if (mix.empty()) throw Error(ErrorKind::kInvalidArgument, "scenario mix is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (!(mix[i].second >= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "scenario proportions must be non-negative");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (mix[j].first == mix[i].first) {
        throw Error(ErrorKind::kInvalidArgument,
                    "scenario kind listed twice: " + std::string(to_string(mix[i].first)));
      }
    }
    total += mix[i].second;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidArgument, "scenario proportions must sum to 1");
  }
}

}  // namespace

ScenarioMix parse_mix(std::string_view text) {
  ScenarioMix mix;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kInvalidArgument, "mix entry '" + item + "' is not kind=proportion");
    }
    double p = 0.0;
    try {
      p = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidArgument, "mix entry '" + item + "' has a bad proportion");
    }
    mix.emplace_back(scenario_from_string(item.substr(0, eq)), p);
  }
  validate_mix(mix);
  return mix;
}

namespace {

std::vector<ScenarioKind> allocate_kinds(int count, const ScenarioMix& mix) {
  std::vector<int> counts(mix.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const double exact = mix[i].second * count;
    counts[i] = static_cast<int>(std::floor(exact + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; assigned < count; ++i, ++assigned) {
    ++counts[remainders[static_cast<std::size_t>(i) % remainders.size()].second];
  }
  std::vector<ScenarioKind> kinds;
  for (std::size_t i = 0; i < mix.size(); ++i) kinds.insert(kinds.end(), counts[i], mix[i].first);
  return kinds;
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_open(rng); }

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

constexpr double kDeg = M_PI / 180.0;
constexpr double kLaneWidth = 3.5;

struct StepControl {
  double speed = 0.0;     // m/s during the step
  double yaw_rate = 0.0;  // rad/s during the step
};

Polyline straight_line(double x0, double x1, double y, double spacing = 5.0) {
  Polyline line;
  for (double x = x0; x <= x1 + 1e-9; x += spacing) line.emplace_back(x, y);
  return line;
}

/// Straight approach along y = 0 up to x_turn, then a 90 degree arc, then a
/// straight exit.
Polyline turn_lane(double x_turn, double radius, int direction) {
  Polyline line = straight_line(-40.0, x_turn, 0.0);
  const Vec2 center(x_turn, direction * radius);
  for (int k = 1; k <= 6; ++k) {
    const double a = (M_PI / 2.0) * k / 6.0;
    line.emplace_back(center.x() + radius * std::sin(a),
                      center.y() - direction * radius * std::cos(a));
  }
  const Vec2 exit = line.back();
  for (int k = 1; k <= 4; ++k) line.emplace_back(exit.x(), exit.y() + direction * 5.0 * k);
  return line;
}

struct SceneDraft {
  std::vector<Vec2> observed;
  std::vector<Vec2> future;
  std::vector<Polyline> centerlines;
};

SceneDraft draft_scene(ScenarioKind kind, Rng& rng, const SyntheticOptions& opt) {
  const double dt = opt.thresholds.step_seconds;
  const int h = opt.horizon;
  std::vector<StepControl> controls(static_cast<std::size_t>(h));

  double v0 = 0.0;
  bool left_lane = uniform_open(rng) < 0.5;
  bool right_lane = uniform_open(rng) < 0.5;
  bool intersection = uniform_open(rng) < 0.3;
  double x_intersection = uniform(rng, 10.0, 50.0);
  double turn_radius = uniform(rng, 8.0, 15.0);

  switch (kind) {
    case ScenarioKind::kLaneFollow: {
      v0 = uniform(rng, 3.0, 15.0);
      const double accel = uniform(rng, -0.5, 0.5);
      for (int t = 0; t < h; ++t) controls[t].speed = std::max(1.5, v0 + accel * dt * (t + 1));
      break;
    }
    case ScenarioKind::kLaneChangeMidHorizon: {
      v0 = uniform(rng, 6.0, 14.0);
      const int dir = uniform_open(rng) < 0.5 ? 1 : -1;
      (dir > 0 ? left_lane : right_lane) = true;
      const double rate = uniform(rng, 25.0, 35.0) * kDeg;
      constexpr int kRamp = 4;
      const double psi_max = kRamp * rate * dt;
      double ramp_lateral = 0.0;
      for (int k = 1; k <= kRamp; ++k) ramp_lateral += v0 * dt * std::sin(k * rate * dt);
      const int hold = std::max(
          0, static_cast<int>(std::lround((kLaneWidth - 2.0 * ramp_lateral) /
                                          (v0 * dt * std::sin(psi_max)))));
      const int start = uniform_int(rng, 2, std::max(2, std::min(14, h - 2 * kRamp - 1)));
      for (int t = 0; t < h; ++t) {
        controls[t].speed = v0;
        const int k = t - start;
        if (k >= 0 && k < kRamp) controls[t].yaw_rate = dir * rate;
        if (k >= kRamp + hold && k < 2 * kRamp + hold) controls[t].yaw_rate = -dir * rate;
      }
      break;
    }
    case ScenarioKind::kTurnAfterFollow: {
      v0 = uniform(rng, 4.0, 9.0);
      const int dir = uniform_open(rng) < 0.5 ? 1 : -1;
      const double step_deg = uniform(rng, 3.0, 5.0);
      const double rate = step_deg * kDeg / dt;
      const int start = uniform_int(rng, 4, std::max(4, std::min(20, h - 2)));
      const int turn_steps = static_cast<int>(std::lround(90.0 / step_deg));
      for (int t = 0; t < h; ++t) {
        controls[t].speed = v0;
        if (t >= start && t < start + turn_steps) controls[t].yaw_rate = dir * rate;
      }
      intersection = true;
      x_intersection = v0 * dt * start;
      turn_radius = v0 / rate;
      break;
    }
    case ScenarioKind::kDecelerateToStop: {
      v0 = uniform(rng, 3.0, 9.0);
      const int start = uniform_int(rng, 0, std::max(0, std::min(12, h - 8)));
      const double remaining = (h - start - 3) * dt;
      const double decel = std::max(uniform(rng, 3.0, 6.0), v0 / std::max(remaining, dt));
      double v = v0;
      for (int t = 0; t < h; ++t) {
        if (t >= start) v = std::max(0.0, v - decel * dt);
        controls[t].speed = v;
      }
      break;
    }
  }

  SceneDraft d;
  // Straight observed approach ending at the origin, heading +x.
  const double past_accel = uniform(rng, -0.5, 0.5);
  d.observed.assign(static_cast<std::size_t>(opt.obs_horizon), Vec2::Zero());
  double x = 0.0;
  for (int k = opt.obs_horizon - 2; k >= 0; --k) {
    const double v = std::max(1.5, v0 - past_accel * dt * (opt.obs_horizon - 1 - k));
    x -= v * dt;
    d.observed[static_cast<std::size_t>(k)] = Vec2(x, 0.0);
  }

  Vec2 p = Vec2::Zero();
  double heading = 0.0;
  for (int t = 0; t < h; ++t) {
    heading += controls[t].yaw_rate * dt;
    p += controls[t].speed * dt * Vec2(std::cos(heading), std::sin(heading));
    d.future.push_back(p);
  }

  d.centerlines.push_back(straight_line(-40.0, 80.0, 0.0));
  if (left_lane) d.centerlines.push_back(straight_line(-40.0, 80.0, kLaneWidth));
  if (right_lane) d.centerlines.push_back(straight_line(-40.0, 80.0, -kLaneWidth));
  if (intersection) {
    d.centerlines.push_back(turn_lane(x_intersection, turn_radius, 1));
    d.centerlines.push_back(turn_lane(x_intersection, turn_radius, -1));
  }
  return d;
}

}  // namespace

std::vector<SceneRecord> generate_synthetic(int count, std::uint64_t seed, const ScenarioMix& mix,
                                            const SyntheticOptions& options) {
  if (count < 0) throw Error(ErrorKind::kInvalidArgument, "count must be non-negative");
  validate_mix(mix);
  options.thresholds.validate();
  if (count == 0) return {};

  auto kinds = allocate_kinds(count, mix);
  Rng order_rng(derive_seed(seed, "synthetic.order"));
  for (std::size_t i = kinds.size(); i > 1; --i) {
    std::swap(kinds[i - 1], kinds[uniform_index(order_rng, i)]);
  }

  std::vector<SceneRecord> records;
  records.reserve(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    Rng rng(derive_seed(seed, "synthetic.scene", i));
    SceneDraft d = draft_scene(kinds[i], rng, options);

    SceneRecord r;
    char id[64];
    std::snprintf(id, sizeof id, "syn-%llu-%06zu", static_cast<unsigned long long>(seed), i);
    r.scene_id = id;
    if (options.noise_std > 0.0) {
      for (auto& q : d.observed) q += options.noise_std * Vec2(standard_normal(rng), standard_normal(rng));
      for (auto& q : d.future) q += options.noise_std * Vec2(standard_normal(rng), standard_normal(rng));
      std::vector<Vec2> joined = d.observed;
      joined.insert(joined.end(), d.future.begin(), d.future.end());
      const auto smoothed = smooth_trajectory(joined, options.smoother);
      const auto labels = auto_label(smoothed, options.thresholds);
      r.future_modes.assign(labels.end() - options.horizon, labels.end());
    } else {
      r.future_modes = label_future(d.observed, d.future, options.thresholds);
    }
    r.observed = std::move(d.observed);
    r.future = std::move(d.future);
    r.centerlines = std::move(d.centerlines);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace hyper
