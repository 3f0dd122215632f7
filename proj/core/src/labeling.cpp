#include "hyper/labeling.hpp"

#include <cmath>

#include "hyper/rng.hpp"

namespace hyper {

void LabelThresholds::validate() const {
  if (!(theta_deg > 0.0)) throw Error(ErrorKind::kConfig, "theta must be > 0");
  if (!(v_slow > 0.0) || !(v_fast > v_slow)) {
    throw Error(ErrorKind::kConfig, "thresholds must satisfy v_fast > v_slow > 0");
  }
  if (!(step_seconds > 0.0)) throw Error(ErrorKind::kConfig, "step_seconds must be > 0");
}

namespace {

double wrap_degrees(double deg) {
  deg = std::fmod(deg + 180.0, 360.0);
  if (deg < 0.0) deg += 360.0;
  return deg - 180.0;
}

double heading_deg(const Vec2& d) { return std::atan2(d.y(), d.x()) * 180.0 / M_PI; }

}  // namespace

std::vector<StepKinematics> step_kinematics(const std::vector<Vec2>& trajectory,
                                            const LabelThresholds& thresholds) {
  if (trajectory.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "auto_label needs at least 2 points");
  }
  const std::size_t n = trajectory.size();
  // disp[j] is the displacement into point j, j >= 1.
  std::vector<Vec2> disp(n, Vec2::Zero());
  for (std::size_t j = 1; j < n; ++j) disp[j] = trajectory[j] - trajectory[j - 1];

  const double min_step = thresholds.v_slow * thresholds.step_seconds;
  auto heading_change = [&](std::size_t j) {
    // Change between displacement j and j-1, both j-1 >= 1.
    if (disp[j].norm() <= min_step || disp[j - 1].norm() <= min_step) return 0.0;
    return wrap_degrees(heading_deg(disp[j]) - heading_deg(disp[j - 1]));
  };

  std::vector<StepKinematics> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = std::max<std::size_t>(i, 1);
    out[i].speed = disp[j].norm() / thresholds.step_seconds;
    if (j >= 2) {
      out[i].heading_change_deg = heading_change(j);
    } else {
      out[i].heading_change_deg = n >= 3 ? heading_change(2) : 0.0;
    }
  }
  return out;
}

ModeId classify_step(const StepKinematics& k, const LabelThresholds& thresholds) {
  if (k.heading_change_deg > thresholds.theta_deg) return modes::kLeftTurn;
  if (k.heading_change_deg < -thresholds.theta_deg) return modes::kRightTurn;
  if (k.speed > thresholds.v_fast) return modes::kFastForward;
  if (k.speed > thresholds.v_slow) return modes::kSlowForward;
  return modes::kStop;
}

std::vector<ModeId> auto_label(const std::vector<Vec2>& trajectory,
                               const LabelThresholds& thresholds) {
  thresholds.validate();
  const auto kin = step_kinematics(trajectory, thresholds);
  std::vector<ModeId> labels;
  labels.reserve(kin.size());
  for (const auto& k : kin) labels.push_back(classify_step(k, thresholds));
  return labels;
}

std::vector<ModeId> label_future(const std::vector<Vec2>& observed,
                                 const std::vector<Vec2>& future,
                                 const LabelThresholds& thresholds) {
  std::vector<Vec2> joined;
  joined.reserve(observed.size() + future.size());
  joined.insert(joined.end(), observed.begin(), observed.end());
  joined.insert(joined.end(), future.begin(), future.end());
  auto labels = auto_label(joined, thresholds);
  return {labels.end() - static_cast<std::ptrdiff_t>(future.size()), labels.end()};
}

std::vector<SceneRecord> perturb_labels(std::vector<SceneRecord> records, double fraction,
                                        std::uint64_t seed, int vocab_size) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "perturbation fraction must be in [0, 1]");
  }
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t t = 0; t < records[r].future_modes.size(); ++t) slots.emplace_back(r, t);
  }
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(slots.size())));
  if (count == 0) return records;
  if (vocab_size < 2) {
    throw Error(ErrorKind::kInvalidArgument, "cannot perturb labels with a single-mode vocabulary");
  }

  Rng rng(seed);
  // Partial Fisher-Yates: the first `count` slots become a uniform subset.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + uniform_index(rng, slots.size() - i);
    std::swap(slots[i], slots[j]);
    auto& mode = records[slots[i].first].future_modes[slots[i].second];
    const auto draw = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(vocab_size - 1)));
    mode = ModeId{draw < mode.value ? draw : draw + 1};
  }
  return records;
}

}  // namespace hyper
