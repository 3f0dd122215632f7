#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hyper/losses.hpp"
#include "hyper/model.hpp"
#include "hyper/rng.hpp"
#include "hyper/trainer.hpp"
#include "hyper/types.hpp"

namespace hyper::testing {

/// Straight approach to the origin at `speed` m/s, then a gentle left arc.
inline SceneRecord make_scene(int obs = 20, int horizon = 30, int vocab = 5, double speed = 6.0) {
  SceneRecord r;
  r.scene_id = "fixture";
  for (int k = obs - 1; k >= 0; --k) r.observed.emplace_back(-speed * 0.1 * k, 0.0);
  double heading = 0.0;
  Vec2 p = Vec2::Zero();
  for (int t = 0; t < horizon; ++t) {
    if (t >= horizon / 2) heading += 3.0 * M_PI / 180.0;
    p += speed * 0.1 * Vec2(std::cos(heading), std::sin(heading));
    r.future.push_back(p);
    r.future_modes.push_back(ModeId{(t >= horizon / 2 ? 3 : 1) % vocab});
  }
  r.centerlines.push_back({Vec2(-20, 0), Vec2(0, 0), Vec2(20, 0), Vec2(40, 0)});
  r.centerlines.push_back({Vec2(-20, 3.5), Vec2(0, 3.5), Vec2(20, 3.5)});
  return r;
}

inline ModelConfig tiny_config(Variant v = Variant::kFull) {
  ModelConfig c;
  c.vocab_size = 3;
  c.horizon = 3;
  c.hidden_size = 4;
  c.K = 3;
  c.M = 6;
  c.N = 3;
  c.variant = v;
  return c;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst;
  long checked = 0;
};

/// Central differences of the (seeded, training-mode) total loss against the
/// tape gradients, over every entry of every parameter.
/// rel = |a - n| / max(|a|, |n|, floor).
inline GradCheck gradient_check(PhaModel& model, const SceneRecord& record, std::uint64_t seed,
                                double eps = 1e-5, double floor = 1e-6) {
  GradCheck out;
  model.parameters().zero_grad();
  {
    Rng rng(seed);
    accumulate_gradients(record, model, rng, true);
  }
  for (auto* p : model.parameters().all()) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double v = p->value(i);
      p->value(i) = v + eps;
      Rng r1(seed);
      const double up = total_loss(record, model, r1, true).total;
      p->value(i) = v - eps;
      Rng r2(seed);
      const double down = total_loss(record, model, r2, true).total;
      p->value(i) = v;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad(i);
      const double rel =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      ++out.checked;
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = p->name + "[" + std::to_string(i) + "] analytic=" + std::to_string(analytic) +
                    " numeric=" + std::to_string(numeric);
      }
    }
  }
  return out;
}

}  // namespace hyper::testing
