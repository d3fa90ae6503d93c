#include "gcg/model/labels.hpp"

#include "gcg/errors.hpp"

namespace gcg {

Labels make_labels(const EpisodeSlice& slice, const GraphConfig& cfg, Rng& rng) {
  const int H = cfg.model_horizon;
  const int n = static_cast<int>(slice.actions.size());
  if (n == 0) throw UsageError("make_labels: empty slice");
  if (n > H) throw UsageError("make_labels: slice longer than the model horizon");
  if (slice.rewards.size() != slice.actions.size() || slice.collisions.size() != slice.actions.size()) {
    throw UsageError("make_labels: slice spans disagree on length");
  }
  if (n < H && !slice.terminated) {
    throw UsageError("make_labels: short slice without termination");
  }

  Labels out;
  out.y.resize(H, 0.0);
  out.mask.resize(H, 1.0);
  out.actions.assign(slice.actions.begin(), slice.actions.end());
  out.actions.resize(H, 0.0);
  out.terminated = slice.terminated;

  bool collided = false;
  for (int h = 0; h < n; ++h) {
    collided = collided || slice.collisions[h] != 0;
    out.y[h] = cfg.output_mode == OutputMode::collision ? (collided ? 1.0 : 0.0) : slice.rewards[h];
  }

  if (n < H) {
    if (cfg.label_extension == LabelExtension::clip) {
      for (int h = n; h < H; ++h) out.mask[h] = 0.0;
      out.terminal_step = n - 1;
    } else {
      out.extended = true;
      double persisted = cfg.output_mode == OutputMode::collision ? out.y[n - 1] : 0.0;
      for (int h = n; h < H; ++h) {
        out.y[h] = persisted;
        out.actions[h] = rng.uniform(-slice.action_bound, slice.action_bound);
      }
      out.terminal_step = H - 1;
    }
  } else {
    out.terminal_step = H - 1;
  }

  if (slice.terminated) {
    out.terminal_label = cfg.output_mode == OutputMode::collision ? (collided ? 1.0 : 0.0) : 0.0;
    out.needs_bootstrap = false;
  } else {
    out.needs_bootstrap = cfg.bootstrap;
  }
  return out;
}

}  // namespace gcg
