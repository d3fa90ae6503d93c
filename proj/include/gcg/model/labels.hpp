#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gcg/model/config.hpp"
#include "gcg/rng.hpp"

namespace gcg {

// Contiguous steps of one episode starting at the training step t. All spans
// share the same length n <= H; `terminated` marks that the episode ended at
// the last entry (so no further steps exist).
struct EpisodeSlice {
  std::span<const double> actions;
  std::span<const double> rewards;
  std::span<const uint8_t> collisions;
  bool terminated = false;
  double action_bound = 0.5235987755982988;  // for random extension actions
};

// Per-step training labels for one window.
struct Labels {
  std::vector<double> y;        // H entries
  std::vector<double> mask;     // H entries, 1 = contributes to the loss
  std::vector<double> actions;  // H entries, random-filled when extended
  int terminal_step = 0;        // step index whose b-output carries the terminal term
  bool terminated = false;
  bool extended = false;
  // Terminal label. Fixed here for terminated windows (0 in value mode, the
  // persisted collision label otherwise); the trainer overwrites it with the
  // bootstrap estimate for ongoing windows.
  double terminal_label = 0.0;
  bool needs_bootstrap = false;
  // When set, the value-mode loss compares J directly against this target
  // (the N-step / double-Q path).
  std::optional<double> override_target;
};

// Builds labels per the configured output mode. Value mode copies rewards;
// collision mode emits the collision-at-or-before indicator. Windows shorter
// than H are clipped (masked) or extended (random actions, zero rewards /
// persisted collision labels).
Labels make_labels(const EpisodeSlice& slice, const GraphConfig& cfg, Rng& rng);

}  // namespace gcg
