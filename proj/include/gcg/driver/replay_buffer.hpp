#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "gcg/model/nav_model.hpp"
#include "gcg/rng.hpp"
#include "gcg/sim/simulator.hpp"

namespace gcg {

// One recorded time step.
struct Experience {
  Frame frame;
  double action = 0.0;     // radians
  double reward = 0.0;     // m/s
  bool collision = false;
  bool done = false;       // collision or episode cap
  int64_t episode_id = 0;
  int32_t step_index = 0;  // within the episode
};

enum class ReplayMode { uniform, prioritized };

// FIFO ring buffer over experiences with window sampling. A window is H
// consecutive steps of one episode, or a shorter tail that ends the episode.
// Frame stacks are assembled from up to three preceding frames of the same
// episode, zero-padded at episode starts.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int64_t capacity);

  void push(Experience e);

  int64_t size() const { return static_cast<int64_t>(buf_.size()); }
  int64_t begin_index() const { return base_; }
  int64_t end_index() const { return base_ + size(); }
  int64_t collision_count() const { return static_cast<int64_t>(collision_ids_.size()); }
  const Experience& at(int64_t global_index) const;

  struct Window {
    int64_t start = 0;
    int len = 0;
    bool terminated = false;
  };

  // True if a window of up to `horizon` steps starting at `start` is usable:
  // its frame stack is assembled from in-buffer frames, it stays within one
  // episode, and (when `need_next`) the observation `horizon` steps ahead
  // exists for non-terminated windows.
  std::optional<Window> window_at(int64_t start, int horizon, bool need_next) const;

  // Uniform over valid window starts. Throws UsageError when empty.
  Window sample_window(int horizon, bool need_next, Rng& rng) const;

  // Uniform draws; in prioritized mode ceil(batch/2) of them come from
  // windows whose slice terminates in a collision (with replacement when
  // scarce, uniform fallback when the buffer has no collisions yet).
  std::vector<Window> sample_minibatch(int batch, int horizon, ReplayMode mode, bool need_next,
                                       Rng& rng) const;

  // Frame stack observed at `global_index` (the four frames ending there).
  ObsStack stack_at(int64_t global_index) const;

  bool has_valid_window(int horizon, bool need_next) const;

 private:
  bool stack_ok(int64_t start) const;
  std::optional<Window> collision_window(int64_t collision_id, int horizon, Rng& rng) const;

  std::deque<Experience> buf_;
  std::deque<int64_t> collision_ids_;
  int64_t base_ = 0;
  int64_t capacity_;
};

}  // namespace gcg
