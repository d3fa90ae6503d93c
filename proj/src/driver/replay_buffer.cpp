#include "gcg/driver/replay_buffer.hpp"

#include <algorithm>

#include "gcg/errors.hpp"

namespace gcg {

ReplayBuffer::ReplayBuffer(int64_t capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("replay capacity must be >= 1");
}

void ReplayBuffer::push(Experience e) {
  if (e.collision && !e.done) throw UsageError("collision experiences must be terminal");
  if (e.collision) collision_ids_.push_back(base_ + size());
  buf_.push_back(std::move(e));
  while (size() > capacity_) {
    buf_.pop_front();
    ++base_;
    while (!collision_ids_.empty() && collision_ids_.front() < base_) collision_ids_.pop_front();
  }
}

const Experience& ReplayBuffer::at(int64_t global_index) const {
  if (global_index < base_ || global_index >= end_index()) throw UsageError("experience index out of range");
  return buf_[static_cast<size_t>(global_index - base_)];
}

bool ReplayBuffer::stack_ok(int64_t start) const {
  const Experience& e = at(start);
  int lookback = std::min(3, e.step_index);
  return start - lookback >= base_;
}

std::optional<ReplayBuffer::Window> ReplayBuffer::window_at(int64_t start, int horizon,
                                                            bool need_next) const {
  if (start < base_ || start >= end_index()) return std::nullopt;
  if (!stack_ok(start)) return std::nullopt;
  const int64_t episode = at(start).episode_id;
  Window w;
  w.start = start;
  for (int h = 0; h < horizon; ++h) {
    int64_t idx = start + h;
    if (idx >= end_index() || at(idx).episode_id != episode) break;
    w.len = h + 1;
    if (at(idx).done) {
      w.terminated = true;
      break;
    }
  }
  if (w.len == 0) return std::nullopt;
  if (!w.terminated) {
    if (w.len < horizon) return std::nullopt;  // episode continues past buffered data
    if (need_next) {
      int64_t next = start + horizon;
      if (next >= end_index() || at(next).episode_id != episode) return std::nullopt;
    }
  }
  return w;
}

ReplayBuffer::Window ReplayBuffer::sample_window(int horizon, bool need_next, Rng& rng) const {
  if (buf_.empty()) throw UsageError("sampling from an empty replay buffer");
  const int64_t n = size();
  for (int attempt = 0; attempt < 256; ++attempt) {
    int64_t start = base_ + rng.uniform_int64(n);
    if (auto w = window_at(start, horizon, need_next)) return *w;
  }
  // Scarce valid windows: enumerate.
  std::vector<Window> valid;
  for (int64_t start = base_; start < end_index(); ++start) {
    if (auto w = window_at(start, horizon, need_next)) valid.push_back(*w);
  }
  if (valid.empty()) throw UsageError("replay buffer holds no valid training window");
  return valid[static_cast<size_t>(rng.uniform_int64(static_cast<int64_t>(valid.size())))];
}

std::optional<ReplayBuffer::Window> ReplayBuffer::collision_window(int64_t collision_id, int horizon,
                                                                   Rng& rng) const {
  // Window start uniform over starts whose slice ends at the collision step.
  int64_t lo = std::max(base_, collision_id - horizon + 1);
  std::vector<int64_t> starts;
  for (int64_t s = lo; s <= collision_id; ++s) {
    auto w = window_at(s, horizon, false);
    if (w && w->terminated && s + w->len - 1 == collision_id) starts.push_back(s);
  }
  if (starts.empty()) return std::nullopt;
  int64_t s = starts[static_cast<size_t>(rng.uniform_int64(static_cast<int64_t>(starts.size())))];
  return window_at(s, horizon, false);
}

std::vector<ReplayBuffer::Window> ReplayBuffer::sample_minibatch(int batch, int horizon, ReplayMode mode,
                                                                 bool need_next, Rng& rng) const {
  if (batch < 1) throw UsageError("batch size must be >= 1");
  std::vector<Window> out;
  out.reserve(batch);
  int from_collisions = 0;
  if (mode == ReplayMode::prioritized && !collision_ids_.empty()) {
    from_collisions = (batch + 1) / 2;
  }
  for (int i = 0; i < from_collisions; ++i) {
    std::optional<Window> w;
    for (int attempt = 0; attempt < 64 && !w; ++attempt) {
      int64_t cid = collision_ids_[static_cast<size_t>(
          rng.uniform_int64(static_cast<int64_t>(collision_ids_.size())))];
      w = collision_window(cid, horizon, rng);
    }
    if (!w) w = sample_window(horizon, need_next, rng);
    out.push_back(*w);
  }
  while (static_cast<int>(out.size()) < batch) out.push_back(sample_window(horizon, need_next, rng));
  return out;
}

ObsStack ReplayBuffer::stack_at(int64_t global_index) const {
  const Experience& e = at(global_index);
  ObsStack stack = ObsStack::zeros(e.frame.rows, e.frame.cols);
  const size_t frame_sz = static_cast<size_t>(e.frame.rows) * e.frame.cols;
  for (int k = 0; k < 4; ++k) {
    int offset = 3 - k;  // slot 3 = newest
    if (e.step_index - offset < 0) continue;
    int64_t idx = global_index - offset;
    if (idx < base_) throw UsageError("frame stack reaches evicted experiences");
    const Experience& src = at(idx);
    double* dst = stack.data.data() + static_cast<size_t>(k) * frame_sz;
    for (size_t i = 0; i < frame_sz; ++i) dst[i] = src.frame.pixels[i] / 255.0;
  }
  return stack;
}

bool ReplayBuffer::has_valid_window(int horizon, bool need_next) const {
  for (int64_t start = base_; start < end_index(); ++start) {
    if (window_at(start, horizon, need_next)) return true;
  }
  return false;
}

}  // namespace gcg
