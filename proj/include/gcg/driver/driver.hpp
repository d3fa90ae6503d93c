#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "gcg/cli/run_config.hpp"
#include "gcg/driver/replay_buffer.hpp"

namespace gcg {

// Samples minibatches, builds the configured loss, applies Adam, and keeps
// the target network in sync. Owns the online and target parameters.
class Trainer {
 public:
  Trainer(const RunConfig& cfg, uint64_t seed);

  // One gradient step on a minibatch drawn from `buffer`; returns the loss.
  double train_step(const ReplayBuffer& buffer);

  ParamStore& online() { return online_; }
  const ParamStore& online() const { return online_; }
  ParamStore& target() { return target_; }
  const NavModel& model() const { return model_; }
  int64_t grad_steps() const { return grad_steps_; }

 private:
  RunConfig cfg_;
  NavModel model_;
  ParamStore online_;
  ParamStore target_;
  Rng rng_;
  int64_t grad_steps_ = 0;
};

// Plans with the latest parameters, applies exploration, advances the
// simulator and keeps episode bookkeeping.
class Actor {
 public:
  struct Outcome {
    Experience exp;
    bool episode_end = false;
    int64_t episode_id = 0;
    double episode_distance = 0.0;
    double episode_reward = 0.0;
  };

  Actor(const RunConfig& cfg, World world, uint64_t seed);

  Outcome act(ParamStore& params, int64_t step, bool greedy = false);

  const Simulator& sim() const { return sim_; }

 private:
  void start_episode();

  RunConfig cfg_;
  NavModel model_;
  Simulator sim_;
  SimState state_;
  ObsStack stack_;
  Frame current_frame_;
  Rng rng_;
  int64_t episode_id_ = 0;
  int32_t step_in_episode_ = 0;
  double episode_reward_ = 0.0;
};

struct RunResult {
  std::filesystem::path metrics_path;
  std::vector<std::filesystem::path> checkpoints;
  int64_t episodes = 0;
  int64_t steps = 0;
  double wall_seconds = 0.0;
};

// Algorithm loop: observe, plan via J, execute the first action with
// exploration, record the experience, take g gradient steps. Single-threaded
// and fully deterministic for a fixed seed.
RunResult run(const RunConfig& cfg, uint64_t seed, const std::filesystem::path& out_dir);

// Asynchronous variant: one actor thread and one trainer thread exchanging
// parameter snapshots and experience batches. Not deterministic.
RunResult run_async(const RunConfig& cfg, uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace gcg
