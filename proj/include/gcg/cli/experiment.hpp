#pragma once

#include <filesystem>
#include <vector>

#include "gcg/cli/run_config.hpp"
#include "gcg/driver/driver.hpp"

namespace gcg {

struct EvalStats {
  std::vector<double> distances;  // per episode, meters
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
  int episodes = 0;
};

EvalStats stats_from(std::vector<double> distances);

// Greedy (exploration-free) rollout of the checkpointed policy for the
// requested number of episodes under episodic resets.
EvalStats evaluate(const RunConfig& cfg, const std::filesystem::path& checkpoint, int episodes,
                   uint64_t seed);

// Same protocol with uniform random steering (the baseline denominator).
EvalStats evaluate_random(const RunConfig& cfg, int episodes, uint64_t seed);

struct SweepResult {
  std::vector<std::filesystem::path> seed_metrics;
  std::filesystem::path aggregate_csv;
  bool partial = false;  // some seed aborted
};

// Runs each seed (optionally several in parallel worker threads), then emits
// an aggregate curve: per-seed trailing-mean episode distance sampled on the
// eval-interval grid, with mean/min/max across seeds.
SweepResult sweep(const RunConfig& cfg, const std::vector<uint64_t>& seeds,
                  const std::filesystem::path& out_dir, int jobs = 1);

// Curve extraction used by the sweep aggregate: value at each grid step is
// the mean distance of the trailing `smooth_window` episodes finished by
// then (0 until the first episode ends).
std::vector<std::pair<int64_t, double>> distance_curve(const std::filesystem::path& metrics_csv,
                                                       int64_t grid_interval, int64_t total_steps,
                                                       int smooth_window);

}  // namespace gcg
