#include "gcg/cli/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "gcg/checkpoint.hpp"
#include "gcg/cli/csv.hpp"
#include "gcg/errors.hpp"

namespace gcg {

EvalStats stats_from(std::vector<double> distances) {
  EvalStats s;
  s.episodes = static_cast<int>(distances.size());
  if (distances.empty()) return s;
  double sum = 0.0;
  for (double d : distances) {
    sum += d;
    s.max = std::max(s.max, d);
  }
  s.mean = sum / static_cast<double>(distances.size());
  std::vector<double> sorted = distances;
  std::sort(sorted.begin(), sorted.end());
  size_t n = sorted.size();
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.distances = std::move(distances);
  return s;
}

EvalStats evaluate(const RunConfig& cfg, const std::filesystem::path& checkpoint, int episodes,
                   uint64_t seed) {
  RunConfig eval_cfg = cfg;
  eval_cfg.sim_mode = ResetMode::episodic;
  eval_cfg.validate();

  NavModel model(eval_cfg.net, eval_cfg.graph);
  Rng init_rng(seed);
  ParamStore params = model.init_params(init_rng);
  load_checkpoint_into(checkpoint, params);

  World world = load_world(eval_cfg.world_file, eval_cfg.sim.car_radius);
  Actor actor(eval_cfg, std::move(world), seed);

  std::vector<double> distances;
  const int64_t step_cap =
      static_cast<int64_t>(episodes + 1) *
      static_cast<int64_t>(eval_cfg.sim.episode_cap_m / (eval_cfg.sim.speed * eval_cfg.sim.dt) + 2);
  int64_t t = 0;
  while (static_cast<int>(distances.size()) < episodes && t < step_cap) {
    Actor::Outcome out = actor.act(params, t, /*greedy=*/true);
    if (out.episode_end) distances.push_back(out.episode_distance);
    ++t;
  }
  return stats_from(std::move(distances));
}

EvalStats evaluate_random(const RunConfig& cfg, int episodes, uint64_t seed) {
  World world = load_world(cfg.world_file, cfg.sim.car_radius);
  Simulator sim(std::move(world), cfg.sim);
  SimState state = sim.initial_state(seed);
  Rng rng(seed ^ 0x5eedULL);
  std::vector<double> distances;
  while (static_cast<int>(distances.size()) < episodes) {
    double a = rng.uniform(-cfg.sim.max_steer, cfg.sim.max_steer);
    StepResult r = sim.step(state, a);
    if (r.done) {
      distances.push_back(r.odometer);
      sim.reset(state, ResetMode::episodic);
    }
  }
  return stats_from(std::move(distances));
}

std::vector<std::pair<int64_t, double>> distance_curve(const std::filesystem::path& metrics_csv,
                                                       int64_t grid_interval, int64_t total_steps,
                                                       int smooth_window) {
  CsvTable t = read_csv(metrics_csv);
  int step_col = t.column("step");
  int ep_col = t.column("episode");
  int dist_col = t.column("distance_m");
  int coll_col = t.column("collision");
  if (step_col < 0 || ep_col < 0 || dist_col < 0 || coll_col < 0) {
    throw ConfigError("metrics csv " + metrics_csv.string() + " lacks the episode columns");
  }
  std::vector<std::pair<int64_t, double>> episodes;  // (step, distance)
  for (const auto& row : t.rows) {
    if (row[ep_col] >= 0 && row[coll_col] >= 0) {
      episodes.emplace_back(static_cast<int64_t>(row[step_col]), row[dist_col]);
    }
  }
  std::vector<std::pair<int64_t, double>> curve;
  size_t idx = 0;
  std::vector<double> window;
  for (int64_t x = grid_interval; x <= total_steps; x += grid_interval) {
    while (idx < episodes.size() && episodes[idx].first <= x) {
      window.push_back(episodes[idx].second);
      if (static_cast<int>(window.size()) > smooth_window) window.erase(window.begin());
      ++idx;
    }
    double v = 0.0;
    if (!window.empty()) {
      for (double d : window) v += d;
      v /= static_cast<double>(window.size());
    }
    curve.emplace_back(x, v);
  }
  return curve;
}

SweepResult sweep(const RunConfig& cfg, const std::vector<uint64_t>& seeds,
                  const std::filesystem::path& out_dir, int jobs) {
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  std::filesystem::create_directories(out_dir);

  SweepResult result;
  result.seed_metrics.resize(seeds.size());
  std::vector<int> failed(seeds.size(), 0);

  jobs = std::max(1, jobs);
  std::vector<std::thread> workers;
  std::atomic<size_t> next{0};
  auto work = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      auto seed_dir = out_dir / ("seed_" + std::to_string(seeds[i]));
      try {
        RunResult r = cfg.async_mode ? run_async(cfg, seeds[i], seed_dir) : run(cfg, seeds[i], seed_dir);
        result.seed_metrics[i] = r.metrics_path;
      } catch (const TrainingError&) {
        failed[i] = 1;
      }
    }
  };
  if (jobs == 1) {
    work();
  } else {
    for (int j = 0; j < jobs; ++j) workers.emplace_back(work);
    for (auto& w : workers) w.join();
  }

  std::vector<std::vector<std::pair<int64_t, double>>> curves;
  std::vector<uint64_t> ok_seeds;
  for (size_t i = 0; i < seeds.size(); ++i) {
    if (failed[i]) {
      result.partial = true;
      continue;
    }
    curves.push_back(distance_curve(result.seed_metrics[i], cfg.eval_interval, cfg.total_steps,
                                    cfg.smooth_window));
    ok_seeds.push_back(seeds[i]);
  }
  if (curves.empty()) throw TrainingError("every sweep seed aborted");

  result.aggregate_csv = out_dir / "aggregate.csv";
  std::ofstream os(result.aggregate_csv);
  os << "step,mean,min,max";
  for (uint64_t s : ok_seeds) os << ",seed_" << s;
  os << "\n";
  for (size_t row = 0; row < curves[0].size(); ++row) {
    double mn = curves[0][row].second, mx = mn, sum = 0.0;
    for (const auto& c : curves) {
      double v = c[row].second;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      sum += v;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%lld,%.6f,%.6f,%.6f",
                  static_cast<long long>(curves[0][row].first), sum / curves.size(), mn, mx);
    os << buf;
    for (const auto& c : curves) {
      std::snprintf(buf, sizeof(buf), ",%.6f", c[row].second);
      os << buf;
    }
    os << "\n";
  }
  return result;
}

}  // namespace gcg
