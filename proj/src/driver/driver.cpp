#include "gcg/driver/driver.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>

#include "gcg/checkpoint.hpp"
#include "gcg/errors.hpp"
#include "gcg/model/bootstrap.hpp"
#include "gcg/model/labels.hpp"
#include "gcg/model/loss.hpp"

namespace gcg {

namespace {

// Planner settings reused for target-side maximisation (no exploration).
PolicyConfig greedy_planner(const PolicyConfig& p) {
  PolicyConfig g = p;
  g.epsilon = DecaySchedule{0.0, 0.0, 1};
  g.noise_std = DecaySchedule{0.0, 0.0, 1};
  return g;
}

class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& path, bool real_clock, double dt)
      : os_(path), real_clock_(real_clock), dt_(dt), t0_(std::chrono::steady_clock::now()) {
    if (!os_) throw ConfigError("cannot open metrics file: " + path.string());
    os_ << "step,episode,distance_m,reward_sum,collision,loss_mean,eps,wall_clock_s\n";
  }

  void row(int64_t step, int64_t episode, double distance, double reward_sum, int collision,
           double loss_mean, double eps) {
    double wall;
    if (real_clock_) {
      wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    } else {
      wall = static_cast<double>(step) * dt_;
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.6f,%.6f,%d,%.8f,%.6f,%.3f\n",
                  static_cast<long long>(step), static_cast<long long>(episode), distance, reward_sum,
                  collision, loss_mean, eps, wall);
    os_ << buf;
  }

  void flush() { os_.flush(); }

 private:
  std::ofstream os_;
  bool real_clock_;
  double dt_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace

Trainer::Trainer(const RunConfig& cfg, uint64_t seed)
    : cfg_(cfg), model_(cfg.net, cfg.graph), rng_(seed) {
  online_ = model_.init_params(rng_);
  target_ = online_;
  grad_steps_ = 0;
}

double Trainer::train_step(const ReplayBuffer& buffer) {
  const GraphConfig& g = cfg_.graph;
  const bool baseline_targets = cfg_.targets == TargetRule::double_q || !cfg_.nstep.is_trivial();
  const int window_len = std::max(g.model_horizon, cfg_.nstep.n);
  const bool need_next = g.bootstrap;

  std::vector<ReplayBuffer::Window> windows =
      buffer.sample_minibatch(cfg_.batch_size, window_len, cfg_.replay, need_next, rng_);

  PolicyConfig planner = greedy_planner(cfg_.policy);
  std::vector<ObsStack> stacks;
  std::vector<Labels> labels;
  stacks.reserve(windows.size());
  labels.reserve(windows.size());

  for (const auto& w : windows) {
    const int n = std::min(w.len, g.model_horizon);
    std::vector<double> actions(n), rewards(n);
    std::vector<uint8_t> collisions(n);
    for (int h = 0; h < n; ++h) {
      const Experience& e = buffer.at(w.start + h);
      actions[h] = e.action;
      rewards[h] = e.reward;
      collisions[h] = e.collision ? 1 : 0;
    }
    const bool model_slice_terminated = w.terminated && w.len <= g.model_horizon;
    EpisodeSlice slice{actions, rewards, collisions, model_slice_terminated, cfg_.policy.max_steer};
    Labels l = make_labels(slice, g, rng_);

    if (baseline_targets) {
      std::vector<double> all_rewards(w.len);
      for (int h = 0; h < w.len; ++h) all_rewards[h] = buffer.at(w.start + h).reward;
      std::vector<double> next_values;
      if (!w.terminated) {
        next_values.assign(cfg_.nstep.n, 0.0);
        for (int horizon = 1; horizon <= cfg_.nstep.n; ++horizon) {
          if (cfg_.nstep.weights[horizon - 1] == 0.0) continue;
          ObsStack next_obs = buffer.stack_at(w.start + horizon);
          next_values[horizon - 1] =
              cfg_.targets == TargetRule::double_q
                  ? double_q_target(model_, online_, target_, next_obs, planner, rng_)
                  : compute_bootstrap(model_, target_, next_obs, planner, rng_);
        }
      }
      l.override_target = nstep_weighted_return(all_rewards, next_values, g.discount, cfg_.nstep);
      l.needs_bootstrap = false;
    } else if (l.needs_bootstrap) {
      ObsStack next_obs = buffer.stack_at(w.start + g.model_horizon);
      l.terminal_label = compute_bootstrap(model_, target_, next_obs, planner, rng_);
      l.needs_bootstrap = false;
    }

    stacks.push_back(buffer.stack_at(w.start));
    labels.push_back(std::move(l));
  }

  const int B = static_cast<int>(windows.size());
  Tensor actions({g.model_horizon, B});
  for (int i = 0; i < B; ++i) {
    for (int h = 0; h < g.model_horizon; ++h) actions.at(h, i) = labels[i].actions[h];
  }

  Prediction pred = model_.predict(online_, stacks, actions);
  Tape::ValueId loss_id = build_loss(pred, labels, g);
  const double loss = pred.tape.val(loss_id).value();
  pred.tape.backward(loss_id);
  online_.adam_step(cfg_.adam);
  grad_steps_ += 1;

  if (g.bootstrap) {
    if (g.polyak_tau > 0.0) {
      sync_target(online_, target_, SyncMode::polyak, g.polyak_tau);
    } else if (grad_steps_ % g.target_sync_period == 0) {
      sync_target(online_, target_, SyncMode::hard);
    }
  }
  return loss;
}

Actor::Actor(const RunConfig& cfg, World world, uint64_t seed)
    : cfg_(cfg), model_(cfg.net, cfg.graph), sim_(std::move(world), cfg.sim), rng_(seed) {
  state_ = sim_.initial_state(rng_.next_u64());
  start_episode();
}

void Actor::start_episode() {
  stack_ = ObsStack::zeros(cfg_.sim.ray_mode ? 1 : cfg_.sim.frame_rows,
                           cfg_.sim.ray_mode ? cfg_.sim.rays : cfg_.sim.frame_cols);
  current_frame_ = sim_.render(state_);
  stack_.push_frame(current_frame_);
  step_in_episode_ = 0;
  episode_reward_ = 0.0;
}

Actor::Outcome Actor::act(ParamStore& params, int64_t step, bool greedy) {
  PlanResult plan = cfg_.policy.use_cem ? select_action_cem(model_, params, stack_, cfg_.policy, rng_)
                                        : select_action_shooting(model_, params, stack_, cfg_.policy, rng_);
  std::vector<double> actions = plan.actions;
  if (!greedy) actions = explore(std::move(actions), cfg_.policy, step, rng_);

  Frame obs_frame = current_frame_;
  StepResult sr = sim_.step(state_, actions[0]);
  episode_reward_ += sr.reward;

  Outcome out;
  out.exp = Experience{std::move(obs_frame), actions[0], sr.reward,  sr.collision,
                       sr.done,              episode_id_, step_in_episode_};
  out.episode_id = episode_id_;
  step_in_episode_ += 1;

  if (sr.done) {
    out.episode_end = true;
    out.episode_distance = sr.odometer;
    out.episode_reward = episode_reward_;
    sim_.reset(state_, cfg_.sim_mode);
    episode_id_ += 1;
    start_episode();
  } else {
    current_frame_ = sr.frame;
    stack_.push_frame(current_frame_);
  }
  return out;
}

namespace {

RunResult run_sync(const RunConfig& cfg, uint64_t seed, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  World world = load_world(cfg.world_file, cfg.sim.car_radius);

  Rng master(seed);
  Trainer trainer(cfg, master.next_u64());
  Actor actor(cfg, world, master.next_u64());
  ReplayBuffer buffer(cfg.buffer_capacity);

  RunResult res;
  res.metrics_path = out_dir / "metrics.csv";
  MetricsWriter metrics(res.metrics_path, /*real_clock=*/false, cfg.sim.dt);
  auto t0 = std::chrono::steady_clock::now();

  double loss_sum = 0.0;
  int64_t loss_count = 0;
  std::deque<double> recent_dist, recent_reward;

  const int window_len = std::max(cfg.graph.model_horizon, cfg.nstep.n);
  bool trainable = false;
  for (int64_t t = 0; t < cfg.total_steps; ++t) {
    Actor::Outcome out = actor.act(trainer.online(), t);
    const bool ep_collision = out.exp.collision;
    buffer.push(std::move(out.exp));

    if (!trainable && buffer.size() >= cfg.min_buffer) {
      trainable = buffer.has_valid_window(window_len, cfg.graph.bootstrap);
    }
    if (cfg.grad_steps_per_env_step > 0 && trainable) {
      for (int gstep = 0; gstep < cfg.grad_steps_per_env_step; ++gstep) {
        double loss;
        try {
          loss = trainer.train_step(buffer);
        } catch (const TrainingError&) {
          save_checkpoint(trainer.online(), out_dir / ("ckpt_abort_" + std::to_string(t + 1) + ".gcg"));
          metrics.flush();
          throw;
        }
        loss_sum += loss;
        loss_count += 1;
      }
    }

    const double eps = cfg.policy.epsilon.at(t);
    if (out.episode_end) {
      res.episodes += 1;
      recent_dist.push_back(out.episode_distance);
      recent_reward.push_back(out.episode_reward);
      if (recent_dist.size() > 10) {
        recent_dist.pop_front();
        recent_reward.pop_front();
      }
      metrics.row(t + 1, out.episode_id, out.episode_distance, out.episode_reward, ep_collision ? 1 : 0,
                  loss_count ? loss_sum / loss_count : 0.0, eps);
    }
    if ((t + 1) % cfg.eval_interval == 0) {
      double mean_dist = 0.0, mean_rew = 0.0;
      for (double d : recent_dist) mean_dist += d;
      for (double r : recent_reward) mean_rew += r;
      if (!recent_dist.empty()) {
        mean_dist /= static_cast<double>(recent_dist.size());
        mean_rew /= static_cast<double>(recent_reward.size());
      }
      metrics.row(t + 1, -1, mean_dist, mean_rew, -1, loss_count ? loss_sum / loss_count : 0.0, eps);
      loss_sum = 0.0;
      loss_count = 0;
    }
    if (cfg.checkpoint_interval > 0 && (t + 1) % cfg.checkpoint_interval == 0) {
      auto path = out_dir / ("ckpt_" + std::to_string(t + 1) + ".gcg");
      save_checkpoint(trainer.online(), path);
      res.checkpoints.push_back(path);
    }
  }
  if (res.checkpoints.empty() || (cfg.total_steps % cfg.checkpoint_interval) != 0) {
    auto path = out_dir / ("ckpt_" + std::to_string(cfg.total_steps) + ".gcg");
    save_checkpoint(trainer.online(), path);
    res.checkpoints.push_back(path);
  }
  res.steps = cfg.total_steps;
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  metrics.flush();
  return res;
}

}  // namespace

RunResult run(const RunConfig& cfg, uint64_t seed, const std::filesystem::path& out_dir) {
  cfg.validate();
  return run_sync(cfg, seed, out_dir);
}

RunResult run_async(const RunConfig& cfg, uint64_t seed, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  World world = load_world(cfg.world_file, cfg.sim.car_radius);

  Rng master(seed);
  Trainer trainer(cfg, master.next_u64());
  Actor actor(cfg, world, master.next_u64());
  ReplayBuffer buffer(cfg.buffer_capacity);

  RunResult res;
  res.metrics_path = out_dir / "metrics.csv";
  MetricsWriter metrics(res.metrics_path, /*real_clock=*/true, cfg.sim.dt);
  auto t0 = std::chrono::steady_clock::now();

  std::mutex mu;
  std::shared_ptr<const ParamStore> snapshot = std::make_shared<ParamStore>(trainer.online());
  std::deque<Experience> inbox;
  bool actor_done = false;

  std::thread actor_thread([&] {
    for (int64_t t = 0; t < cfg.total_steps; ++t) {
      std::shared_ptr<const ParamStore> params;
      {
        std::lock_guard<std::mutex> lock(mu);
        params = snapshot;
      }
      ParamStore local = *params;  // planning mutates nothing; copy keeps the surface const
      Actor::Outcome out = actor.act(local, t);
      const bool ep_collision = out.exp.collision;
      std::lock_guard<std::mutex> lock(mu);
      if (out.episode_end) {
        res.episodes += 1;
        metrics.row(t + 1, out.episode_id, out.episode_distance, out.episode_reward,
                    ep_collision ? 1 : 0, 0.0, cfg.policy.epsilon.at(t));
      }
      inbox.push_back(std::move(out.exp));
    }
    std::lock_guard<std::mutex> lock(mu);
    actor_done = true;
  });

  const int window_len = std::max(cfg.graph.model_horizon, cfg.nstep.n);
  int64_t trained = 0;
  while (true) {
    {
      std::lock_guard<std::mutex> lock(mu);
      while (!inbox.empty()) {
        buffer.push(std::move(inbox.front()));
        inbox.pop_front();
      }
      if (actor_done && inbox.empty()) break;
    }
    if (buffer.size() >= cfg.min_buffer && buffer.has_valid_window(window_len, cfg.graph.bootstrap)) {
      double loss = trainer.train_step(buffer);
      trained += 1;
      if (trained % cfg.params_publish_period == 0) {
        auto fresh = std::make_shared<const ParamStore>(trainer.online());
        std::lock_guard<std::mutex> lock(mu);
        snapshot = std::move(fresh);
        metrics.row(trained, -1, 0.0, 0.0, -1, loss, 0.0);
      }
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  }
  actor_thread.join();

  auto path = out_dir / ("ckpt_" + std::to_string(cfg.total_steps) + ".gcg");
  save_checkpoint(trainer.online(), path);
  res.checkpoints.push_back(path);
  res.steps = cfg.total_steps;
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  metrics.flush();
  return res;
}

}  // namespace gcg
