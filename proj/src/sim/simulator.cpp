#include "gcg/sim/simulator.hpp"

#include <cmath>

namespace gcg {

SimState Simulator::initial_state(uint64_t seed) const {
  SimState s;
  s.x = world_.spawn.x;
  s.y = world_.spawn.y;
  s.heading = world_.spawn.heading;
  s.rng = Rng(seed);
  return s;
}

StepResult Simulator::step(SimState& state, double steering) const {
  if (steering < -cfg_.max_steer || steering > cfg_.max_steer) {
    steering = std::clamp(steering, -cfg_.max_steer, cfg_.max_steer);
    state.clamp_warnings += 1;
  }
  const double v = cfg_.speed;
  state.x += v * std::cos(state.heading) * cfg_.dt;
  state.y += v * std::sin(state.heading) * cfg_.dt;
  state.heading += (v / cfg_.wheelbase) * std::tan(steering) * cfg_.dt;

  StepResult r;
  r.collision = world_.collides(state.x, state.y, cfg_.car_radius);
  state.collided = r.collision;
  if (!r.collision) {
    state.odometer += v * cfg_.dt;
    r.reward = v;
  }
  r.done = r.collision || state.odometer >= cfg_.episode_cap_m;
  r.odometer = state.odometer;
  r.frame = render(state);
  return r;
}

Frame Simulator::render(const SimState& state) const {
  const int cols = cfg_.ray_mode ? cfg_.rays : cfg_.frame_cols;
  const int rows = cfg_.ray_mode ? 1 : cfg_.frame_rows;
  const int horizon = cfg_.ray_mode ? 0 : cfg_.horizon_row;
  Frame f;
  f.rows = rows;
  f.cols = cols;
  f.pixels.assign(static_cast<size_t>(rows) * cols, 0);
  const double col_step = cfg_.fov / cols;
  for (int i = 0; i < cols; ++i) {
    double angle = state.heading + cfg_.fov / 2.0 - (i + 0.5) * col_step;
    double intensity = 0.0;
    if (auto d = world_.raycast(state.x, state.y, angle)) {
      intensity = std::clamp(1.0 - *d / cfg_.d_max, 0.0, 1.0);
    }
    auto byte = static_cast<uint8_t>(std::lround(intensity * 255.0));
    for (int r = horizon; r < rows; ++r) f.pixels[static_cast<size_t>(r) * cols + i] = byte;
  }
  return f;
}

bool Simulator::backup(SimState& state, double steer_sign) const {
  SimState trial = state;
  const double steer = steer_sign * cfg_.backup_steer;
  const double sub_dt = cfg_.dt / cfg_.backup_substeps;
  const double v = -cfg_.speed;
  double traveled = 0.0;
  while (traveled < cfg_.backup_distance) {
    trial.x += v * std::cos(trial.heading) * sub_dt;
    trial.y += v * std::sin(trial.heading) * sub_dt;
    trial.heading += (v / cfg_.wheelbase) * std::tan(steer) * sub_dt;
    traveled += cfg_.speed * sub_dt;
    if (world_.collides(trial.x, trial.y, cfg_.car_radius)) return false;
  }
  state.x = trial.x;
  state.y = trial.y;
  state.heading = trial.heading;
  return true;
}

void Simulator::reset(SimState& state, ResetMode mode) const {
  if (mode == ResetMode::episodic) {
    state.x = world_.spawn.x + state.rng.uniform(-cfg_.spawn_noise_pos, cfg_.spawn_noise_pos);
    state.y = world_.spawn.y + state.rng.uniform(-cfg_.spawn_noise_pos, cfg_.spawn_noise_pos);
    state.heading =
        world_.spawn.heading + state.rng.uniform(-cfg_.spawn_noise_heading, cfg_.spawn_noise_heading);
    if (world_.collides(state.x, state.y, cfg_.car_radius)) {
      state.x = world_.spawn.x;
      state.y = world_.spawn.y;
      state.heading = world_.spawn.heading;
    }
  } else if (state.collided) {
    double sign = state.rng.bernoulli(0.5) ? 1.0 : -1.0;
    if (!backup(state, sign) && !backup(state, -sign)) {
      state.x = world_.spawn.x;
      state.y = world_.spawn.y;
      state.heading = world_.spawn.heading;
    }
  }
  state.odometer = 0.0;
  state.collided = false;
}

}  // namespace gcg
