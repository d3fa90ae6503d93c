#pragma once

#include <cstdint>
#include <vector>

#include "gcg/rng.hpp"
#include "gcg/sim/world.hpp"

namespace gcg {

struct SimConfig {
  double speed = 2.0;           // m/s, fixed
  double dt = 0.25;             // s between decisions
  double wheelbase = 0.3;       // m
  double max_steer = 0.5235987755982988;  // 30 deg
  double car_radius = 0.15;     // collision disc, m
  double episode_cap_m = 1000.0;

  // rendering
  bool ray_mode = false;        // true: 1 x rays depth vector instead of a frame
  int rays = 32;
  int frame_rows = 36;
  int frame_cols = 64;
  int horizon_row = 12;         // rows above this stay black
  double fov = 2.0943951023931953;  // 120 deg
  double d_max = 10.0;

  // reset behaviour
  double spawn_noise_pos = 0.05;      // m
  double spawn_noise_heading = 0.05;  // rad
  double backup_distance = 1.0;       // m reversed after a collision
  double backup_steer = 0.2;          // rad magnitude during backup
  int backup_substeps = 5;            // kinematic substeps per dt while reversing
};

enum class ResetMode { episodic, continuous };

struct SimState {
  double x = 0, y = 0, heading = 0;
  double odometer = 0;       // m traveled this episode
  bool collided = false;
  Rng rng{0};
  uint32_t clamp_warnings = 0;
};

// Grayscale observation; ray mode uses rows = 1, cols = rays.
struct Frame {
  int rows = 0, cols = 0;
  std::vector<uint8_t> pixels;
};

struct StepResult {
  Frame frame;
  double reward = 0;     // m/s: speed when collision-free, else 0
  bool collision = false;
  bool done = false;
  double odometer = 0;
};

class Simulator {
 public:
  Simulator(World world, SimConfig cfg) : world_(std::move(world)), cfg_(cfg) {}

  const World& world() const { return world_; }
  const SimConfig& config() const { return cfg_; }

  // Fresh state at the spawn pose (no noise), seeded RNG.
  SimState initial_state(uint64_t seed) const;

  // Kinematic bicycle step with collision check against inflated geometry.
  // Steering outside [-max_steer, max_steer] is clamped and counted.
  StepResult step(SimState& state, double steering) const;

  Frame render(const SimState& state) const;

  // Episodic: respawn with seeded pose noise. Continuous: after a collision,
  // back up ~backup_distance with a seeded random steering sign (mirrored on
  // failure, spawn as last resort); otherwise keep the pose.
  // Odometer and collision flag are cleared either way.
  void reset(SimState& state, ResetMode mode) const;

 private:
  bool backup(SimState& state, double steer_sign) const;

  World world_;
  SimConfig cfg_;
};

}  // namespace gcg
