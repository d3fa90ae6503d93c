#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gcg/driver/replay_buffer.hpp"
#include "gcg/driver/targets.hpp"
#include "gcg/model/config.hpp"
#include "gcg/param_store.hpp"
#include "gcg/policy/policy.hpp"
#include "gcg/sim/simulator.hpp"

namespace gcg {

enum class TargetRule { standard, double_q };

// Complete description of one training run.
struct RunConfig {
  std::string world_file;
  ResetMode sim_mode = ResetMode::continuous;
  SimConfig sim;
  NetConfig net;
  GraphConfig graph;
  PolicyConfig policy;
  NStepConfig nstep;
  TargetRule targets = TargetRule::standard;
  AdamConfig adam;
  int batch_size = 32;
  int grad_steps_per_env_step = 1;
  int64_t buffer_capacity = 100000;
  int64_t min_buffer = 500;
  int64_t total_steps = 50000;
  std::vector<uint64_t> seeds{1, 2, 3};
  int64_t eval_interval = 1000;
  int64_t checkpoint_interval = 10000;
  ReplayMode replay = ReplayMode::uniform;
  std::string output_dir = "runs/out";
  bool async_mode = false;
  int64_t params_publish_period = 50;  // trainer->actor snapshot period (async)
  int smooth_window = 10;

  void validate() const;

  std::string to_json_text() const;
  static RunConfig from_json_text(const std::string& text, const std::string& origin = "<config>");
  static RunConfig from_json_file(const std::filesystem::path& path);
  void save_json(const std::filesystem::path& path) const;
};

// Named configurations for the studied methods and ablations.
RunConfig preset(const std::string& name);
std::vector<std::pair<std::string, std::string>> preset_catalog();

}  // namespace gcg
