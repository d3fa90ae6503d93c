#include "gcg/cli/run_config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "gcg/errors.hpp"

#ifndef GCG_WORLDS_DIR
#define GCG_WORLDS_DIR "worlds"
#endif

namespace gcg {

using json = nlohmann::ordered_json;

void RunConfig::validate() const {
  if (world_file.empty()) throw ConfigError("world file not set");
  if (sim.dt <= 0.0) throw ConfigError("dt must be positive");
  if (sim.speed <= 0.0) throw ConfigError("speed must be positive");
  net.validate();
  graph.validate();
  policy.validate();
  nstep.validate();
  if (!nstep.is_trivial() && graph.model_horizon != 1) {
    throw ConfigError("multi-step returns require model_horizon == 1");
  }
  if (!nstep.is_trivial() && nstep.n != graph.label_horizon) {
    throw ConfigError("nstep.n must match label_horizon");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (grad_steps_per_env_step < 0) throw ConfigError("grad_steps_per_env_step must be >= 0");
  if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
  if (min_buffer < 1) throw ConfigError("min_buffer must be >= 1");
  if (total_steps < 1) throw ConfigError("total_steps must be >= 1");
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
  if (checkpoint_interval < 1) throw ConfigError("checkpoint_interval must be >= 1");
  if (params_publish_period < 1) throw ConfigError("params_publish_period must be >= 1");
  if (smooth_window < 1) throw ConfigError("smooth_window must be >= 1");
  const bool frame_ok = net.frame_input
                            ? (net.obs_rows == sim.frame_rows && net.obs_cols == sim.frame_cols)
                            : (net.obs_rows == 1 && net.obs_cols == sim.rays && sim.ray_mode);
  if (!frame_ok) throw ConfigError("network observation dims do not match the simulator observation");
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown config key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

json schedule_to_json(const DecaySchedule& s) {
  return json{{"start", s.start}, {"end", s.end}, {"decay_steps", s.decay_steps}};
}

DecaySchedule schedule_from_json(const json& j, const DecaySchedule& fallback, const std::string& where) {
  check_keys(j, {"start", "end", "decay_steps"}, where);
  DecaySchedule s = fallback;
  s.start = get_or(j, "start", s.start);
  s.end = get_or(j, "end", s.end);
  s.decay_steps = get_or(j, "decay_steps", s.decay_steps);
  return s;
}

std::string output_mode_str(OutputMode m) { return m == OutputMode::value ? "value" : "collision"; }
std::string loss_mode_str(LossMode m) { return m == LossMode::mse ? "mse" : "cross_entropy"; }

}  // namespace

std::string RunConfig::to_json_text() const {
  json j;
  j["world"] = world_file;
  j["sim_mode"] = sim_mode == ResetMode::episodic ? "episodic" : "continuous";
  j["observation"] = json{{"mode", sim.ray_mode ? "rays" : "frame"},
                          {"rays", sim.rays},
                          {"rows", sim.frame_rows},
                          {"cols", sim.frame_cols}};
  j["sim"] = json{{"speed", sim.speed},
                  {"dt", sim.dt},
                  {"wheelbase", sim.wheelbase},
                  {"max_steer", sim.max_steer},
                  {"car_radius", sim.car_radius},
                  {"episode_cap_m", sim.episode_cap_m},
                  {"fov", sim.fov},
                  {"d_max", sim.d_max},
                  {"horizon_row", sim.horizon_row}};
  j["network"] = json{{"hidden_dim", net.hidden_dim},
                      {"action_embed_dim", net.action_embed_dim},
                      {"encoder_fc_dim", net.encoder_fc_dim},
                      {"conv_filters", net.conv_filters},
                      {"conv_kernel", net.conv_kernel},
                      {"conv_stride", net.conv_stride}};
  j["graph"] = json{{"output_mode", output_mode_str(graph.output_mode)},
                    {"loss_mode", loss_mode_str(graph.loss_mode)},
                    {"model_horizon", graph.model_horizon},
                    {"label_horizon", graph.label_horizon},
                    {"discount", graph.discount},
                    {"bootstrap", graph.bootstrap},
                    {"target_sync_period", graph.target_sync_period},
                    {"polyak_tau", graph.polyak_tau},
                    {"monotonic_outputs", graph.monotonic_outputs},
                    {"label_extension", graph.label_extension == LabelExtension::extend ? "extend" : "clip"},
                    {"recurrent_cell", graph.recurrent_cell == RecurrentCell::mi_lstm ? "mi_lstm" : "lstm"}};
  std::string sampler = policy.sampler == SequenceSampler::hold_constant ? "hold_constant"
                        : policy.sampler == SequenceSampler::iid_uniform ? "iid_uniform"
                                                                         : "grid";
  j["policy"] = json{{"num_sequences", policy.num_sequences},
                     {"sampler", sampler},
                     {"grid_levels", policy.grid_levels},
                     {"use_cem", policy.use_cem},
                     {"cem", json{{"iterations", policy.cem.iterations},
                                  {"elite_frac", policy.cem.elite_frac},
                                  {"init_stddev", policy.cem.init_stddev}}},
                     {"epsilon", schedule_to_json(policy.epsilon)},
                     {"noise_std", schedule_to_json(policy.noise_std)}};
  j["nstep"] = json{{"n", nstep.n}, {"weights", nstep.weights}};
  j["targets"] = targets == TargetRule::double_q ? "double_q" : "standard";
  j["optimizer"] =
      json{{"lr", adam.lr}, {"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps}};
  j["batch_size"] = batch_size;
  j["grad_steps_per_env_step"] = grad_steps_per_env_step;
  j["buffer_capacity"] = buffer_capacity;
  j["min_buffer"] = min_buffer;
  j["total_steps"] = total_steps;
  j["seeds"] = seeds;
  j["eval_interval"] = eval_interval;
  j["checkpoint_interval"] = checkpoint_interval;
  j["replay"] = replay == ReplayMode::prioritized ? "prioritized" : "uniform";
  j["output_dir"] = output_dir;
  j["async_mode"] = async_mode;
  j["params_publish_period"] = params_publish_period;
  j["smooth_window"] = smooth_window;
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  RunConfig c;
  try {
    check_keys(doc,
               {"world", "sim_mode", "observation", "sim", "network", "graph", "policy", "nstep",
                "targets", "optimizer", "batch_size", "grad_steps_per_env_step", "buffer_capacity",
                "min_buffer", "total_steps", "seeds", "eval_interval", "checkpoint_interval", "replay",
                "output_dir", "async_mode", "params_publish_period", "smooth_window"},
               origin);
    c.world_file = get_or<std::string>(doc, "world", c.world_file);
    if (doc.contains("sim_mode")) {
      std::string m = doc["sim_mode"].get<std::string>();
      if (m == "episodic") {
        c.sim_mode = ResetMode::episodic;
      } else if (m == "continuous") {
        c.sim_mode = ResetMode::continuous;
      } else {
        throw ConfigError("sim_mode must be 'episodic' or 'continuous'");
      }
    }
    if (doc.contains("observation")) {
      const json& o = doc["observation"];
      check_keys(o, {"mode", "rays", "rows", "cols"}, "observation");
      std::string mode = get_or<std::string>(o, "mode", "rays");
      if (mode == "rays") {
        c.sim.ray_mode = true;
      } else if (mode == "frame") {
        c.sim.ray_mode = false;
      } else {
        throw ConfigError("observation.mode must be 'rays' or 'frame'");
      }
      c.sim.rays = get_or(o, "rays", c.sim.rays);
      c.sim.frame_rows = get_or(o, "rows", c.sim.frame_rows);
      c.sim.frame_cols = get_or(o, "cols", c.sim.frame_cols);
    }
    if (doc.contains("sim")) {
      const json& s = doc["sim"];
      check_keys(s,
                 {"speed", "dt", "wheelbase", "max_steer", "car_radius", "episode_cap_m", "fov",
                  "d_max", "horizon_row"},
                 "sim");
      c.sim.speed = get_or(s, "speed", c.sim.speed);
      c.sim.dt = get_or(s, "dt", c.sim.dt);
      c.sim.wheelbase = get_or(s, "wheelbase", c.sim.wheelbase);
      c.sim.max_steer = get_or(s, "max_steer", c.sim.max_steer);
      c.sim.car_radius = get_or(s, "car_radius", c.sim.car_radius);
      c.sim.episode_cap_m = get_or(s, "episode_cap_m", c.sim.episode_cap_m);
      c.sim.fov = get_or(s, "fov", c.sim.fov);
      c.sim.d_max = get_or(s, "d_max", c.sim.d_max);
      c.sim.horizon_row = get_or(s, "horizon_row", c.sim.horizon_row);
    }
    if (doc.contains("network")) {
      const json& n = doc["network"];
      check_keys(n,
                 {"hidden_dim", "action_embed_dim", "encoder_fc_dim", "conv_filters", "conv_kernel",
                  "conv_stride"},
                 "network");
      c.net.hidden_dim = get_or(n, "hidden_dim", c.net.hidden_dim);
      c.net.action_embed_dim = get_or(n, "action_embed_dim", c.net.action_embed_dim);
      c.net.encoder_fc_dim = get_or(n, "encoder_fc_dim", c.net.encoder_fc_dim);
      c.net.conv_filters = get_or(n, "conv_filters", c.net.conv_filters);
      c.net.conv_kernel = get_or(n, "conv_kernel", c.net.conv_kernel);
      c.net.conv_stride = get_or(n, "conv_stride", c.net.conv_stride);
    }
    if (doc.contains("graph")) {
      const json& g = doc["graph"];
      check_keys(g,
                 {"output_mode", "loss_mode", "model_horizon", "label_horizon", "discount", "bootstrap",
                  "target_sync_period", "polyak_tau", "monotonic_outputs", "label_extension",
                  "recurrent_cell"},
                 "graph");
      std::string om = get_or<std::string>(g, "output_mode", "collision");
      if (om == "value") {
        c.graph.output_mode = OutputMode::value;
      } else if (om == "collision") {
        c.graph.output_mode = OutputMode::collision;
      } else {
        throw ConfigError("graph.output_mode must be 'value' or 'collision'");
      }
      std::string lm = get_or<std::string>(g, "loss_mode", "cross_entropy");
      if (lm == "mse") {
        c.graph.loss_mode = LossMode::mse;
      } else if (lm == "cross_entropy") {
        c.graph.loss_mode = LossMode::cross_entropy;
      } else {
        throw ConfigError("graph.loss_mode must be 'mse' or 'cross_entropy'");
      }
      c.graph.model_horizon = get_or(g, "model_horizon", c.graph.model_horizon);
      c.graph.label_horizon = get_or(g, "label_horizon", c.graph.label_horizon);
      c.graph.discount = get_or(g, "discount", c.graph.discount);
      c.graph.bootstrap = get_or(g, "bootstrap", c.graph.bootstrap);
      c.graph.target_sync_period = get_or(g, "target_sync_period", c.graph.target_sync_period);
      c.graph.polyak_tau = get_or(g, "polyak_tau", c.graph.polyak_tau);
      c.graph.monotonic_outputs = get_or(g, "monotonic_outputs", c.graph.monotonic_outputs);
      std::string le = get_or<std::string>(g, "label_extension", "extend");
      if (le == "extend") {
        c.graph.label_extension = LabelExtension::extend;
      } else if (le == "clip") {
        c.graph.label_extension = LabelExtension::clip;
      } else {
        throw ConfigError("graph.label_extension must be 'extend' or 'clip'");
      }
      std::string rc = get_or<std::string>(g, "recurrent_cell", "mi_lstm");
      if (rc == "mi_lstm") {
        c.graph.recurrent_cell = RecurrentCell::mi_lstm;
      } else if (rc == "lstm") {
        c.graph.recurrent_cell = RecurrentCell::lstm;
      } else {
        throw ConfigError("graph.recurrent_cell must be 'mi_lstm' or 'lstm'");
      }
    }
    if (doc.contains("policy")) {
      const json& p = doc["policy"];
      check_keys(p, {"num_sequences", "sampler", "grid_levels", "use_cem", "cem", "epsilon", "noise_std"},
                 "policy");
      c.policy.num_sequences = get_or(p, "num_sequences", c.policy.num_sequences);
      std::string sm = get_or<std::string>(p, "sampler", "hold_constant");
      if (sm == "hold_constant") {
        c.policy.sampler = SequenceSampler::hold_constant;
      } else if (sm == "iid_uniform") {
        c.policy.sampler = SequenceSampler::iid_uniform;
      } else if (sm == "grid") {
        c.policy.sampler = SequenceSampler::grid;
      } else {
        throw ConfigError("policy.sampler must be 'hold_constant', 'iid_uniform' or 'grid'");
      }
      c.policy.grid_levels = get_or(p, "grid_levels", c.policy.grid_levels);
      c.policy.use_cem = get_or(p, "use_cem", c.policy.use_cem);
      if (p.contains("cem")) {
        const json& cem = p["cem"];
        check_keys(cem, {"iterations", "elite_frac", "init_stddev"}, "policy.cem");
        c.policy.cem.iterations = get_or(cem, "iterations", c.policy.cem.iterations);
        c.policy.cem.elite_frac = get_or(cem, "elite_frac", c.policy.cem.elite_frac);
        c.policy.cem.init_stddev = get_or(cem, "init_stddev", c.policy.cem.init_stddev);
      }
      if (p.contains("epsilon")) {
        c.policy.epsilon = schedule_from_json(p["epsilon"], c.policy.epsilon, "policy.epsilon");
      }
      if (p.contains("noise_std")) {
        c.policy.noise_std = schedule_from_json(p["noise_std"], c.policy.noise_std, "policy.noise_std");
      }
    }
    if (doc.contains("nstep")) {
      const json& n = doc["nstep"];
      check_keys(n, {"n", "weights"}, "nstep");
      c.nstep.n = get_or(n, "n", c.nstep.n);
      if (n.contains("weights")) c.nstep.weights = n["weights"].get<std::vector<double>>();
    }
    if (doc.contains("targets")) {
      std::string tg = doc["targets"].get<std::string>();
      if (tg == "standard") {
        c.targets = TargetRule::standard;
      } else if (tg == "double_q") {
        c.targets = TargetRule::double_q;
      } else {
        throw ConfigError("targets must be 'standard' or 'double_q'");
      }
    }
    if (doc.contains("optimizer")) {
      const json& o = doc["optimizer"];
      check_keys(o, {"lr", "beta1", "beta2", "eps"}, "optimizer");
      c.adam.lr = get_or(o, "lr", c.adam.lr);
      c.adam.beta1 = get_or(o, "beta1", c.adam.beta1);
      c.adam.beta2 = get_or(o, "beta2", c.adam.beta2);
      c.adam.eps = get_or(o, "eps", c.adam.eps);
    }
    c.batch_size = get_or(doc, "batch_size", c.batch_size);
    c.grad_steps_per_env_step = get_or(doc, "grad_steps_per_env_step", c.grad_steps_per_env_step);
    c.buffer_capacity = get_or(doc, "buffer_capacity", c.buffer_capacity);
    c.min_buffer = get_or(doc, "min_buffer", c.min_buffer);
    c.total_steps = get_or(doc, "total_steps", c.total_steps);
    if (doc.contains("seeds")) c.seeds = doc["seeds"].get<std::vector<uint64_t>>();
    c.eval_interval = get_or(doc, "eval_interval", c.eval_interval);
    c.checkpoint_interval = get_or(doc, "checkpoint_interval", c.checkpoint_interval);
    if (doc.contains("replay")) {
      std::string r = doc["replay"].get<std::string>();
      if (r == "uniform") {
        c.replay = ReplayMode::uniform;
      } else if (r == "prioritized") {
        c.replay = ReplayMode::prioritized;
      } else {
        throw ConfigError("replay must be 'uniform' or 'prioritized'");
      }
    }
    c.output_dir = get_or<std::string>(doc, "output_dir", c.output_dir);
    c.async_mode = get_or(doc, "async_mode", c.async_mode);
    c.params_publish_period = get_or(doc, "params_publish_period", c.params_publish_period);
    c.smooth_window = get_or(doc, "smooth_window", c.smooth_window);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  // Derived fields kept in lockstep with the observation settings.
  c.net.frame_input = !c.sim.ray_mode;
  c.net.obs_rows = c.sim.ray_mode ? 1 : c.sim.frame_rows;
  c.net.obs_cols = c.sim.ray_mode ? c.sim.rays : c.sim.frame_cols;
  c.policy.max_steer = c.sim.max_steer;
  c.validate();
  return c;
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return from_json_text(buf.str(), path.string());
}

void RunConfig::save_json(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write config file: " + path.string());
  os << to_json_text();
}

namespace {

RunConfig base_config() {
  RunConfig c;
  c.world_file = std::string(GCG_WORLDS_DIR) + "/cluttered_mini.json";
  c.sim_mode = ResetMode::continuous;
  c.sim.ray_mode = true;
  c.net.frame_input = false;
  c.net.obs_rows = 1;
  c.net.obs_cols = c.sim.rays;
  c.policy.max_steer = c.sim.max_steer;
  return c;
}

}  // namespace

RunConfig preset(const std::string& name) {
  RunConfig c = base_config();
  c.output_dir = "runs/" + name;
  if (name == "gcg") {
    // collision outputs, cross-entropy, long horizon, no bootstrapping
  } else if (name == "gcg-prioritized") {
    c.replay = ReplayMode::prioritized;
  } else if (name == "gcg-clip") {
    c.graph.label_extension = LabelExtension::clip;
  } else if (name == "collision-mse") {
    c.graph.loss_mode = LossMode::mse;
  } else if (name == "collision-monotonic") {
    c.graph.monotonic_outputs = true;
  } else if (name == "collision-bootstrap") {
    c.graph.bootstrap = true;
  } else if (name == "value-regression") {
    c.graph.output_mode = OutputMode::value;
    c.graph.loss_mode = LossMode::mse;
  } else if (name == "value-bootstrap") {
    c.graph.output_mode = OutputMode::value;
    c.graph.loss_mode = LossMode::mse;
    c.graph.bootstrap = true;
  } else if (name == "dql") {
    c.graph.output_mode = OutputMode::value;
    c.graph.loss_mode = LossMode::mse;
    c.graph.model_horizon = 1;
    c.graph.label_horizon = 1;
    c.graph.bootstrap = true;
    c.targets = TargetRule::double_q;
  } else if (name == "nstep-dql-5" || name == "nstep-dql-10") {
    const int n = name == "nstep-dql-5" ? 5 : 10;
    c.graph.output_mode = OutputMode::value;
    c.graph.loss_mode = LossMode::mse;
    c.graph.model_horizon = 1;
    c.graph.label_horizon = n;
    c.graph.bootstrap = true;
    c.targets = TargetRule::double_q;
    c.nstep.n = n;
    c.nstep.weights.assign(n, 0.0);
    c.nstep.weights[n - 1] = 1.0;
  } else if (name == "maql") {
    c.graph.output_mode = OutputMode::value;
    c.graph.loss_mode = LossMode::mse;
    c.graph.model_horizon = 5;
    c.graph.label_horizon = 5;
    c.graph.bootstrap = true;
  } else if (name == "random") {
    c.grad_steps_per_env_step = 0;
    c.policy.epsilon = DecaySchedule{1.0, 1.0, 1};
    c.policy.num_sequences = 1;
  } else {
    std::string names;
    for (const auto& [n, d] : preset_catalog()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "'; available: " + names);
  }
  c.validate();
  return c;
}

std::vector<std::pair<std::string, std::string>> preset_catalog() {
  return {
      {"gcg", "collision probabilities, cross-entropy, H=N=16, no bootstrapping"},
      {"gcg-prioritized", "gcg with 50% collision-terminated minibatch windows"},
      {"gcg-clip", "gcg with clipped (masked) short labels instead of extension"},
      {"collision-mse", "collision probabilities trained with squared error"},
      {"collision-monotonic", "gcg with nondecreasing collision outputs enforced"},
      {"collision-bootstrap", "gcg plus terminal bootstrapping"},
      {"value-regression", "value outputs, squared Bellman error, no bootstrapping"},
      {"value-bootstrap", "value outputs with terminal bootstrapping, H=16"},
      {"dql", "double Q-learning: value outputs, H=N=1, bootstrapped double-Q targets"},
      {"nstep-dql-5", "5-step double Q-learning (one-hot 5-step returns)"},
      {"nstep-dql-10", "10-step double Q-learning"},
      {"maql", "multi-action Q-learning: value outputs over 5 actions, bootstrapped"},
      {"random", "uniform random steering, no training (baseline)"},
  };
}

}  // namespace gcg
