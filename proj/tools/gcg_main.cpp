#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "gcg/cli/experiment.hpp"
#include "gcg/cli/plot.hpp"
#include "gcg/cli/run_config.hpp"
#include "gcg/driver/driver.hpp"
#include "gcg/errors.hpp"

namespace fs = std::filesystem;
using namespace gcg;

namespace {

RunConfig resolve_config(const std::string& spec) {
  if (fs::exists(spec)) return RunConfig::from_json_file(spec);
  return preset(spec);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"generalized-computation-graph navigation lab"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "train one seed of a config or preset");
  std::string train_spec, train_out;
  uint64_t train_seed = 0;
  bool train_seed_set = false, train_async = false;
  train_cmd->add_option("config", train_spec, "config file or preset name")->required();
  train_cmd->add_option("--seed", train_seed, "seed (default: first of the config's seeds)")
      ->each([&](const std::string&) { train_seed_set = true; });
  train_cmd->add_option("--out", train_out, "output directory");
  train_cmd->add_flag("--async", train_async, "asynchronous actor/trainer threads");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint greedily");
  std::string eval_ckpt, eval_world, eval_config;
  int eval_episodes = 10;
  uint64_t eval_seed = 0;
  eval_cmd->add_option("checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--world", eval_world, "world file override");
  eval_cmd->add_option("--episodes", eval_episodes, "episode count");
  eval_cmd->add_option("--seed", eval_seed, "seed");
  eval_cmd->add_option("--config", eval_config, "config file (default: config.json next to checkpoint)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run every seed and aggregate curves");
  std::string sweep_spec, sweep_out, sweep_seeds;
  int sweep_jobs = 1;
  sweep_cmd->add_option("config", sweep_spec, "config file or preset name")->required();
  sweep_cmd->add_option("--seeds", sweep_seeds, "comma-separated seed list override");
  sweep_cmd->add_option("--out", sweep_out, "output directory");
  sweep_cmd->add_option("--jobs", sweep_jobs, "parallel seed workers");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "render learning curves to svg");
  std::vector<std::string> plot_inputs;
  std::string plot_out = "curves.svg";
  int plot_smooth = 1;
  plot_cmd->add_option("csv", plot_inputs, "metrics or aggregate csv files")->required();
  plot_cmd->add_option("--out", plot_out, "output svg path");
  plot_cmd->add_option("--smooth", plot_smooth, "moving-average window");

  auto* presets_cmd = app.add_subcommand("presets", "list named configurations");

  CLI11_PARSE(app, argc, argv);

  if (train_cmd->parsed()) {
    RunConfig cfg = resolve_config(train_spec);
    uint64_t seed = train_seed_set ? train_seed : cfg.seeds.front();
    fs::path out = train_out.empty() ? fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed))
                                     : fs::path(train_out);
    fs::create_directories(out);
    cfg.save_json(out / "config.json");
    RunResult r = (train_async || cfg.async_mode) ? run_async(cfg, seed, out) : run(cfg, seed, out);
    std::printf("trained %lld steps, %lld episodes, %.1f s\n", static_cast<long long>(r.steps),
                static_cast<long long>(r.episodes), r.wall_seconds);
    std::printf("metrics: %s\n", r.metrics_path.string().c_str());
    for (const auto& c : r.checkpoints) std::printf("checkpoint: %s\n", c.string().c_str());
    return 0;
  }

  if (eval_cmd->parsed()) {
    fs::path ckpt(eval_ckpt);
    fs::path cfg_path = eval_config.empty() ? ckpt.parent_path() / "config.json" : fs::path(eval_config);
    if (!fs::exists(cfg_path)) {
      throw ConfigError("no config found at " + cfg_path.string() + "; pass --config");
    }
    RunConfig cfg = RunConfig::from_json_file(cfg_path);
    if (!eval_world.empty()) cfg.world_file = eval_world;
    EvalStats stats = evaluate(cfg, ckpt, eval_episodes, eval_seed);
    std::printf("episodes: %d\n", stats.episodes);
    std::printf("mean distance (m):   %.2f\n", stats.mean);
    std::printf("median distance (m): %.2f\n", stats.median);
    std::printf("max distance (m):    %.2f\n", stats.max);
    return 0;
  }

  if (sweep_cmd->parsed()) {
    RunConfig cfg = resolve_config(sweep_spec);
    std::vector<uint64_t> seeds = cfg.seeds;
    if (!sweep_seeds.empty()) {
      seeds.clear();
      std::stringstream ss(sweep_seeds);
      std::string tok;
      while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
    }
    fs::path out = sweep_out.empty() ? fs::path(cfg.output_dir) : fs::path(sweep_out);
    fs::create_directories(out);
    cfg.save_json(out / "config.json");
    SweepResult r = sweep(cfg, seeds, out, sweep_jobs);
    if (r.partial) std::fprintf(stderr, "warning: some seeds aborted; aggregate is partial\n");
    std::printf("aggregate: %s\n", r.aggregate_csv.string().c_str());
    return 0;
  }

  if (plot_cmd->parsed()) {
    std::vector<fs::path> inputs(plot_inputs.begin(), plot_inputs.end());
    plot_csvs(inputs, plot_out, plot_smooth);
    std::printf("wrote %s\n", plot_out.c_str());
    return 0;
  }

  if (presets_cmd->parsed()) {
    for (const auto& [name, desc] : preset_catalog()) {
      std::printf("%-22s %s\n", name.c_str(), desc.c_str());
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "training aborted: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
