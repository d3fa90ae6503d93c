#include "gcg/policy/policy.hpp"

#include <algorithm>
#include <cmath>

#include "gcg/errors.hpp"

namespace gcg {

void PolicyConfig::validate() const {
  if (num_sequences < 1) throw ConfigError("num_sequences must be >= 1");
  if (grid_levels < 1) throw ConfigError("grid_levels must be >= 1");
  if (cem.iterations < 1) throw ConfigError("cem iterations must be >= 1");
  if (cem.elite_frac <= 0.0 || cem.elite_frac > 1.0) throw ConfigError("cem elite_frac must be in (0, 1]");
  if (cem.init_stddev <= 0.0) throw ConfigError("cem init_stddev must be positive");
  if (epsilon.start < epsilon.end) throw ConfigError("epsilon schedule must be nonincreasing");
  if (noise_std.start < noise_std.end) throw ConfigError("noise schedule must be nonincreasing");
  if (max_steer <= 0.0) throw ConfigError("max_steer must be positive");
}

double evaluate_J(const ModelOutputs& outputs, const GraphConfig& cfg, int col) {
  const int H = outputs.horizon();
  double j = 0.0;
  if (cfg.output_mode == OutputMode::value) {
    double g = 1.0;
    for (int h = 0; h < H; ++h) {
      j += g * outputs.y.at(h, col);
      g *= cfg.discount;
    }
    if (cfg.bootstrap) j += g * outputs.terminal_b(col);
  } else {
    for (int h = 0; h < H; ++h) j -= outputs.y.at(h, col);
    if (cfg.bootstrap) j -= outputs.terminal_b(col);
  }
  return j;
}

std::vector<double> evaluate_J_all(const ModelOutputs& outputs, const GraphConfig& cfg) {
  std::vector<double> out(outputs.batch());
  for (int c = 0; c < outputs.batch(); ++c) out[c] = evaluate_J(outputs, cfg, c);
  return out;
}

Tensor sample_action_sequences(const PolicyConfig& cfg, int horizon, Rng& rng) {
  const double bound = cfg.max_steer;
  if (cfg.sampler == SequenceSampler::grid) {
    int64_t k = 1;
    for (int h = 0; h < horizon; ++h) {
      k *= cfg.grid_levels;
      if (k > 100000) throw ConfigError("grid sampler would enumerate too many sequences");
    }
    Tensor seqs({horizon, static_cast<int>(k)});
    for (int64_t i = 0; i < k; ++i) {
      int64_t rest = i;
      for (int h = 0; h < horizon; ++h) {
        int level = static_cast<int>(rest % cfg.grid_levels);
        rest /= cfg.grid_levels;
        double a = cfg.grid_levels == 1
                       ? 0.0
                       : -bound + 2.0 * bound * level / static_cast<double>(cfg.grid_levels - 1);
        seqs.at(h, static_cast<int>(i)) = a;
      }
    }
    return seqs;
  }
  Tensor seqs({horizon, cfg.num_sequences});
  for (int k = 0; k < cfg.num_sequences; ++k) {
    if (cfg.sampler == SequenceSampler::hold_constant) {
      double a = rng.uniform(-bound, bound);
      for (int h = 0; h < horizon; ++h) seqs.at(h, k) = a;
    } else {
      for (int h = 0; h < horizon; ++h) seqs.at(h, k) = rng.uniform(-bound, bound);
    }
  }
  return seqs;
}

namespace {

PlanResult argmax_plan(const Tensor& seqs, const std::vector<double>& scores) {
  PlanResult best;
  for (int k = 0; k < static_cast<int>(scores.size()); ++k) {
    if (best.index < 0 || scores[k] > best.score) {
      best.score = scores[k];
      best.index = k;
    }
  }
  best.actions.resize(seqs.rows());
  for (int h = 0; h < seqs.rows(); ++h) best.actions[h] = seqs.at(h, best.index);
  return best;
}

}  // namespace

PlanResult select_action_shooting(const NavModel& model, ParamStore& params, const ObsStack& obs,
                                  const PolicyConfig& policy, Rng& rng) {
  Tensor seqs = sample_action_sequences(policy, model.graph().model_horizon, rng);
  Prediction pred = model.predict(params, std::span<const ObsStack>(&obs, 1), seqs);
  std::vector<double> scores = evaluate_J_all(pred.outputs, model.graph());
  return argmax_plan(seqs, scores);
}

PlanResult cem_optimize(const std::function<std::vector<double>(const Tensor&)>& evaluate, int horizon,
                        const PolicyConfig& policy, Rng& rng) {
  const double bound = policy.max_steer;
  const int k = policy.num_sequences;
  const int elites = std::max(1, static_cast<int>(std::floor(policy.cem.elite_frac * k)));
  std::vector<double> mean(horizon, 0.0);
  std::vector<double> stddev(horizon, policy.cem.init_stddev);

  PlanResult best;
  for (int iter = 0; iter < policy.cem.iterations; ++iter) {
    Tensor seqs({horizon, k});
    for (int j = 0; j < k; ++j) {
      for (int h = 0; h < horizon; ++h) {
        seqs.at(h, j) = std::clamp(rng.normal(mean[h], stddev[h]), -bound, bound);
      }
    }
    std::vector<double> scores = evaluate(seqs);
    PlanResult it_best = argmax_plan(seqs, scores);
    if (best.index < 0 || it_best.score > best.score) {
      best = it_best;
    }

    std::vector<int> order(k);
    for (int j = 0; j < k; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    for (int h = 0; h < horizon; ++h) {
      double m = 0.0;
      for (int e = 0; e < elites; ++e) m += seqs.at(h, order[e]);
      m /= elites;
      double var = 0.0;
      for (int e = 0; e < elites; ++e) {
        double d = seqs.at(h, order[e]) - m;
        var += d * d;
      }
      mean[h] = m;
      stddev[h] = std::max(std::sqrt(var / elites), 1e-3);
    }
  }
  return best;
}

PlanResult select_action_cem(const NavModel& model, ParamStore& params, const ObsStack& obs,
                             const PolicyConfig& policy, Rng& rng) {
  auto evaluate = [&](const Tensor& seqs) {
    Prediction pred = model.predict(params, std::span<const ObsStack>(&obs, 1), seqs);
    return evaluate_J_all(pred.outputs, model.graph());
  };
  return cem_optimize(evaluate, model.graph().model_horizon, policy, rng);
}

std::vector<double> explore(std::vector<double> actions, const PolicyConfig& policy, int64_t step,
                            Rng& rng) {
  if (actions.empty()) throw UsageError("explore: empty action sequence");
  const double bound = policy.max_steer;
  double eps = policy.epsilon.at(step);
  if (eps > 0.0 && rng.bernoulli(eps)) {
    actions[0] = rng.uniform(-bound, bound);
  }
  double sd = policy.noise_std.at(step);
  if (sd > 0.0) {
    actions[0] += rng.normal(0.0, sd);
  }
  actions[0] = std::clamp(actions[0], -bound, bound);
  return actions;
}

}  // namespace gcg
