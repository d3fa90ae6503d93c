#include "gcg/driver/targets.hpp"

#include <cmath>

#include "gcg/errors.hpp"

namespace gcg {

void NStepConfig::validate() const {
  if (n < 1) throw ConfigError("n-step horizon must be >= 1");
  if (static_cast<int>(weights.size()) != n) throw ConfigError("n-step weights must have n entries");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("n-step weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("n-step weights must sum to 1");
}

double nstep_weighted_return(std::span<const double> rewards, std::span<const double> next_values,
                             double gamma, const NStepConfig& cfg) {
  cfg.validate();
  const int avail = static_cast<int>(rewards.size());
  if (avail < 1) throw UsageError("nstep_weighted_return: no rewards");
  double target = 0.0;
  for (int horizon = 1; horizon <= cfg.n; ++horizon) {
    double w = cfg.weights[horizon - 1];
    if (w == 0.0) continue;
    double v = 0.0;
    double g = 1.0;
    int steps = std::min(horizon, avail);
    for (int k = 0; k < steps; ++k) {
      v += g * rewards[k];
      g *= gamma;
    }
    if (horizon <= avail && horizon <= static_cast<int>(next_values.size())) {
      v += g * next_values[horizon - 1];
    }
    target += w * v;
  }
  return target;
}

double double_q_target(const NavModel& model, ParamStore& online, ParamStore& target,
                       const ObsStack& next_obs, const PolicyConfig& planner, Rng& rng) {
  Tensor seqs = sample_action_sequences(planner, model.graph().model_horizon, rng);
  Prediction on = model.predict(online, std::span<const ObsStack>(&next_obs, 1), seqs);
  std::vector<double> scores = evaluate_J_all(on.outputs, model.graph());
  int best = 0;
  for (int k = 1; k < static_cast<int>(scores.size()); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  std::vector<double> chosen(seqs.rows());
  for (int h = 0; h < seqs.rows(); ++h) chosen[h] = seqs.at(h, best);
  Prediction tg = model.predict_one(target, next_obs, chosen);
  return evaluate_J(tg.outputs, model.graph(), 0);
}

void sync_target(const ParamStore& online, ParamStore& target, SyncMode mode, double tau) {
  if (mode == SyncMode::hard) {
    target.hard_sync_from(online);
  } else {
    target.polyak_from(online, tau);
  }
}

}  // namespace gcg
