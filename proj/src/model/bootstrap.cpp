#include "gcg/model/bootstrap.hpp"

#include <limits>

#include "gcg/errors.hpp"

namespace gcg {

namespace {

double bootstrap_from_outputs(const ModelOutputs& out, const GraphConfig& cfg) {
  const int H = out.horizon();
  if (cfg.output_mode == OutputMode::value) {
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < out.batch(); ++k) best = std::max(best, evaluate_J(out, cfg, k));
    return best;
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < out.batch(); ++k) {
    double mean = 0.0;
    for (int h = 0; h < H; ++h) mean += out.y.at(h, k);
    best = std::min(best, mean / H);
  }
  return best;
}

}  // namespace

double compute_bootstrap(const NavModel& model, ParamStore& target_params, const ObsStack& next_obs,
                         const PolicyConfig& planner, Rng& rng) {
  if (!model.graph().bootstrap) throw UsageError("compute_bootstrap with bootstrapping disabled");
  Tensor seqs = sample_action_sequences(planner, model.graph().model_horizon, rng);
  Prediction pred = model.predict(target_params, std::span<const ObsStack>(&next_obs, 1), seqs);
  return bootstrap_from_outputs(pred.outputs, model.graph());
}

std::vector<double> compute_bootstrap_batch(const NavModel& model, ParamStore& target_params,
                                            std::span<const ObsStack> next_obs,
                                            const PolicyConfig& planner, Rng& rng) {
  if (!model.graph().bootstrap) throw UsageError("compute_bootstrap with bootstrapping disabled");
  std::vector<double> out;
  out.reserve(next_obs.size());
  Tensor seqs = sample_action_sequences(planner, model.graph().model_horizon, rng);
  for (const ObsStack& obs : next_obs) {
    Prediction pred = model.predict(target_params, std::span<const ObsStack>(&obs, 1), seqs);
    out.push_back(bootstrap_from_outputs(pred.outputs, model.graph()));
  }
  return out;
}

}  // namespace gcg
