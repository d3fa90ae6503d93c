#pragma once

#include "gcg/model/nav_model.hpp"
#include "gcg/policy/policy.hpp"

namespace gcg {

// Terminal label for an ongoing window, computed with the target parameters
// at the observation H steps ahead. Value mode: the maximum of J over the
// planner's candidate sequences. Collision mode: the minimum over candidates
// of the mean per-step collision probability.
double compute_bootstrap(const NavModel& model, ParamStore& target_params, const ObsStack& next_obs,
                         const PolicyConfig& planner, Rng& rng);

// Batched variant: one candidate set, one forward pass per observation.
std::vector<double> compute_bootstrap_batch(const NavModel& model, ParamStore& target_params,
                                            std::span<const ObsStack> next_obs,
                                            const PolicyConfig& planner, Rng& rng);

}  // namespace gcg
