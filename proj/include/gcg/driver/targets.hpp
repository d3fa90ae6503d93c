#pragma once

#include <span>
#include <vector>

#include "gcg/model/nav_model.hpp"
#include "gcg/policy/policy.hpp"

namespace gcg {

// Weighted combination of N-step returns. Weights must be a simplex vector.
struct NStepConfig {
  int n = 1;
  std::vector<double> weights{1.0};  // w[0] weighs the 1-step return

  void validate() const;
  bool is_trivial() const { return n == 1; }
};

// sum_{N'} w[N'-1] * (sum_{k<N'} gamma^k r[k] + gamma^N' V[N'-1]).
// next_values[k] estimates the value at step k+1; entries for zero-weight
// horizons are never read. Shorter reward spans (terminated episodes) drop
// the bootstrap term and truncate the reward sum.
double nstep_weighted_return(std::span<const double> rewards, std::span<const double> next_values,
                             double gamma, const NStepConfig& cfg);

// Double-Q rule: the online parameters pick the argmax candidate, the target
// parameters evaluate it.
double double_q_target(const NavModel& model, ParamStore& online, ParamStore& target,
                       const ObsStack& next_obs, const PolicyConfig& planner, Rng& rng);

enum class SyncMode { hard, polyak };

// Hard copy or Polyak soft update target <- tau*online + (1-tau)*target.
void sync_target(const ParamStore& online, ParamStore& target, SyncMode mode, double tau = 0.0);

}  // namespace gcg
