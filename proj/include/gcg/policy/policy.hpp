#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gcg/model/nav_model.hpp"
#include "gcg/rng.hpp"

namespace gcg {

// Linear decay from start to end over decay_steps, constant afterwards.
struct DecaySchedule {
  double start = 0.0;
  double end = 0.0;
  int64_t decay_steps = 1;

  double at(int64_t step) const {
    if (step >= decay_steps) return end;
    double f = static_cast<double>(step) / static_cast<double>(decay_steps);
    return start + f * (end - start);
  }
};

enum class SequenceSampler {
  hold_constant,  // one steering angle held over the horizon
  iid_uniform,
  grid,           // full enumeration over grid_levels^H per-step combinations
};

struct CemConfig {
  int iterations = 3;
  double elite_frac = 0.25;
  double init_stddev = 0.3;
};

struct PolicyConfig {
  int num_sequences = 128;  // K
  SequenceSampler sampler = SequenceSampler::hold_constant;
  int grid_levels = 3;
  bool use_cem = false;
  CemConfig cem;
  DecaySchedule epsilon{1.0, 0.05, 3000};
  DecaySchedule noise_std{0.3, 0.03, 10000};
  double max_steer = 0.5235987755982988;

  void validate() const;
};

// Scalar policy evaluation of column `col`. Value mode: discounted sum of
// per-step outputs plus the discounted terminal output when bootstrapping.
// Collision mode: negated sum of collision probabilities, minus the terminal
// probability when bootstrapping.
double evaluate_J(const ModelOutputs& outputs, const GraphConfig& cfg, int col);
std::vector<double> evaluate_J_all(const ModelOutputs& outputs, const GraphConfig& cfg);

// Candidate action sequences as an [H, K] tensor.
Tensor sample_action_sequences(const PolicyConfig& cfg, int horizon, Rng& rng);

struct PlanResult {
  std::vector<double> actions;  // H entries
  double score = 0.0;           // J of the chosen sequence
  int index = -1;               // candidate index (ties break low)
};

// Random shooting: evaluates K sampled sequences in one batched forward pass
// and returns the argmax of J.
PlanResult select_action_shooting(const NavModel& model, ParamStore& params, const ObsStack& obs,
                                  const PolicyConfig& policy, Rng& rng);

// Cross-entropy method refinement. Returns the best sequence seen across all
// iterations (never worse than the first iteration's best).
PlanResult select_action_cem(const NavModel& model, ParamStore& params, const ObsStack& obs,
                             const PolicyConfig& policy, Rng& rng);

// Generic CEM loop over a batch objective; exposed for synthetic objectives.
PlanResult cem_optimize(const std::function<std::vector<double>(const Tensor&)>& evaluate, int horizon,
                        const PolicyConfig& policy, Rng& rng);

// Exploration wrapper: with probability epsilon(step) the first action is
// replaced by a uniform draw; Gaussian noise with stddev(step) is always
// added to the first action; the result is clipped to the action bounds.
std::vector<double> explore(std::vector<double> actions, const PolicyConfig& policy, int64_t step,
                            Rng& rng);

}  // namespace gcg
