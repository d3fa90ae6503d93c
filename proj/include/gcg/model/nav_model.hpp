#pragma once

#include <span>
#include <vector>

#include "gcg/model/config.hpp"
#include "gcg/sim/simulator.hpp"
#include "gcg/tape.hpp"

namespace gcg {

// One model input: the four most recent grayscale frames, oldest first,
// intensities in [0, 1]. Episodes shorter than the stack are zero-padded.
struct ObsStack {
  int rows = 0, cols = 0;
  std::vector<double> data;  // 4 * rows * cols

  static ObsStack zeros(int rows, int cols) {
    ObsStack o;
    o.rows = rows;
    o.cols = cols;
    o.data.assign(static_cast<size_t>(4) * rows * cols, 0.0);
    return o;
  }
  void push_frame(const Frame& f);  // shifts left, appends newest
};

// Per-step outputs y[h] (h = 0..H-1) and per-step terminal outputs
// b_steps[h] = terminal estimate after executing h+1 actions. Column-major
// over the batch: both are [H, B].
struct ModelOutputs {
  Tensor y;
  Tensor b_steps;

  int horizon() const { return y.rows(); }
  int batch() const { return y.cols(); }
  double terminal_b(int col) const { return b_steps.at(b_steps.rows() - 1, col); }
};

struct Prediction {
  Tape tape;
  std::vector<Tape::ValueId> y_ids;  // H entries, each [1, B]
  std::vector<Tape::ValueId> b_ids;  // H entries, each [1, B]
  ModelOutputs outputs;
};

// Converts per-step logits into nondecreasing probabilities via the survival
// product y[h] = 1 - prod_{i<=h} (1 - sigmoid(z[i])).
std::vector<Tape::ValueId> enforce_monotonic(Tape& tape, std::span<const Tape::ValueId> step_logits);

// Recurrent prediction model: conv/fc encoder -> initial hidden state,
// embedded actions drive the recurrent cell, linear/sigmoid heads emit the
// per-step and terminal outputs.
class NavModel {
 public:
  NavModel(NetConfig net, GraphConfig graph);

  const NetConfig& net() const { return net_; }
  const GraphConfig& graph() const { return graph_; }

  ParamStore init_params(Rng& rng) const;

  // Runs the traced forward pass. `obs` must hold either one stack per
  // column of `actions` or a single stack shared by every column
  // (broadcast, the planner's case). `actions` is [H, B].
  Prediction predict(ParamStore& params, std::span<const ObsStack> obs, const Tensor& actions) const;

  Prediction predict_one(ParamStore& params, const ObsStack& obs,
                         std::span<const double> action_sequence) const;

 private:
  Tape::ValueId encode(Tape& t, ParamStore& params, std::span<const ObsStack> obs, int batch) const;

  NetConfig net_;
  GraphConfig graph_;
};

}  // namespace gcg
