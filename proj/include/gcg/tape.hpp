#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gcg/param_store.hpp"
#include "gcg/tensor.hpp"

namespace gcg {

// Reverse-mode tape. Operations execute eagerly and record a backward
// closure; backward() replays the record in reverse, visiting each op once,
// and accumulates parameter gradients into the bound ParamStore entries.
class Tape {
 public:
  using ValueId = int32_t;

  ValueId leaf(Tensor v);
  ValueId param(ParamStore& store, const std::string& name);

  const Tensor& val(ValueId id) const { return nodes_[id].value; }
  const Tensor& grad(ValueId id) const { return nodes_[id].grad; }

  // --- primitive ops -------------------------------------------------------
  ValueId matmul(ValueId a, ValueId b);
  ValueId add(ValueId a, ValueId b);
  ValueId sub(ValueId a, ValueId b);
  ValueId mul(ValueId a, ValueId b);
  ValueId add_col(ValueId mat, ValueId vec);     // broadcast column vector over columns
  ValueId mul_col(ValueId mat, ValueId vec);
  ValueId add_const(ValueId a, Tensor c);
  ValueId mul_const(ValueId a, Tensor c);
  ValueId scale(ValueId a, double s);
  ValueId one_minus(ValueId a);                  // 1 - x
  ValueId square(ValueId a);
  ValueId sigmoid(ValueId a);
  ValueId tanh(ValueId a);
  ValueId relu(ValueId a);
  ValueId slice_rows(ValueId a, int r0, int r1); // rows [r0, r1)
  ValueId concat_rows(std::span<const ValueId> ids);
  ValueId concat_cols(std::span<const ValueId> ids);
  ValueId sum_rows(ValueId a);                   // [m,n] -> [1,n]
  ValueId sum_all(ValueId a);                    // -> [1,1]
  ValueId tile_cols(ValueId a, int n);           // [m,1] -> [m,n]
  ValueId reshape(ValueId a, std::vector<int> shape);
  // Binary cross-entropy against constant targets, probabilities clamped to
  // [1e-6, 1 - 1e-6] before the logarithms.
  ValueId bce(ValueId probs, Tensor targets);
  // Valid cross-correlation, input [C,H,W], kernels [F,C,kh,kw], bias [F].
  ValueId conv2d(ValueId kernels, ValueId bias, ValueId image, int stride);
  // Batched variant, input [B,C,H,W] -> [B,F,Ho,Wo].
  ValueId conv2d_batch(ValueId kernels, ValueId bias, ValueId images, int stride);

  // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. The loss node
  // must be scalar. Parameter gradients accumulate into their stores.
  void backward(ValueId loss_id);

  size_t num_ops() const { return ops_.size(); }
  size_t num_nodes() const { return nodes_.size(); }

  static constexpr double kProbClamp = 1e-6;

 private:
  struct Node {
    Tensor value;
    Tensor grad;
  };
  struct Bind {
    ValueId id;
    ParamStore* store;
    std::string name;
  };

  ValueId push(Tensor v);
  void record(std::function<void(Tape&)> back);
  Tensor& grad_mut(ValueId id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
  std::vector<std::function<void(Tape&)>> ops_;
  std::vector<Bind> binds_;
};

// y = W x + b. b may be negative (-1) to skip the bias.
Tape::ValueId affine(Tape& t, Tape::ValueId W, Tape::ValueId b, Tape::ValueId x);

// Parameter ids for one recurrent cell.
struct RecurrentCellIds {
  Tape::ValueId wx = -1;     // input projection [4R, E]
  Tape::ValueId uh = -1;     // recurrent projection [4R, R]
  Tape::ValueId bias = -1;   // [4R]
  Tape::ValueId alpha = -1;  // multiplicative-integration gains [4R]
  Tape::ValueId beta1 = -1;
  Tape::ValueId beta2 = -1;
};

// One step of the recurrent cell. Gate order is (input, forget, output,
// candidate). With multiplicative integration the pre-activation is
// alpha*(Wx)*(Uh) + beta1*(Wx) + beta2*(Uh) + b; the standard cell uses
// Wx + Uh + b. Returns (h', c').
std::pair<Tape::ValueId, Tape::ValueId> lstm_cell(Tape& t, Tape::ValueId h, Tape::ValueId c,
                                                  Tape::ValueId x, const RecurrentCellIds& p,
                                                  bool multiplicative_integration);

}  // namespace gcg
