#pragma once

#include <cstdint>
#include <string>

namespace gcg {

enum class OutputMode { value, collision };
enum class LossMode { mse, cross_entropy };
enum class LabelExtension { extend, clip };
enum class RecurrentCell { mi_lstm, lstm };

// Instantiation switch-board for the computation graph.
struct GraphConfig {
  OutputMode output_mode = OutputMode::collision;
  LossMode loss_mode = LossMode::cross_entropy;
  int model_horizon = 16;   // H
  int label_horizon = 16;   // N
  double discount = 0.99;   // gamma
  bool bootstrap = false;
  int64_t target_sync_period = 1000;  // gradient steps between hard syncs
  double polyak_tau = 0.0;            // > 0 switches to soft updates
  bool monotonic_outputs = false;
  LabelExtension label_extension = LabelExtension::extend;
  RecurrentCell recurrent_cell = RecurrentCell::mi_lstm;

  void validate() const;
};

// Network dimensions. Frame input runs the conv encoder; ray input runs a
// two-layer fully-connected encoder.
struct NetConfig {
  bool frame_input = false;
  int obs_rows = 1;      // per frame (1 for ray mode)
  int obs_cols = 32;
  int frame_stack = 4;
  int conv_filters = 16;
  int conv_kernel = 5;
  int conv_stride = 2;
  int hidden_dim = 64;       // recurrent width
  int action_embed_dim = 16;
  int encoder_fc_dim = 64;

  int obs_numel() const { return frame_stack * obs_rows * obs_cols; }
  void validate() const;
};

}  // namespace gcg
