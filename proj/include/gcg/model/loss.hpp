#pragma once

#include <span>

#include "gcg/model/labels.hpp"
#include "gcg/model/nav_model.hpp"

namespace gcg {

// Assembles the configured training loss over a predicted batch and returns
// the scalar node (mean over the batch).
//
// Value mode: squared Bellman error between the discounted label sum (plus
// the discounted terminal label when bootstrapping) and the policy value of
// the predicted outputs. Collision mode: per-step binary cross-entropy or
// squared error, masked, plus the terminal term when bootstrapping.
Tape::ValueId build_loss(Prediction& pred, std::span<const Labels> labels, const GraphConfig& cfg);

// Forward-only convenience: the scalar loss value.
double loss_value(Prediction& pred, std::span<const Labels> labels, const GraphConfig& cfg);

}  // namespace gcg
