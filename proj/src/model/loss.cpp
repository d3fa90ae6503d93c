#include "gcg/model/loss.hpp"

#include <cmath>

#include "gcg/errors.hpp"

namespace gcg {

namespace {

double discount_pow(double gamma, int e) { return std::pow(gamma, static_cast<double>(e)); }

}  // namespace

Tape::ValueId build_loss(Prediction& pred, std::span<const Labels> labels, const GraphConfig& cfg) {
  Tape& t = pred.tape;
  const int H = cfg.model_horizon;
  const int B = pred.outputs.batch();
  if (static_cast<int>(labels.size()) != B) throw UsageError("labels batch size mismatch");
  for (const Labels& l : labels) {
    if (static_cast<int>(l.y.size()) != H) throw UsageError("label horizon mismatch");
    if (l.needs_bootstrap) throw UsageError("bootstrap label left unresolved");
  }

  Tape::ValueId y_mat = t.concat_rows(pred.y_ids);
  Tape::ValueId loss;

  if (cfg.output_mode == OutputMode::value) {
    Tensor target({1, B});
    Tensor yw({H, B});
    Tensor bsel({H, B});
    for (int i = 0; i < B; ++i) {
      const Labels& l = labels[i];
      const int n = l.terminal_step + 1;
      double tgt;
      if (l.override_target) {
        tgt = *l.override_target;
      } else {
        tgt = 0.0;
        for (int h = 0; h < H; ++h) tgt += discount_pow(cfg.discount, h) * l.y[h] * l.mask[h];
        if (cfg.bootstrap) tgt += discount_pow(cfg.discount, n) * l.terminal_label;
      }
      target.at(0, i) = tgt;
      for (int h = 0; h < H; ++h) yw.at(h, i) = discount_pow(cfg.discount, h) * l.mask[h];
      if (cfg.bootstrap) bsel.at(l.terminal_step, i) = discount_pow(cfg.discount, n);
    }
    Tape::ValueId j = t.sum_rows(t.mul_const(y_mat, std::move(yw)));
    if (cfg.bootstrap) {
      Tape::ValueId b_mat = t.concat_rows(pred.b_ids);
      j = t.add(j, t.sum_rows(t.mul_const(b_mat, std::move(bsel))));
    }
    for (int64_t i = 0; i < target.numel(); ++i) target[i] = -target[i];
    Tape::ValueId diff = t.add_const(j, std::move(target));
    loss = t.sum_all(t.square(diff));
  } else {
    Tensor y_lab({H, B});
    Tensor mask({H, B});
    Tensor bsel({H, B});
    Tensor b_lab({1, B});
    for (int i = 0; i < B; ++i) {
      const Labels& l = labels[i];
      for (int h = 0; h < H; ++h) {
        y_lab.at(h, i) = l.y[h];
        mask.at(h, i) = l.mask[h];
      }
      bsel.at(l.terminal_step, i) = 1.0;
      b_lab.at(0, i) = l.terminal_label;
    }
    Tape::ValueId per_step;
    if (cfg.loss_mode == LossMode::cross_entropy) {
      per_step = t.bce(y_mat, std::move(y_lab));
    } else {
      for (int64_t i = 0; i < y_lab.numel(); ++i) y_lab[i] = -y_lab[i];
      per_step = t.square(t.add_const(y_mat, std::move(y_lab)));
    }
    loss = t.sum_all(t.mul_const(per_step, std::move(mask)));
    if (cfg.bootstrap) {
      Tape::ValueId b_mat = t.concat_rows(pred.b_ids);
      Tape::ValueId b_at_terminal = t.sum_rows(t.mul_const(b_mat, std::move(bsel)));
      Tape::ValueId term;
      if (cfg.loss_mode == LossMode::cross_entropy) {
        term = t.bce(b_at_terminal, std::move(b_lab));
      } else {
        for (int64_t i = 0; i < b_lab.numel(); ++i) b_lab[i] = -b_lab[i];
        term = t.square(t.add_const(b_at_terminal, std::move(b_lab)));
      }
      loss = t.add(loss, t.sum_all(term));
    }
  }
  loss = t.scale(loss, 1.0 / B);
  const double v = t.val(loss).value();
  if (!std::isfinite(v)) throw TrainingError("non-finite training loss");
  return loss;
}

double loss_value(Prediction& pred, std::span<const Labels> labels, const GraphConfig& cfg) {
  return pred.tape.val(build_loss(pred, labels, cfg)).value();
}

}  // namespace gcg
