#include "gcg/model/nav_model.hpp"

#include <cmath>

#include "gcg/errors.hpp"

namespace gcg {

void GraphConfig::validate() const {
  if (model_horizon < 1) throw ConfigError("model_horizon must be >= 1");
  if (label_horizon < 1) throw ConfigError("label_horizon must be >= 1");
  if (label_horizon != model_horizon && model_horizon != 1) {
    throw ConfigError("label_horizon must equal model_horizon unless model_horizon == 1");
  }
  if (label_horizon != model_horizon && output_mode != OutputMode::value) {
    throw ConfigError("multi-step label horizons require value outputs");
  }
  if (discount < 0.0 || discount > 1.0) throw ConfigError("discount must lie in [0, 1]");
  if (loss_mode == LossMode::cross_entropy && output_mode != OutputMode::collision) {
    throw ConfigError("cross-entropy loss requires collision outputs");
  }
  if (monotonic_outputs && output_mode != OutputMode::collision) {
    throw ConfigError("monotonic outputs require collision mode");
  }
  if (target_sync_period < 1) throw ConfigError("target_sync_period must be >= 1");
  if (polyak_tau < 0.0 || polyak_tau > 1.0) throw ConfigError("polyak_tau must lie in [0, 1]");
}

void NetConfig::validate() const {
  if (obs_rows < 1 || obs_cols < 1) throw ConfigError("observation dims must be positive");
  if (hidden_dim < 1 || action_embed_dim < 1 || encoder_fc_dim < 1) {
    throw ConfigError("network dims must be positive");
  }
  if (frame_input && (obs_rows < conv_kernel || obs_cols < conv_kernel)) {
    throw ConfigError("frame smaller than conv kernel");
  }
}

void ObsStack::push_frame(const Frame& f) {
  if (rows == 0) {
    rows = f.rows;
    cols = f.cols;
    data.assign(static_cast<size_t>(4) * rows * cols, 0.0);
  }
  const size_t frame_sz = static_cast<size_t>(rows) * cols;
  std::copy(data.begin() + frame_sz, data.end(), data.begin());
  double* dst = data.data() + 3 * frame_sz;
  for (size_t i = 0; i < frame_sz; ++i) dst[i] = f.pixels[i] / 255.0;
}

NavModel::NavModel(NetConfig net, GraphConfig graph) : net_(net), graph_(graph) {
  net_.validate();
  graph_.validate();
}

ParamStore NavModel::init_params(Rng& rng) const {
  ParamStore p;
  const int R = net_.hidden_dim;
  const int E = net_.action_embed_dim;

  int feat_dim;
  if (net_.frame_input) {
    const int F = net_.conv_filters, k = net_.conv_kernel, s = net_.conv_stride;
    p.create("enc/conv1/K", uniform_fanin_init({F, net_.frame_stack, k, k}, net_.frame_stack * k * k, rng));
    p.create("enc/conv1/b", Tensor({F}));
    p.create("enc/conv2/K", uniform_fanin_init({F, F, k, k}, F * k * k, rng));
    p.create("enc/conv2/b", Tensor({F}));
    int h1 = (net_.obs_rows - k) / s + 1;
    int w1 = (net_.obs_cols - k) / s + 1;
    int h2 = (h1 - k) / s + 1;
    int w2 = (w1 - k) / s + 1;
    if (h2 < 1 || w2 < 1) throw ConfigError("frame too small for the conv stack");
    feat_dim = net_.conv_filters * h2 * w2;
  } else {
    const int in = net_.obs_numel();
    p.create("enc/fc1/W", uniform_fanin_init({net_.encoder_fc_dim, in}, in, rng));
    p.create("enc/fc1/b", Tensor({net_.encoder_fc_dim}));
    feat_dim = net_.encoder_fc_dim;
  }
  p.create("enc/h0/W", uniform_fanin_init({R, feat_dim}, feat_dim, rng));
  p.create("enc/h0/b", Tensor({R}));

  p.create("act/W", uniform_fanin_init({E, 1}, 1, rng));
  p.create("act/b", Tensor({E}));

  p.create("cell/Wx", uniform_fanin_init({4 * R, E}, E, rng));
  {
    Tensor u({4 * R, R});
    for (int g = 0; g < 4; ++g) {
      Tensor blk = orthogonal_init(R, rng);
      for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j) u.at(g * R + i, j) = blk.at(i, j);
    }
    p.create("cell/Uh", std::move(u));
  }
  {
    Tensor b({4 * R});
    for (int i = R; i < 2 * R; ++i) b[i] = 1.0;  // forget gate opens early
    p.create("cell/b", std::move(b));
  }
  if (graph_.recurrent_cell == RecurrentCell::mi_lstm) {
    p.create("cell/alpha", Tensor::full({4 * R}, 1.0));
    p.create("cell/beta1", Tensor::full({4 * R}, 0.5));
    p.create("cell/beta2", Tensor::full({4 * R}, 0.5));
  }

  p.create("head/y/W", uniform_fanin_init({1, R}, R, rng));
  p.create("head/y/b", Tensor({1}));
  p.create("head/b/W", uniform_fanin_init({1, R}, R, rng));
  p.create("head/b/b", Tensor({1}));
  return p;
}

std::vector<Tape::ValueId> enforce_monotonic(Tape& tape, std::span<const Tape::ValueId> step_logits) {
  std::vector<Tape::ValueId> probs;
  probs.reserve(step_logits.size());
  Tape::ValueId survival = -1;
  for (Tape::ValueId z : step_logits) {
    Tape::ValueId keep = tape.one_minus(tape.sigmoid(z));
    survival = survival < 0 ? keep : tape.mul(survival, keep);
    probs.push_back(tape.one_minus(survival));
  }
  return probs;
}

Tape::ValueId NavModel::encode(Tape& t, ParamStore& params, std::span<const ObsStack> obs,
                               int batch) const {
  const int per_frame = net_.obs_rows * net_.obs_cols;
  const int stacked = net_.obs_numel();
  const int n = static_cast<int>(obs.size());
  for (const ObsStack& o : obs) {
    if (static_cast<int>(o.data.size()) != stacked) {
      throw ConfigError("observation stack has " + std::to_string(o.data.size()) + " values, expected " +
                        std::to_string(stacked));
    }
  }

  Tape::ValueId feat;
  if (net_.frame_input) {
    Tensor imgs({n, net_.frame_stack, net_.obs_rows, net_.obs_cols});
    for (int b = 0; b < n; ++b) {
      std::copy(obs[b].data.begin(), obs[b].data.end(), imgs.data.begin() + static_cast<size_t>(b) * stacked);
    }
    Tape::ValueId x = t.leaf(std::move(imgs));
    Tape::ValueId k1 = t.param(params, "enc/conv1/K");
    Tape::ValueId b1 = t.param(params, "enc/conv1/b");
    Tape::ValueId c1 = t.relu(t.conv2d_batch(k1, b1, x, net_.conv_stride));
    Tape::ValueId k2 = t.param(params, "enc/conv2/K");
    Tape::ValueId b2 = t.param(params, "enc/conv2/b");
    Tape::ValueId c2 = t.relu(t.conv2d_batch(k2, b2, c1, net_.conv_stride));
    // [B, F, h, w] -> columns of a [feat, B] matrix
    const Tensor& v = t.val(c2);
    int feat_dim = static_cast<int>(v.numel() / n);
    Tape::ValueId flat = t.reshape(c2, {n, feat_dim});
    // transpose via per-sample slices
    std::vector<Tape::ValueId> cols;
    cols.reserve(n);
    for (int b = 0; b < n; ++b) cols.push_back(t.reshape(t.slice_rows(flat, b, b + 1), {feat_dim, 1}));
    feat = cols.size() == 1 ? cols[0] : t.concat_cols(cols);
  } else {
    Tensor x({stacked, n});
    for (int b = 0; b < n; ++b) {
      for (int i = 0; i < stacked; ++i) x.at(i, b) = obs[b].data[i];
    }
    Tape::ValueId xin = t.leaf(std::move(x));
    feat = t.relu(affine(t, t.param(params, "enc/fc1/W"), t.param(params, "enc/fc1/b"), xin));
  }
  (void)per_frame;

  Tape::ValueId h0 = t.tanh(affine(t, t.param(params, "enc/h0/W"), t.param(params, "enc/h0/b"), feat));
  if (n == 1 && batch > 1) h0 = t.tile_cols(h0, batch);
  return h0;
}

Prediction NavModel::predict(ParamStore& params, std::span<const ObsStack> obs,
                             const Tensor& actions) const {
  const int H = graph_.model_horizon;
  if (actions.rank() != 2 || actions.rows() != H) {
    throw UsageError("action sequence must be [" + std::to_string(H) + ", B], got " + actions.shape_str());
  }
  const int B = actions.cols();
  if (!(obs.size() == static_cast<size_t>(B) || obs.size() == 1)) {
    throw UsageError("observation batch must match action batch or be 1");
  }

  Prediction pred;
  Tape& t = pred.tape;
  Tape::ValueId h = encode(t, params, obs, B);
  Tape::ValueId c = t.leaf(Tensor({net_.hidden_dim, B}));

  RecurrentCellIds cell;
  cell.wx = t.param(params, "cell/Wx");
  cell.uh = t.param(params, "cell/Uh");
  cell.bias = t.param(params, "cell/b");
  const bool mi = graph_.recurrent_cell == RecurrentCell::mi_lstm;
  if (mi) {
    cell.alpha = t.param(params, "cell/alpha");
    cell.beta1 = t.param(params, "cell/beta1");
    cell.beta2 = t.param(params, "cell/beta2");
  }
  Tape::ValueId act_w = t.param(params, "act/W");
  Tape::ValueId act_b = t.param(params, "act/b");
  Tape::ValueId yw = t.param(params, "head/y/W");
  Tape::ValueId yb = t.param(params, "head/y/b");
  Tape::ValueId bw = t.param(params, "head/b/W");
  Tape::ValueId bb = t.param(params, "head/b/b");

  std::vector<Tape::ValueId> y_logits;
  y_logits.reserve(H);
  pred.b_ids.reserve(H);
  for (int step = 0; step < H; ++step) {
    Tensor a({1, B});
    for (int bcol = 0; bcol < B; ++bcol) a.at(0, bcol) = actions.at(step, bcol);
    Tape::ValueId embedded = affine(t, act_w, act_b, t.leaf(std::move(a)));
    auto [h_next, c_next] = lstm_cell(t, h, c, embedded, cell, mi);
    h = h_next;
    c = c_next;
    y_logits.push_back(affine(t, yw, yb, h));
    Tape::ValueId b_out = affine(t, bw, bb, h);
    if (graph_.output_mode == OutputMode::collision) b_out = t.sigmoid(b_out);
    pred.b_ids.push_back(b_out);
  }

  if (graph_.output_mode == OutputMode::collision) {
    if (graph_.monotonic_outputs) {
      pred.y_ids = enforce_monotonic(t, y_logits);
    } else {
      pred.y_ids.reserve(H);
      for (Tape::ValueId z : y_logits) pred.y_ids.push_back(t.sigmoid(z));
    }
  } else {
    pred.y_ids = std::move(y_logits);
  }

  pred.outputs.y = Tensor({H, B});
  pred.outputs.b_steps = Tensor({H, B});
  for (int step = 0; step < H; ++step) {
    const Tensor& yv = t.val(pred.y_ids[step]);
    const Tensor& bv = t.val(pred.b_ids[step]);
    for (int bcol = 0; bcol < B; ++bcol) {
      pred.outputs.y.at(step, bcol) = yv.at(0, bcol);
      pred.outputs.b_steps.at(step, bcol) = bv.at(0, bcol);
    }
  }
  return pred;
}

Prediction NavModel::predict_one(ParamStore& params, const ObsStack& obs,
                                 std::span<const double> action_sequence) const {
  if (static_cast<int>(action_sequence.size()) != graph_.model_horizon) {
    throw UsageError("action sequence length " + std::to_string(action_sequence.size()) + ", expected " +
                     std::to_string(graph_.model_horizon));
  }
  Tensor a({graph_.model_horizon, 1});
  for (int h = 0; h < graph_.model_horizon; ++h) a.at(h, 0) = action_sequence[h];
  return predict(params, std::span<const ObsStack>(&obs, 1), a);
}

}  // namespace gcg
