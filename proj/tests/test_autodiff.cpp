#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gcg/checkpoint.hpp"
#include "gcg/errors.hpp"
#include "gcg/grad_check.hpp"
#include "gcg/tape.hpp"

using namespace gcg;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-scale, scale);
  return t;
}

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("affine identity and constant cases") {
  Tape t;
  Tensor w({3, 3});
  for (int i = 0; i < 3; ++i) w.at(i, i) = 1.0;
  Tensor x({3, 1}, {1, 2, 3});
  auto y = affine(t, t.leaf(w), t.leaf(Tensor({3})), t.leaf(x));
  CHECK(t.val(y).at(0, 0) == 1.0);
  CHECK(t.val(y).at(1, 0) == 2.0);
  CHECK(t.val(y).at(2, 0) == 3.0);

  Tape t2;
  auto y2 = affine(t2, t2.leaf(Tensor({1, 3})), t2.leaf(Tensor({1}, {5.0})),
                   t2.leaf(Tensor({3, 1}, {7, -2, 9})));
  CHECK(t2.val(y2).at(0, 0) == 5.0);
}

TEST_CASE("affine shape mismatch is a configuration error") {
  Tape t;
  auto w = t.leaf(Tensor({4, 3}));
  auto x = t.leaf(Tensor({5, 1}));
  CHECK_THROWS_AS(t.matmul(w, x), ConfigError);
}

TEST_CASE("affine gradients match finite differences") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    ParamStore store;
    store.create("W", random_tensor({4, 3}, rng));
    store.create("b", random_tensor({4}, rng));
    Tensor x = random_tensor({3, 2}, rng);
    auto loss_fn = [&](ParamStore& s, bool with_grad) {
      Tape t;
      auto y = affine(t, t.param(s, "W"), t.param(s, "b"), t.leaf(x));
      auto loss = t.sum_all(t.square(y));
      if (with_grad) t.backward(loss);
      return t.val(loss).value();
    };
    auto report = check_gradients(store, loss_fn);
    CHECK(report.max_rel_err <= 1e-6);
  }
}

TEST_CASE("conv2d 1x1 identity kernel reproduces the input") {
  Tape t;
  Tensor k({1, 1, 1, 1}, {1.0});
  Rng rng(7);
  Tensor img = random_tensor({1, 4, 5}, rng);
  auto out = t.conv2d(t.leaf(k), t.leaf(Tensor({1})), t.leaf(img), 1);
  REQUIRE(t.val(out).shape == std::vector<int>{1, 4, 5});
  for (int64_t i = 0; i < img.numel(); ++i) CHECK(t.val(out)[i] == doctest::Approx(img[i]));
}

TEST_CASE("conv2d zero kernel gives zero output") {
  Tape t;
  Rng rng(8);
  auto out = t.conv2d(t.leaf(Tensor({2, 3, 3, 3})), t.leaf(Tensor({2})),
                      t.leaf(random_tensor({3, 6, 6}, rng)), 1);
  for (int64_t i = 0; i < t.val(out).numel(); ++i) CHECK(t.val(out)[i] == 0.0);
}

TEST_CASE("conv2d kernel larger than input is a configuration error") {
  Tape t;
  auto k = t.leaf(Tensor({1, 1, 7, 7}));
  auto img = t.leaf(Tensor({1, 5, 5}));
  CHECK_THROWS_AS(t.conv2d(k, -1, img, 1), ConfigError);
}

TEST_CASE("conv2d gradients match finite differences") {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(100 + seed);
    ParamStore store;
    store.create("K", random_tensor({2, 2, 5, 5}, rng, 0.5));
    store.create("b", random_tensor({2}, rng, 0.5));
    store.create("img", random_tensor({2, 9, 8}, rng));
    auto loss_fn = [&](ParamStore& s, bool with_grad) {
      Tape t;
      auto y = t.conv2d(t.param(s, "K"), t.param(s, "b"), t.param(s, "img"), 2);
      auto loss = t.sum_all(t.square(y));
      if (with_grad) t.backward(loss);
      return t.val(loss).value();
    };
    auto report = check_gradients(store, loss_fn);
    CHECK(report.max_rel_err <= 1e-6);
  }
}

namespace {

RecurrentCellIds bind_cell(Tape& t, ParamStore& s, bool mi) {
  RecurrentCellIds ids;
  ids.wx = t.param(s, "Wx");
  ids.uh = t.param(s, "Uh");
  ids.bias = t.param(s, "b");
  if (mi) {
    ids.alpha = t.param(s, "alpha");
    ids.beta1 = t.param(s, "beta1");
    ids.beta2 = t.param(s, "beta2");
  }
  return ids;
}

ParamStore make_cell_params(int r, int e, Rng& rng, bool mi, double scale) {
  ParamStore s;
  s.create("Wx", scale == 0.0 ? Tensor({4 * r, e}) : random_tensor({4 * r, e}, rng, scale));
  s.create("Uh", scale == 0.0 ? Tensor({4 * r, r}) : random_tensor({4 * r, r}, rng, scale));
  s.create("b", scale == 0.0 ? Tensor({4 * r}) : random_tensor({4 * r}, rng, scale));
  if (mi) {
    s.create("alpha", scale == 0.0 ? Tensor({4 * r}) : random_tensor({4 * r}, rng, scale));
    s.create("beta1", scale == 0.0 ? Tensor({4 * r}) : random_tensor({4 * r}, rng, scale));
    s.create("beta2", scale == 0.0 ? Tensor({4 * r}) : random_tensor({4 * r}, rng, scale));
  }
  return s;
}

}  // namespace

TEST_CASE("mi-lstm cell with all-zero parameters") {
  const int r = 3;
  Rng rng(0);
  ParamStore s = make_cell_params(r, 2, rng, true, 0.0);

  SUBCASE("zero cell state stays zero") {
    Tape t;
    auto ids = bind_cell(t, s, true);
    auto h = t.leaf(Tensor({r, 1}));
    auto c = t.leaf(Tensor({r, 1}));
    auto x = t.leaf(Tensor({2, 1}, {0.3, -0.4}));
    auto [h2, c2] = lstm_cell(t, h, c, x, ids, true);
    for (int i = 0; i < r; ++i) {
      CHECK(t.val(c2).at(i, 0) == doctest::Approx(0.0));
      CHECK(t.val(h2).at(i, 0) == doctest::Approx(0.0));
    }
  }

  SUBCASE("unit cell state halves through the forget gate") {
    Tape t;
    auto ids = bind_cell(t, s, true);
    auto h = t.leaf(Tensor({r, 1}));
    auto c = t.leaf(Tensor::full({r, 1}, 1.0));
    auto x = t.leaf(Tensor({2, 1}, {1.0, 1.0}));
    auto [h2, c2] = lstm_cell(t, h, c, x, ids, true);
    for (int i = 0; i < r; ++i) {
      CHECK(t.val(c2).at(i, 0) == doctest::Approx(0.5));
      CHECK(t.val(h2).at(i, 0) == doctest::Approx(0.5 * std::tanh(0.5)));
    }
  }
}

TEST_CASE("standard lstm matches a hand-computed two-unit case") {
  const int r = 2;
  ParamStore s;
  // Diagonal-ish weights chosen so every gate can be recomputed by hand.
  Tensor wx({4 * r, 1}, {0.5, -0.5, 1.0, 0.0, 0.25, 0.75, -1.0, 0.5});
  Tensor uh({4 * r, r});
  for (int i = 0; i < 4 * r; ++i) uh.at(i, i % r) = 0.5;
  Tensor b({4 * r}, {0.1, 0.2, 0.3, 0.4, -0.1, -0.2, 0.0, 0.1});
  s.create("Wx", wx);
  s.create("Uh", uh);
  s.create("b", b);

  Tape t;
  auto ids = bind_cell(t, s, false);
  Tensor h0({r, 1}, {0.2, -0.3});
  Tensor c0({r, 1}, {0.5, 0.1});
  double x0 = 0.7;
  auto [h2, c2] = lstm_cell(t, t.leaf(h0), t.leaf(c0), t.leaf(Tensor({1, 1}, {x0})), ids, false);

  for (int u = 0; u < r; ++u) {
    double zi = wx.at(0 * r + u, 0) * x0 + 0.5 * (u == 0 ? h0.at(0, 0) : h0.at(1, 0)) + b[0 * r + u];
    double zf = wx.at(1 * r + u, 0) * x0 + 0.5 * (u == 0 ? h0.at(0, 0) : h0.at(1, 0)) + b[1 * r + u];
    double zo = wx.at(2 * r + u, 0) * x0 + 0.5 * (u == 0 ? h0.at(0, 0) : h0.at(1, 0)) + b[2 * r + u];
    double zg = wx.at(3 * r + u, 0) * x0 + 0.5 * (u == 0 ? h0.at(0, 0) : h0.at(1, 0)) + b[3 * r + u];
    double ci = sigmoid_ref(zf) * c0.at(u, 0) + sigmoid_ref(zi) * std::tanh(zg);
    double hi = sigmoid_ref(zo) * std::tanh(ci);
    CHECK(t.val(c2).at(u, 0) == doctest::Approx(ci).epsilon(1e-12));
    CHECK(t.val(h2).at(u, 0) == doctest::Approx(hi).epsilon(1e-12));
  }
}

TEST_CASE("mi-lstm three-step unroll gradients match finite differences") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(200 + seed);
    const int r = 4, e = 3;
    ParamStore s = make_cell_params(r, e, rng, true, 0.7);
    std::vector<Tensor> xs;
    for (int k = 0; k < 3; ++k) xs.push_back(random_tensor({e, 2}, rng));
    auto loss_fn = [&](ParamStore& st, bool with_grad) {
      Tape t;
      auto ids = bind_cell(t, st, true);
      Tape::ValueId h = t.leaf(Tensor({r, 2}));
      Tape::ValueId c = t.leaf(Tensor({r, 2}));
      for (int k = 0; k < 3; ++k) {
        auto [h2, c2] = lstm_cell(t, h, c, t.leaf(xs[k]), ids, true);
        h = h2;
        c = c2;
      }
      auto loss = t.sum_all(t.square(h));
      if (with_grad) t.backward(loss);
      return t.val(loss).value();
    };
    auto report = check_gradients(s, loss_fn);
    CHECK(report.max_rel_err <= 1e-5);
  }
}

TEST_CASE("backward of x*x at x = 3 yields 6") {
  ParamStore s;
  s.create("x", Tensor({1, 1}, {3.0}));
  Tape t;
  auto x = t.param(s, "x");
  auto loss = t.sum_all(t.mul(x, x));
  t.backward(loss);
  CHECK(s.grad("x")[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("loss constant in the parameters leaves gradients zero") {
  ParamStore s;
  s.create("w", Tensor({2, 2}, {1, 2, 3, 4}));
  Tape t;
  auto w = t.param(s, "w");
  (void)t.mul(w, w);
  auto loss = t.sum_all(t.leaf(Tensor({1, 1}, {42.0})));
  // the recorded w ops never feed the loss node
  t.backward(loss);
  for (int64_t i = 0; i < 4; ++i) CHECK(s.grad("w")[i] == 0.0);
}

TEST_CASE("backward on an empty tape is a usage error") {
  Tape t;
  auto x = t.leaf(Tensor::scalar(1.0));
  CHECK_THROWS_AS(t.backward(x), UsageError);
}

TEST_CASE("backward accumulates across calls until gradients are zeroed") {
  ParamStore s;
  s.create("x", Tensor({1, 1}, {3.0}));
  Tape t;
  auto x = t.param(s, "x");
  auto loss = t.sum_all(t.mul(x, x));
  t.backward(loss);
  t.backward(loss);
  CHECK(s.grad("x")[0] == doctest::Approx(12.0));
}

TEST_CASE("full stack of primitive ops passes the gradient check") {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(300 + seed);
    ParamStore s;
    s.create("W", random_tensor({3, 4}, rng));
    s.create("v", random_tensor({3}, rng));
    Tensor x = random_tensor({4, 5}, rng);
    Tensor targets(std::vector<int>{3, 5});
    for (int64_t i = 0; i < targets.numel(); ++i) targets[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    auto loss_fn = [&](ParamStore& st, bool with_grad) {
      Tape t;
      auto y = t.matmul(t.param(st, "W"), t.leaf(x));
      y = t.mul_col(y, t.param(st, "v"));
      y = t.add_col(y, t.param(st, "v"));
      auto p = t.sigmoid(y);
      auto ce = t.bce(p, targets);
      auto mixed = t.add(ce, t.relu(t.tanh(y)));
      auto sliced = t.slice_rows(mixed, 0, 2);
      auto loss = t.sum_all(t.square(t.one_minus(t.sum_rows(sliced))));
      if (with_grad) t.backward(loss);
      return t.val(loss).value();
    };
    auto report = check_gradients(s, loss_fn);
    CHECK(report.max_rel_err <= 1e-6);
  }
}

TEST_CASE("adam leaves parameters unchanged under zero gradients") {
  ParamStore s;
  s.create("w", Tensor({2, 2}, {1, 2, 3, 4}));
  s.adam_step(AdamConfig{});
  CHECK(s.value("w")[0] == 1.0);
  CHECK(s.value("w")[3] == 4.0);
}

TEST_CASE("adam first step moves by the learning rate for unit gradient") {
  ParamStore s;
  s.create("w", Tensor({1}, {0.0}));
  s.grad("w")[0] = 1.0;
  AdamConfig cfg;
  cfg.lr = 0.1;
  s.adam_step(cfg);
  CHECK(s.value("w")[0] == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(s.grad("w")[0] == 0.0);  // zeroed afterwards
}

TEST_CASE("adam rejects non-finite gradients") {
  ParamStore s;
  s.create("w", Tensor({1}, {0.0}));
  s.grad("w")[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(s.adam_step(AdamConfig{}), TrainingError);
}

TEST_CASE("adam converges on a quadratic within 2000 steps") {
  ParamStore s;
  s.create("w", Tensor({2}, {4.0, -3.0}));
  AdamConfig cfg;
  cfg.lr = 1e-2;
  const double tx = 1.5, ty = -0.5;
  double first_loss = 0.0, last_loss = 0.0;
  for (int step = 0; step < 2000; ++step) {
    double dx = s.value("w")[0] - tx;
    double dy = s.value("w")[1] - ty;
    if (step == 0) first_loss = dx * dx + dy * dy;
    last_loss = dx * dx + dy * dy;
    s.grad("w")[0] = 2 * dx;
    s.grad("w")[1] = 2 * dy;
    s.adam_step(cfg);
  }
  CHECK(std::abs(s.value("w")[0] - tx) <= 1e-3);
  CHECK(std::abs(s.value("w")[1] - ty) <= 1e-3);
  CHECK(last_loss < first_loss);
}

TEST_CASE("forward pass is deterministic") {
  Rng rng(5);
  Tensor w = random_tensor({6, 6}, rng);
  Tensor x = random_tensor({6, 3}, rng);
  auto run = [&]() {
    Tape t;
    auto y = t.tanh(t.matmul(t.leaf(w), t.leaf(x)));
    return t.val(y);
  };
  Tensor a = run();
  Tensor b = run();
  CHECK(a.data == b.data);
}

TEST_CASE("checkpoint files round-trip bit-exactly") {
  Rng rng(17);
  ParamStore s;
  s.create("layer/W", random_tensor({5, 3}, rng));
  s.create("layer/b", random_tensor({5}, rng));
  auto dir = std::filesystem::temp_directory_path() / "gcg_ckpt_test";
  std::filesystem::create_directories(dir);
  auto p1 = dir / "a.gcg";
  auto p2 = dir / "b.gcg";
  save_checkpoint(s, p1);
  ParamStore loaded = load_checkpoint(p1);
  save_checkpoint(loaded, p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK(s1.substr(0, 8) == "GCGCKPT1");
}

TEST_CASE("checkpoint shape mismatch is a configuration error") {
  Rng rng(18);
  ParamStore s;
  s.create("w", random_tensor({3, 3}, rng));
  auto dir = std::filesystem::temp_directory_path() / "gcg_ckpt_test";
  std::filesystem::create_directories(dir);
  auto p = dir / "c.gcg";
  save_checkpoint(s, p);
  ParamStore other;
  other.create("w", Tensor({2, 2}));
  CHECK_THROWS_AS(load_checkpoint_into(p, other), ConfigError);
}

TEST_CASE("orthogonal init produces orthonormal columns") {
  Rng rng(3);
  Tensor q = orthogonal_init(6, rng);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      double dot = 0;
      for (int k = 0; k < 6; ++k) dot += q.at(k, i) * q.at(k, j);
      CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("duplicate parameter names are rejected") {
  ParamStore s;
  s.create("w", Tensor({1}));
  CHECK_THROWS_AS(s.create("w", Tensor({1})), ConfigError);
}
