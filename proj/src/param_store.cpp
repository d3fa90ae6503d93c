#include "gcg/param_store.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "gcg/errors.hpp"

namespace gcg {

Tensor& ParamStore::create(const std::string& name, Tensor init) {
  if (entries_.count(name)) throw ConfigError("duplicate parameter name: " + name);
  Entry e;
  e.grad = Tensor(init.shape);
  e.m = Tensor(init.shape);
  e.v = Tensor(init.shape);
  e.value = std::move(init);
  auto [it, ok] = entries_.emplace(name, std::move(e));
  return it->second.value;
}

Tensor& ParamStore::value(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw UsageError("unknown parameter: " + name);
  return it->second.value;
}

const Tensor& ParamStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw UsageError("unknown parameter: " + name);
  return it->second.value;
}

Tensor& ParamStore::grad(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw UsageError("unknown parameter: " + name);
  return it->second.grad;
}

void ParamStore::zero_grads() {
  for (auto& [name, e] : entries_) std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
}

void ParamStore::adam_step(const AdamConfig& cfg) {
  for (auto& [name, e] : entries_) {
    for (int64_t i = 0; i < e.grad.numel(); ++i) {
      if (!std::isfinite(e.grad[i])) throw TrainingError("non-finite gradient in " + name);
    }
  }
  for (auto& [name, e] : entries_) {
    e.step += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(e.step));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(e.step));
    for (int64_t i = 0; i < e.value.numel(); ++i) {
      double g = e.grad[i];
      e.m[i] = cfg.beta1 * e.m[i] + (1.0 - cfg.beta1) * g;
      e.v[i] = cfg.beta2 * e.v[i] + (1.0 - cfg.beta2) * g * g;
      double mhat = e.m[i] / bc1;
      double vhat = e.v[i] / bc2;
      e.value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
  }
}

void ParamStore::hard_sync_from(const ParamStore& src) {
  for (auto& [name, e] : entries_) {
    const Tensor& s = src.value(name);
    if (!s.same_shape(e.value)) throw ConfigError("sync shape mismatch for " + name);
    e.value.data = s.data;
  }
}

void ParamStore::polyak_from(const ParamStore& src, double tau) {
  for (auto& [name, e] : entries_) {
    const Tensor& s = src.value(name);
    for (int64_t i = 0; i < e.value.numel(); ++i) {
      e.value[i] = tau * s[i] + (1.0 - tau) * e.value[i];
    }
  }
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

int64_t ParamStore::total_params() const {
  int64_t n = 0;
  for (const auto& [name, e] : entries_) n += e.value.numel();
  return n;
}

Tensor uniform_fanin_init(std::vector<int> shape, int fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

Tensor orthogonal_init(int n, Rng& rng) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  Tensor t({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.at(i, j) = q(i, j);
  return t;
}

}  // namespace gcg
