#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gcg/rng.hpp"
#include "gcg/tensor.hpp"

namespace gcg {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named parameter arrays with matching gradient accumulators and Adam state.
class ParamStore {
 public:
  struct Entry {
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
    int64_t step = 0;
  };

  // Registers a new parameter; names must be unique.
  Tensor& create(const std::string& name, Tensor init);

  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);

  void zero_grads();

  // Standard Adam update on every parameter; increments the per-parameter
  // step counter and zeroes gradients afterward.
  // Throws TrainingError if any gradient is non-finite.
  void adam_step(const AdamConfig& cfg);

  // Copies parameter values (not optimizer state) from another store.
  void hard_sync_from(const ParamStore& src);

  // Polyak update: value <- tau * src + (1 - tau) * value.
  void polyak_from(const ParamStore& src, double tau);

  std::vector<std::string> names() const;
  int64_t total_params() const;

  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::map<std::string, Entry>& entries() { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

// Uniform init with limit sqrt(3 / fan_in) (unit-variance-preserving).
Tensor uniform_fanin_init(std::vector<int> shape, int fan_in, Rng& rng);

// Square orthogonal matrix via QR of a Gaussian sample.
Tensor orthogonal_init(int n, Rng& rng);

}  // namespace gcg
