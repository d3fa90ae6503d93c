#include "gcg/grad_check.hpp"

#include <cmath>
#include <map>

namespace gcg {

GradCheckReport check_gradients(ParamStore& store,
                                const std::function<double(ParamStore&, bool)>& loss_fn,
                                double fd_step) {
  store.zero_grads();
  loss_fn(store, true);
  std::map<std::string, Tensor> analytic;
  for (const std::string& name : store.names()) analytic.emplace(name, store.grad(name));
  store.zero_grads();

  GradCheckReport report;
  for (const std::string& name : store.names()) {
    Tensor& theta = store.value(name);
    const Tensor& a = analytic.at(name);
    for (int64_t i = 0; i < theta.numel(); ++i) {
      double saved = theta[i];
      theta[i] = saved + fd_step;
      double up = loss_fn(store, false);
      theta[i] = saved - fd_step;
      double down = loss_fn(store, false);
      theta[i] = saved;
      double numeric = (up - down) / (2.0 * fd_step);
      double denom = std::max({std::abs(a[i]), std::abs(numeric), 1.0});
      double rel = std::abs(a[i] - numeric) / denom;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace gcg
