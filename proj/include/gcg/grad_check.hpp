#pragma once

#include <functional>
#include <string>

#include "gcg/param_store.hpp"

namespace gcg {

// Central finite-difference check of analytic gradients.
//
// `loss_fn(store, with_grad)` must return the scalar loss; when `with_grad`
// is set it must also accumulate d(loss)/d(theta) into the store's gradient
// buffers (which arrive zeroed).
struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int64_t worst_index = -1;
  bool ok(double tol) const { return max_rel_err <= tol; }
};

GradCheckReport check_gradients(ParamStore& store,
                                const std::function<double(ParamStore&, bool)>& loss_fn,
                                double fd_step = 1e-5);

}  // namespace gcg
