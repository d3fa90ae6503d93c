#include "gcg/tape.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>

namespace gcg {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

namespace {

MatMap as_mat(Tensor& t) { return MatMap(t.data.data(), t.rows(), t.cols()); }
ConstMatMap as_mat(const Tensor& t) { return ConstMatMap(t.data.data(), t.rows(), t.cols()); }

void require_2d(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ConfigError(std::string(op) + ": expected rank-2 tensor, got " + t.shape_str());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ConfigError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace

Tape::ValueId Tape::push(Tensor v) {
  nodes_.push_back(Node{std::move(v), Tensor{}});
  return static_cast<ValueId>(nodes_.size() - 1);
}

void Tape::record(std::function<void(Tape&)> back) { ops_.push_back(std::move(back)); }

Tape::ValueId Tape::leaf(Tensor v) { return push(std::move(v)); }

Tape::ValueId Tape::param(ParamStore& store, const std::string& name) {
  ValueId id = push(store.value(name));
  binds_.push_back(Bind{id, &store, name});
  return id;
}

Tape::ValueId Tape::matmul(ValueId a, ValueId b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  require_2d(A, "matmul");
  require_2d(B, "matmul");
  if (A.cols() != B.rows()) {
    throw ConfigError("matmul: inner dimensions " + A.shape_str() + " x " + B.shape_str());
  }
  Tensor C({A.rows(), B.cols()});
  as_mat(C) = as_mat(A) * as_mat(B);
  ValueId c = push(std::move(C));
  record([a, b, c](Tape& t) {
    as_mat(t.grad_mut(a)) += as_mat(t.grad(c)) * as_mat(t.val(b)).transpose();
    as_mat(t.grad_mut(b)) += as_mat(t.val(a)).transpose() * as_mat(t.grad(c));
  });
  return c;
}

Tape::ValueId Tape::add(ValueId a, ValueId b) {
  require_same_shape(val(a), val(b), "add");
  Tensor out = val(a);
  const Tensor& B = val(b);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] += B[i];
  ValueId c = push(std::move(out));
  record([a, b, c](Tape& t) {
    const Tensor& g = t.grad(c);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int64_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
  return c;
}

Tape::ValueId Tape::sub(ValueId a, ValueId b) {
  require_same_shape(val(a), val(b), "sub");
  Tensor out = val(a);
  const Tensor& B = val(b);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] -= B[i];
  ValueId c = push(std::move(out));
  record([a, b, c](Tape& t) {
    const Tensor& g = t.grad(c);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int64_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
  return c;
}

Tape::ValueId Tape::mul(ValueId a, ValueId b) {
  require_same_shape(val(a), val(b), "mul");
  Tensor out = val(a);
  const Tensor& B = val(b);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= B[i];
  ValueId c = push(std::move(out));
  record([a, b, c](Tape& t) {
    const Tensor& g = t.grad(c);
    const Tensor& A = t.val(a);
    const Tensor& B2 = t.val(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int64_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i] * B2[i];
      gb[i] += g[i] * A[i];
    }
  });
  return c;
}

Tape::ValueId Tape::add_col(ValueId mat, ValueId vec) {
  const Tensor& M = val(mat);
  const Tensor& V = val(vec);
  require_2d(M, "add_col");
  if (V.numel() != M.rows()) {
    throw ConfigError("add_col: vector length " + V.shape_str() + " vs rows of " + M.shape_str());
  }
  Tensor out = M;
  int n = M.cols();
  for (int r = 0; r < M.rows(); ++r) {
    double v = V[r];
    for (int c = 0; c < n; ++c) out.at(r, c) += v;
  }
  ValueId id = push(std::move(out));
  record([mat, vec, id](Tape& t) {
    const Tensor& g = t.grad(id);
    Tensor& gm = t.grad_mut(mat);
    Tensor& gv = t.grad_mut(vec);
    int n = g.cols();
    for (int r = 0; r < g.rows(); ++r) {
      double s = 0;
      for (int c = 0; c < n; ++c) {
        gm.at(r, c) += g.at(r, c);
        s += g.at(r, c);
      }
      gv[r] += s;
    }
  });
  return id;
}

Tape::ValueId Tape::mul_col(ValueId mat, ValueId vec) {
  const Tensor& M = val(mat);
  const Tensor& V = val(vec);
  require_2d(M, "mul_col");
  if (V.numel() != M.rows()) {
    throw ConfigError("mul_col: vector length " + V.shape_str() + " vs rows of " + M.shape_str());
  }
  Tensor out = M;
  int n = M.cols();
  for (int r = 0; r < M.rows(); ++r) {
    double v = V[r];
    for (int c = 0; c < n; ++c) out.at(r, c) *= v;
  }
  ValueId id = push(std::move(out));
  record([mat, vec, id](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& M2 = t.val(mat);
    const Tensor& V2 = t.val(vec);
    Tensor& gm = t.grad_mut(mat);
    Tensor& gv = t.grad_mut(vec);
    int n = g.cols();
    for (int r = 0; r < g.rows(); ++r) {
      double v = V2[r];
      double s = 0;
      for (int c = 0; c < n; ++c) {
        gm.at(r, c) += g.at(r, c) * v;
        s += g.at(r, c) * M2.at(r, c);
      }
      gv[r] += s;
    }
  });
  return id;
}

Tape::ValueId Tape::add_const(ValueId a, Tensor cst) {
  require_same_shape(val(a), cst, "add_const");
  Tensor out = val(a);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] += cst[i];
  ValueId c = push(std::move(out));
  record([a, c](Tape& t) {
    const Tensor& g = t.grad(c);
    Tensor& ga = t.grad_mut(a);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
  });
  return c;
}

Tape::ValueId Tape::mul_const(ValueId a, Tensor cst) {
  require_same_shape(val(a), cst, "mul_const");
  Tensor out = val(a);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= cst[i];
  ValueId c = push(std::move(out));
  auto shared = std::make_shared<Tensor>(std::move(cst));
  record([a, c, shared](Tape& t) {
    const Tensor& g = t.grad(c);
    Tensor& ga = t.grad_mut(a);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * (*shared)[i];
  });
  return c;
}

Tape::ValueId Tape::scale(ValueId a, double s) {
  Tensor out = val(a);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= s;
  ValueId c = push(std::move(out));
  record([a, c, s](Tape& t) {
    const Tensor& g = t.grad(c);
    Tensor& ga = t.grad_mut(a);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * s;
  });
  return c;
}

Tape::ValueId Tape::one_minus(ValueId a) {
  Tensor out = val(a);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = 1.0 - out[i];
  ValueId c = push(std::move(out));
  record([a, c](Tape& t) {
    const Tensor& g = t.grad(c);
    Tensor& ga = t.grad_mut(a);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] -= g[i];
  });
  return c;
}

Tape::ValueId Tape::square(ValueId a) {
  Tensor out = val(a);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= out[i];
  ValueId c = push(std::move(out));
  record([a, c](Tape& t) {
    const Tensor& g = t.grad(c);
    const Tensor& A = t.val(a);
    Tensor& ga = t.grad_mut(a);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * 2.0 * A[i];
  });
  return c;
}

Tape::ValueId Tape::sigmoid(ValueId a) {
  Tensor out = val(a);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  ValueId c = push(std::move(out));
  record([a, c](Tape& t) {
    const Tensor& g = t.grad(c);
    const Tensor& Y = t.val(c);
    Tensor& ga = t.grad_mut(a);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * Y[i] * (1.0 - Y[i]);
  });
  return c;
}

Tape::ValueId Tape::tanh(ValueId a) {
  Tensor out = val(a);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
  ValueId c = push(std::move(out));
  record([a, c](Tape& t) {
    const Tensor& g = t.grad(c);
    const Tensor& Y = t.val(c);
    Tensor& ga = t.grad_mut(a);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * (1.0 - Y[i] * Y[i]);
  });
  return c;
}

Tape::ValueId Tape::relu(ValueId a) {
  Tensor out = val(a);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = out[i] > 0 ? out[i] : 0.0;
  ValueId c = push(std::move(out));
  record([a, c](Tape& t) {
    const Tensor& g = t.grad(c);
    const Tensor& A = t.val(a);
    Tensor& ga = t.grad_mut(a);
    for (int64_t i = 0; i < g.numel(); ++i) {
      if (A[i] > 0) ga[i] += g[i];
    }
  });
  return c;
}

Tape::ValueId Tape::slice_rows(ValueId a, int r0, int r1) {
  const Tensor& A = val(a);
  require_2d(A, "slice_rows");
  if (r0 < 0 || r1 > A.rows() || r0 >= r1) throw ConfigError("slice_rows: bad range");
  int n = A.cols();
  Tensor out({r1 - r0, n});
  std::copy(A.data.begin() + static_cast<size_t>(r0) * n, A.data.begin() + static_cast<size_t>(r1) * n,
            out.data.begin());
  ValueId c = push(std::move(out));
  record([a, c, r0](Tape& t) {
    const Tensor& g = t.grad(c);
    Tensor& ga = t.grad_mut(a);
    int n = g.cols();
    for (int r = 0; r < g.rows(); ++r)
      for (int j = 0; j < n; ++j) ga.at(r0 + r, j) += g.at(r, j);
  });
  return c;
}

Tape::ValueId Tape::concat_rows(std::span<const ValueId> ids) {
  if (ids.empty()) throw UsageError("concat_rows: no inputs");
  int n = val(ids[0]).cols();
  int rows = 0;
  for (ValueId id : ids) {
    const Tensor& x = val(id);
    require_2d(x, "concat_rows");
    if (x.cols() != n) throw ConfigError("concat_rows: column mismatch");
    rows += x.rows();
  }
  Tensor out({rows, n});
  int r = 0;
  for (ValueId id : ids) {
    const Tensor& x = val(id);
    std::copy(x.data.begin(), x.data.end(), out.data.begin() + static_cast<size_t>(r) * n);
    r += x.rows();
  }
  ValueId c = push(std::move(out));
  std::vector<ValueId> owned(ids.begin(), ids.end());
  record([owned, c](Tape& t) {
    const Tensor& g = t.grad(c);
    int n = g.cols();
    int r = 0;
    for (ValueId id : owned) {
      Tensor& ga = t.grad_mut(id);
      for (int i = 0; i < ga.rows(); ++i)
        for (int j = 0; j < n; ++j) ga.at(i, j) += g.at(r + i, j);
      r += ga.rows();
    }
  });
  return c;
}

Tape::ValueId Tape::concat_cols(std::span<const ValueId> ids) {
  if (ids.empty()) throw UsageError("concat_cols: no inputs");
  int m = val(ids[0]).rows();
  int cols = 0;
  for (ValueId id : ids) {
    const Tensor& x = val(id);
    require_2d(x, "concat_cols");
    if (x.rows() != m) throw ConfigError("concat_cols: row mismatch");
    cols += x.cols();
  }
  Tensor out({m, cols});
  int c0 = 0;
  for (ValueId id : ids) {
    const Tensor& x = val(id);
    for (int r = 0; r < m; ++r)
      for (int j = 0; j < x.cols(); ++j) out.at(r, c0 + j) = x.at(r, j);
    c0 += x.cols();
  }
  ValueId c = push(std::move(out));
  std::vector<ValueId> owned(ids.begin(), ids.end());
  record([owned, c](Tape& t) {
    const Tensor& g = t.grad(c);
    int c0 = 0;
    for (ValueId id : owned) {
      Tensor& ga = t.grad_mut(id);
      for (int r = 0; r < ga.rows(); ++r)
        for (int j = 0; j < ga.cols(); ++j) ga.at(r, j) += g.at(r, c0 + j);
      c0 += ga.cols();
    }
  });
  return c;
}

Tape::ValueId Tape::sum_rows(ValueId a) {
  const Tensor& A = val(a);
  require_2d(A, "sum_rows");
  int n = A.cols();
  Tensor out({1, n});
  for (int r = 0; r < A.rows(); ++r)
    for (int j = 0; j < n; ++j) out.at(0, j) += A.at(r, j);
  ValueId c = push(std::move(out));
  record([a, c](Tape& t) {
    const Tensor& g = t.grad(c);
    Tensor& ga = t.grad_mut(a);
    int n = g.cols();
    for (int r = 0; r < ga.rows(); ++r)
      for (int j = 0; j < n; ++j) ga.at(r, j) += g.at(0, j);
  });
  return c;
}

Tape::ValueId Tape::sum_all(ValueId a) {
  const Tensor& A = val(a);
  double s = 0;
  for (int64_t i = 0; i < A.numel(); ++i) s += A[i];
  ValueId c = push(Tensor::scalar(s));
  record([a, c](Tape& t) {
    double g = t.grad(c)[0];
    Tensor& ga = t.grad_mut(a);
    for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += g;
  });
  return c;
}

Tape::ValueId Tape::tile_cols(ValueId a, int n) {
  const Tensor& A = val(a);
  require_2d(A, "tile_cols");
  if (A.cols() != 1) throw ConfigError("tile_cols: expected a column, got " + A.shape_str());
  Tensor out({A.rows(), n});
  for (int r = 0; r < A.rows(); ++r) {
    double v = A.at(r, 0);
    for (int j = 0; j < n; ++j) out.at(r, j) = v;
  }
  ValueId c = push(std::move(out));
  record([a, c](Tape& t) {
    const Tensor& g = t.grad(c);
    Tensor& ga = t.grad_mut(a);
    for (int r = 0; r < ga.rows(); ++r) {
      double s = 0;
      for (int j = 0; j < g.cols(); ++j) s += g.at(r, j);
      ga.at(r, 0) += s;
    }
  });
  return c;
}

Tape::ValueId Tape::reshape(ValueId a, std::vector<int> shape) {
  const Tensor& A = val(a);
  if (Tensor::numel_of(shape) != A.numel()) throw ConfigError("reshape: element count mismatch");
  Tensor out(std::move(shape), A.data);
  ValueId c = push(std::move(out));
  record([a, c](Tape& t) {
    const Tensor& g = t.grad(c);
    Tensor& ga = t.grad_mut(a);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
  });
  return c;
}

Tape::ValueId Tape::bce(ValueId probs, Tensor targets) {
  const Tensor& P = val(probs);
  require_same_shape(P, targets, "bce");
  Tensor out = P;
  for (int64_t i = 0; i < out.numel(); ++i) {
    double p = std::clamp(P[i], kProbClamp, 1.0 - kProbClamp);
    double y = targets[i];
    out[i] = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  ValueId c = push(std::move(out));
  auto shared = std::make_shared<Tensor>(std::move(targets));
  record([probs, c, shared](Tape& t) {
    const Tensor& g = t.grad(c);
    const Tensor& P2 = t.val(probs);
    Tensor& gp = t.grad_mut(probs);
    for (int64_t i = 0; i < g.numel(); ++i) {
      double p = P2[i];
      if (p <= kProbClamp || p >= 1.0 - kProbClamp) continue;  // clamped: flat
      gp[i] += g[i] * (p - (*shared)[i]) / (p * (1.0 - p));
    }
  });
  return c;
}

namespace {

struct ConvDims {
  int C, H, W, F, kh, kw, Ho, Wo;
};

ConvDims conv_dims(const Tensor& kernels, const Tensor& image, int stride, int c_axis) {
  if (kernels.rank() != 4) throw ConfigError("conv2d: kernels must be [F,C,kh,kw]");
  ConvDims d{};
  d.F = kernels.shape[0];
  d.kh = kernels.shape[2];
  d.kw = kernels.shape[3];
  d.C = image.shape[c_axis];
  d.H = image.shape[c_axis + 1];
  d.W = image.shape[c_axis + 2];
  if (kernels.shape[1] != d.C) throw ConfigError("conv2d: channel mismatch");
  if (d.kh > d.H || d.kw > d.W) throw ConfigError("conv2d: kernel larger than input");
  if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
  d.Ho = (d.H - d.kh) / stride + 1;
  d.Wo = (d.W - d.kw) / stride + 1;
  return d;
}

// One image (C,H,W contiguous) -> out (F,Ho,Wo contiguous).
void conv_forward(const double* img, const double* ker, const double* bias, double* out,
                  const ConvDims& d, int stride) {
  for (int f = 0; f < d.F; ++f) {
    for (int oy = 0; oy < d.Ho; ++oy) {
      for (int ox = 0; ox < d.Wo; ++ox) {
        double acc = bias ? bias[f] : 0.0;
        for (int c = 0; c < d.C; ++c) {
          const double* ip = img + (static_cast<size_t>(c) * d.H + oy * stride) * d.W + ox * stride;
          const double* kp = ker + ((static_cast<size_t>(f) * d.C + c) * d.kh) * d.kw;
          for (int ky = 0; ky < d.kh; ++ky) {
            for (int kx = 0; kx < d.kw; ++kx) acc += ip[ky * d.W + kx] * kp[ky * d.kw + kx];
          }
        }
        out[(static_cast<size_t>(f) * d.Ho + oy) * d.Wo + ox] = acc;
      }
    }
  }
}

void conv_backward(const double* img, const double* ker, const double* gout, double* gimg,
                   double* gker, double* gbias, const ConvDims& d, int stride) {
  for (int f = 0; f < d.F; ++f) {
    for (int oy = 0; oy < d.Ho; ++oy) {
      for (int ox = 0; ox < d.Wo; ++ox) {
        double g = gout[(static_cast<size_t>(f) * d.Ho + oy) * d.Wo + ox];
        if (gbias) gbias[f] += g;
        for (int c = 0; c < d.C; ++c) {
          const double* ip = img + (static_cast<size_t>(c) * d.H + oy * stride) * d.W + ox * stride;
          double* gip = gimg + (static_cast<size_t>(c) * d.H + oy * stride) * d.W + ox * stride;
          const double* kp = ker + ((static_cast<size_t>(f) * d.C + c) * d.kh) * d.kw;
          double* gkp = gker + ((static_cast<size_t>(f) * d.C + c) * d.kh) * d.kw;
          for (int ky = 0; ky < d.kh; ++ky) {
            for (int kx = 0; kx < d.kw; ++kx) {
              gkp[ky * d.kw + kx] += g * ip[ky * d.W + kx];
              gip[ky * d.W + kx] += g * kp[ky * d.kw + kx];
            }
          }
        }
      }
    }
  }
}

}  // namespace

Tape::ValueId Tape::conv2d(ValueId kernels, ValueId bias, ValueId image, int stride) {
  const Tensor& K = val(kernels);
  const Tensor& I = val(image);
  if (I.rank() != 3) throw ConfigError("conv2d: image must be [C,H,W]");
  ConvDims d = conv_dims(K, I, stride, 0);
  const Tensor* B = bias >= 0 ? &val(bias) : nullptr;
  if (B && B->numel() != d.F) throw ConfigError("conv2d: bias length");
  Tensor out({d.F, d.Ho, d.Wo});
  conv_forward(I.data.data(), K.data.data(), B ? B->data.data() : nullptr, out.data.data(), d, stride);
  ValueId c = push(std::move(out));
  record([kernels, bias, image, c, d, stride](Tape& t) {
    const Tensor& g = t.grad(c);
    conv_backward(t.val(image).data.data(), t.val(kernels).data.data(), g.data.data(),
                  t.grad_mut(image).data.data(), t.grad_mut(kernels).data.data(),
                  bias >= 0 ? t.grad_mut(bias).data.data() : nullptr, d, stride);
  });
  return c;
}

Tape::ValueId Tape::conv2d_batch(ValueId kernels, ValueId bias, ValueId images, int stride) {
  const Tensor& K = val(kernels);
  const Tensor& I = val(images);
  if (I.rank() != 4) throw ConfigError("conv2d_batch: images must be [B,C,H,W]");
  ConvDims d = conv_dims(K, I, stride, 1);
  const Tensor* B = bias >= 0 ? &val(bias) : nullptr;
  if (B && B->numel() != d.F) throw ConfigError("conv2d_batch: bias length");
  int nb = I.shape[0];
  Tensor out({nb, d.F, d.Ho, d.Wo});
  size_t in_sz = static_cast<size_t>(d.C) * d.H * d.W;
  size_t out_sz = static_cast<size_t>(d.F) * d.Ho * d.Wo;
  for (int b = 0; b < nb; ++b) {
    conv_forward(I.data.data() + b * in_sz, K.data.data(), B ? B->data.data() : nullptr,
                 out.data.data() + b * out_sz, d, stride);
  }
  ValueId c = push(std::move(out));
  record([kernels, bias, images, c, d, stride, nb, in_sz, out_sz](Tape& t) {
    const Tensor& g = t.grad(c);
    for (int b = 0; b < nb; ++b) {
      conv_backward(t.val(images).data.data() + b * in_sz, t.val(kernels).data.data(),
                    g.data.data() + b * out_sz, t.grad_mut(images).data.data() + b * in_sz,
                    t.grad_mut(kernels).data.data(),
                    bias >= 0 ? t.grad_mut(bias).data.data() : nullptr, d, stride);
    }
  });
  return c;
}

void Tape::backward(ValueId loss_id) {
  if (ops_.empty()) throw UsageError("backward on an empty tape");
  if (val(loss_id).numel() != 1) throw UsageError("backward target must be scalar");
  for (Node& n : nodes_) {
    n.grad = Tensor(n.value.shape);
  }
  nodes_[loss_id].grad[0] = 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)(*this);
  for (const Bind& b : binds_) {
    Tensor& dst = b.store->grad(b.name);
    const Tensor& src = nodes_[b.id].grad;
    for (int64_t i = 0; i < dst.numel(); ++i) dst[i] += src[i];
  }
}

Tape::ValueId affine(Tape& t, Tape::ValueId W, Tape::ValueId b, Tape::ValueId x) {
  Tape::ValueId y = t.matmul(W, x);
  if (b >= 0) y = t.add_col(y, b);
  return y;
}

std::pair<Tape::ValueId, Tape::ValueId> lstm_cell(Tape& t, Tape::ValueId h, Tape::ValueId c,
                                                  Tape::ValueId x, const RecurrentCellIds& p,
                                                  bool multiplicative_integration) {
  const int r = t.val(h).rows();
  Tape::ValueId wx = t.matmul(p.wx, x);
  Tape::ValueId uh = t.matmul(p.uh, h);
  Tape::ValueId z;
  if (multiplicative_integration) {
    Tape::ValueId mi = t.mul_col(t.mul(wx, uh), p.alpha);
    z = t.add(mi, t.add(t.mul_col(wx, p.beta1), t.mul_col(uh, p.beta2)));
  } else {
    z = t.add(wx, uh);
  }
  z = t.add_col(z, p.bias);
  Tape::ValueId gi = t.sigmoid(t.slice_rows(z, 0, r));
  Tape::ValueId gf = t.sigmoid(t.slice_rows(z, r, 2 * r));
  Tape::ValueId go = t.sigmoid(t.slice_rows(z, 2 * r, 3 * r));
  Tape::ValueId gg = t.tanh(t.slice_rows(z, 3 * r, 4 * r));
  Tape::ValueId c_new = t.add(t.mul(gf, c), t.mul(gi, gg));
  Tape::ValueId h_new = t.mul(go, t.tanh(c_new));
  return {h_new, c_new};
}

}  // namespace gcg
