#include "maga/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "maga/errors.hpp"

namespace maga {

namespace {

using detail::grad_buffer;
using detail::make_result;
using detail::Node;
using detail::should_record;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

// Geometry of a strided, zero-padded window sweep over an h x w x c image.
struct ConvGeometry {
  std::size_t h, w, c;  // input extents
  std::size_t k, stride, pad;
  std::size_t ho, wo;

  std::size_t patch() const { return k * k * c; }
  std::size_t positions() const { return ho * wo; }
};

ConvGeometry make_geometry(std::size_t h, std::size_t w, std::size_t c, std::size_t k,
                           std::size_t stride, std::size_t pad) {
  if (h + 2 * pad < k || w + 2 * pad < k) {
    throw DimensionError("kernel " + std::to_string(k) + " larger than padded input " +
                         std::to_string(h) + "x" + std::to_string(w));
  }
  return ConvGeometry{h, w, c, k, stride, pad, (h + 2 * pad - k) / stride + 1,
                      (w + 2 * pad - k) / stride + 1};
}

// cols[p, (ky*k + kx)*c + ci] = in[oy*s + ky - pad, ox*s + kx - pad, ci], zero outside.
void im2col(const ConvGeometry& g, const double* in, double* cols) {
  const std::size_t row = g.patch();
  for (std::size_t oy = 0; oy < g.ho; ++oy) {
    for (std::size_t ox = 0; ox < g.wo; ++ox) {
      double* dst = cols + (oy * g.wo + ox) * row;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
        for (std::size_t kx = 0; kx < g.k; ++kx, dst += g.c) {
          const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
          if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.h) || ix >= static_cast<long>(g.w)) {
            std::fill(dst, dst + g.c, 0.0);
          } else {
            const double* src = in + (static_cast<std::size_t>(iy) * g.w + ix) * g.c;
            std::copy(src, src + g.c, dst);
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& g, const double* cols, double* out) {
  const std::size_t row = g.patch();
  for (std::size_t oy = 0; oy < g.ho; ++oy) {
    for (std::size_t ox = 0; ox < g.wo; ++ox) {
      const double* src = cols + (oy * g.wo + ox) * row;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
        for (std::size_t kx = 0; kx < g.k; ++kx, src += g.c) {
          const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
          if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.h) || ix >= static_cast<long>(g.w)) {
            continue;
          }
          double* dst = out + (static_cast<std::size_t>(iy) * g.w + ix) * g.c;
#pragma omp simd
          for (std::size_t ci = 0; ci < g.c; ++ci) dst[ci] += src[ci];
        }
      }
    }
  }
}

bool is_identity_patch(const ConvGeometry& g) { return g.k == 1 && g.stride == 1 && g.pad == 0; }

void add_column_sums(const double* rows, std::size_t n_rows, std::size_t n_cols, double* acc) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double* src = rows + r * n_cols;
#pragma omp simd
    for (std::size_t c = 0; c < n_cols; ++c) acc[c] += src[c];
  }
}

void check_bias(const Tensor& bias, std::size_t channels, const char* op) {
  if (!bias.defined()) return;
  if (bias.rank() != 1 || bias.dim(0) != channels) {
    throw DimensionError(std::string(op) + ": bias shape " + shape_string(bias.shape()) +
                         " does not match " + std::to_string(channels) + " channels");
  }
}

// Shared shape logic for broadcasting binary ops.
struct Broadcast {
  Shape shape;
  bool a_scalar = false;
  bool b_scalar = false;
};

Broadcast broadcast(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return {a.shape(), false, false};
  if (a.size() == 1 && b.size() == 1) {
    if (a.rank() >= b.rank()) return {a.shape(), false, true};
    return {b.shape(), true, false};
  }
  if (b.size() == 1) return {a.shape(), false, true};
  if (a.size() == 1) return {b.shape(), true, false};
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                       " and " + shape_string(b.shape()));
}

void accumulate_broadcast(Node& target, bool scalar, std::span<const double> g) {
  auto& buf = grad_buffer(target);
  if (scalar) {
    double s = 0.0;
    for (double v : g) s += v;
    buf[0] += s;
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
  }
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& x, const char* name, Fwd f, Deriv df) {
  const auto xs = x.values();
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i]);
  const bool rec = should_record({&x});
  auto xn = x.node();
  return make_result(x.shape(), std::move(out), rec, name, [xn, df](Node& o) {
    auto& gx = grad_buffer(*xn);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += o.grad[i] * df(xn->value[i], o.value[i]);
  });
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, std::size_t stride,
              Padding padding) {
  if (input.rank() != 3) throw DimensionError("conv2d: input must be h x w x c, got " + shape_string(input.shape()));
  if (kernel.rank() != 4 || kernel.dim(0) != kernel.dim(1)) {
    throw DimensionError("conv2d: kernel must be k x k x c_in x c_out, got " + shape_string(kernel.shape()));
  }
  if (stride == 0) throw ContractError("conv2d: stride must be positive");
  const std::size_t k = kernel.dim(0);
  const std::size_t ci = input.dim(2);
  const std::size_t co = kernel.dim(3);
  if (kernel.dim(2) != ci) {
    throw DimensionError("conv2d: kernel expects " + std::to_string(kernel.dim(2)) +
                         " input channels, input has " + std::to_string(ci));
  }
  check_bias(bias, co, "conv2d");
  std::size_t pad = 0;
  if (padding == Padding::same) {
    if (k % 2 == 0) throw ContractError("conv2d: same padding needs an odd kernel size");
    pad = (k - 1) / 2;
  } else if (input.dim(0) < k || input.dim(1) < k) {
    throw DimensionError("conv2d: valid padding needs input at least " + std::to_string(k));
  }
  const ConvGeometry g = make_geometry(input.dim(0), input.dim(1), ci, k, stride, pad);

  std::vector<double> cols;
  const double* cols_ptr = input.values().data();
  if (!is_identity_patch(g)) {
    cols.resize(g.positions() * g.patch());
    im2col(g, input.values().data(), cols.data());
    cols_ptr = cols.data();
  }
  std::vector<double> out(g.positions() * co);
  {
    ConstMap c_mat(cols_ptr, g.positions(), g.patch());
    ConstMap w_mat(kernel.values().data(), g.patch(), co);
    MutMap o_mat(out.data(), g.positions(), co);
    o_mat.noalias() = c_mat * w_mat;
  }
  if (bias.defined()) {
    const double* b = bias.values().data();
    for (std::size_t p = 0; p < g.positions(); ++p) {
      double* row = out.data() + p * co;
#pragma omp simd
      for (std::size_t c = 0; c < co; ++c) row[c] += b[c];
    }
  }

  const bool rec = should_record({&input, &kernel, &bias});
  auto in_n = input.node();
  auto k_n = kernel.node();
  auto b_n = bias.defined() ? bias.node() : nullptr;
  return make_result({g.ho, g.wo, co}, std::move(out), rec, "conv2d", [g, co, in_n, k_n, b_n](Node& o) {
    ConstMap g_mat(o.grad.data(), g.positions(), co);
    if (k_n->requires_grad) {
      std::vector<double> cols;
      const double* cols_ptr = in_n->value.data();
      if (!is_identity_patch(g)) {
        cols.resize(g.positions() * g.patch());
        im2col(g, in_n->value.data(), cols.data());
        cols_ptr = cols.data();
      }
      ConstMap c_mat(cols_ptr, g.positions(), g.patch());
      MutMap gw(grad_buffer(*k_n).data(), g.patch(), co);
      gw.noalias() += c_mat.transpose() * g_mat;
    }
    if (b_n && b_n->requires_grad) add_column_sums(o.grad.data(), g.positions(), co, grad_buffer(*b_n).data());
    if (in_n->requires_grad) {
      ConstMap w_mat(k_n->value.data(), g.patch(), co);
      auto& gin = grad_buffer(*in_n);
      if (is_identity_patch(g)) {
        MutMap gi(gin.data(), g.positions(), g.patch());
        gi.noalias() += g_mat * w_mat.transpose();
      } else {
        RowMat gcols = g_mat * w_mat.transpose();
        col2im_add(g, gcols.data(), gin.data());
      }
    }
  });
}

Tensor conv_transpose2d(const Tensor& input, const Tensor& kernel, std::size_t stride,
                        const Tensor& bias) {
  if (input.rank() != 3) {
    throw DimensionError("conv_transpose2d: input must be h x w x c, got " + shape_string(input.shape()));
  }
  if (kernel.rank() != 4 || kernel.dim(0) != kernel.dim(1)) {
    throw DimensionError("conv_transpose2d: kernel must be k x k x c_out x c_in, got " +
                         shape_string(kernel.shape()));
  }
  if (stride != 1 && stride != 2) throw ContractError("conv_transpose2d: stride must be 1 or 2");
  const std::size_t k = kernel.dim(0);
  const std::size_t c = input.dim(2);
  const std::size_t a = kernel.dim(2);
  if (kernel.dim(3) != c) {
    throw DimensionError("conv_transpose2d: kernel expects " + std::to_string(kernel.dim(3)) +
                         " input channels, input has " + std::to_string(c));
  }
  check_bias(bias, a, "conv_transpose2d");
  const std::size_t h = input.dim(0) * stride;
  const std::size_t w = input.dim(1) * stride;
  // Geometry of the forward convolution this op is the adjoint of.
  const ConvGeometry g = make_geometry(h, w, a, k, stride, (k - 1) / 2);
  if (g.ho != input.dim(0) || g.wo != input.dim(1)) {
    throw DimensionError("conv_transpose2d: kernel " + std::to_string(k) + " with stride " +
                         std::to_string(stride) + " is not invertible in extent");
  }

  std::vector<double> out(h * w * a, 0.0);
  {
    ConstMap x_mat(input.values().data(), g.positions(), c);
    ConstMap w_mat(kernel.values().data(), g.patch(), c);
    if (is_identity_patch(g)) {
      MutMap o_mat(out.data(), g.positions(), a);
      o_mat.noalias() = x_mat * w_mat.transpose();
    } else {
      RowMat cols = x_mat * w_mat.transpose();
      col2im_add(g, cols.data(), out.data());
    }
  }
  if (bias.defined()) {
    const double* b = bias.values().data();
    for (std::size_t p = 0; p < h * w; ++p) {
      double* row = out.data() + p * a;
      for (std::size_t j = 0; j < a; ++j) row[j] += b[j];
    }
  }

  const bool rec = should_record({&input, &kernel, &bias});
  auto in_n = input.node();
  auto k_n = kernel.node();
  auto b_n = bias.defined() ? bias.node() : nullptr;
  return make_result({h, w, a}, std::move(out), rec, "conv_transpose2d",
                     [g, c, a, in_n, k_n, b_n](Node& o) {
    std::vector<double> gcols_store;
    const double* gcols = o.grad.data();
    if (!is_identity_patch(g)) {
      gcols_store.resize(g.positions() * g.patch());
      im2col(g, o.grad.data(), gcols_store.data());
      gcols = gcols_store.data();
    }
    ConstMap gc_mat(gcols, g.positions(), g.patch());
    if (k_n->requires_grad) {
      ConstMap x_mat(in_n->value.data(), g.positions(), c);
      MutMap gw(grad_buffer(*k_n).data(), g.patch(), c);
      gw.noalias() += gc_mat.transpose() * x_mat;
    }
    if (b_n && b_n->requires_grad) add_column_sums(o.grad.data(), g.h * g.w, a, grad_buffer(*b_n).data());
    if (in_n->requires_grad) {
      ConstMap w_mat(k_n->value.data(), g.patch(), c);
      MutMap gx(grad_buffer(*in_n).data(), g.positions(), c);
      gx.noalias() += gc_mat * w_mat;
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const Broadcast bc = broadcast(a, b, "add");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(shape_size(bc.shape));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = av[bc.a_scalar ? 0 : i] + bv[bc.b_scalar ? 0 : i];
  }
  auto an = a.node();
  auto bn = b.node();
  return make_result(bc.shape, std::move(out), should_record({&a, &b}), "add", [an, bn, bc](Node& o) {
    if (an->requires_grad) accumulate_broadcast(*an, bc.a_scalar, o.grad);
    if (bn->requires_grad) accumulate_broadcast(*bn, bc.b_scalar, o.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const Broadcast bc = broadcast(a, b, "sub");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(shape_size(bc.shape));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = av[bc.a_scalar ? 0 : i] - bv[bc.b_scalar ? 0 : i];
  }
  auto an = a.node();
  auto bn = b.node();
  return make_result(bc.shape, std::move(out), should_record({&a, &b}), "sub", [an, bn, bc](Node& o) {
    if (an->requires_grad) accumulate_broadcast(*an, bc.a_scalar, o.grad);
    if (bn->requires_grad) {
      std::vector<double> negated(o.grad.size());
      for (std::size_t i = 0; i < negated.size(); ++i) negated[i] = -o.grad[i];
      accumulate_broadcast(*bn, bc.b_scalar, negated);
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const Broadcast bc = broadcast(a, b, "mul");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(shape_size(bc.shape));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = av[bc.a_scalar ? 0 : i] * bv[bc.b_scalar ? 0 : i];
  }
  auto an = a.node();
  auto bn = b.node();
  return make_result(bc.shape, std::move(out), should_record({&a, &b}), "mul", [an, bn, bc](Node& o) {
    const std::size_t n = o.grad.size();
    if (an->requires_grad) {
      std::vector<double> g(n);
      for (std::size_t i = 0; i < n; ++i) g[i] = o.grad[i] * bn->value[bc.b_scalar ? 0 : i];
      accumulate_broadcast(*an, bc.a_scalar, g);
    }
    if (bn->requires_grad) {
      std::vector<double> g(n);
      for (std::size_t i = 0; i < n; ++i) g[i] = o.grad[i] * an->value[bc.a_scalar ? 0 : i];
      accumulate_broadcast(*bn, bc.b_scalar, g);
    }
  });
}

Tensor neg(const Tensor& x) {
  return unary(x, "neg", [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(x, "scale", [factor](double v) { return factor * v; },
               [factor](double, double) { return factor; });
}

Tensor shift(const Tensor& x, double offset) {
  return unary(x, "shift", [offset](double v) { return v + offset; },
               [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& x) {
  return unary(x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, "sigmoid",
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor& x) {
  return unary(x, "exp", [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor abs(const Tensor& x) {
  return unary(x, "abs", [](double v) { return std::fabs(v); },
               [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  auto xn = x.node();
  return make_result(Shape{}, {s}, should_record({&x}), "sum", [xn](Node& o) {
    auto& g = grad_buffer(*xn);
    const double go = o.grad[0];
    for (double& v : g) v += go;
  });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x.values()) s += v;
  auto xn = x.node();
  return make_result(Shape{}, {s / n}, should_record({&x}), "mean", [xn, n](Node& o) {
    auto& g = grad_buffer(*xn);
    const double go = o.grad[0] / n;
    for (double& v : g) v += go;
  });
}

Tensor sum_axis(const Tensor& x, std::size_t axis) {
  const Shape& s = x.shape();
  if (axis >= s.size()) throw DimensionError("sum_axis: axis out of range for " + shape_string(s));
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t n = s[axis];
  Shape os = s;
  os[axis] = 1;
  std::vector<double> out(outer * inner, 0.0);
  const auto xv = x.values();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < n; ++j) {
      const double* src = xv.data() + (o * n + j) * inner;
      double* dst = out.data() + o * inner;
      for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
  }
  auto xn = x.node();
  return make_result(os, std::move(out), should_record({&x}), "sum_axis", [xn, outer, inner, n](Node& o) {
    auto& g = grad_buffer(*xn);
    for (std::size_t b = 0; b < outer; ++b) {
      for (std::size_t j = 0; j < n; ++j) {
        double* dst = g.data() + (b * n + j) * inner;
        const double* src = o.grad.data() + b * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
      }
    }
  });
}

Tensor min_pool2d(const Tensor& input, std::size_t window, std::size_t stride) {
  if (input.rank() != 3) throw DimensionError("min_pool2d: input must be h x w x c");
  if (window == 0 || stride == 0) throw ContractError("min_pool2d: window and stride must be positive");
  const std::size_t h = input.dim(0), w = input.dim(1), c = input.dim(2);
  const std::size_t ho = (h + stride - 1) / stride;
  const std::size_t wo = (w + stride - 1) / stride;
  const long pad_y = static_cast<long>(std::max<long>((ho - 1) * stride + window - h, 0) / 2);
  const long pad_x = static_cast<long>(std::max<long>((wo - 1) * stride + window - w, 0) / 2);
  const auto in = input.values();
  std::vector<double> out(ho * wo * c);
  for (std::size_t oy = 0; oy < ho; ++oy) {
    for (std::size_t ox = 0; ox < wo; ++ox) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t wy = 0; wy < window; ++wy) {
          const long iy = static_cast<long>(oy * stride + wy) - pad_y;
          for (std::size_t wx = 0; wx < window; ++wx) {
            const long ix = static_cast<long>(ox * stride + wx) - pad_x;
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(h) && ix < static_cast<long>(w);
            const double v = inside ? in[(static_cast<std::size_t>(iy) * w + ix) * c + ch] : 1.0;
            m = std::min(m, v);
          }
        }
        out[(oy * wo + ox) * c + ch] = m;
      }
    }
  }
  return make_result({ho, wo, c}, std::move(out), false, "min_pool2d", {});
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) throw DimensionError("matmul: operands must be matrices");
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: inner dimensions differ: " + shape_string(a.shape()) + " . " +
                         shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() = ConstMap(a.values().data(), m, k) * ConstMap(b.values().data(), k, n);
  auto an = a.node();
  auto bn = b.node();
  return make_result({m, n}, std::move(out), should_record({&a, &b}), "matmul", [an, bn, m, k, n](Node& o) {
    ConstMap g(o.grad.data(), m, n);
    if (an->requires_grad) {
      MutMap(grad_buffer(*an).data(), m, k).noalias() += g * ConstMap(bn->value.data(), k, n).transpose();
    }
    if (bn->requires_grad) {
      MutMap(grad_buffer(*bn).data(), k, n).noalias() += ConstMap(an->value.data(), m, k).transpose() * g;
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(x.shape()) + " as " + shape_string(shape));
  }
  for (std::size_t e : shape) {
    if (e == 0) throw DimensionError("reshape: zero extent");
  }
  const auto xv = x.values();
  auto xn = x.node();
  return make_result(std::move(shape), std::vector<double>(xv.begin(), xv.end()), should_record({&x}),
                     "reshape", [xn](Node& o) {
    auto& g = grad_buffer(*xn);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
  });
}

Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t end) {
  if (x.rank() == 0) throw DimensionError("slice_channels: scalar input");
  const std::size_t c = x.shape().back();
  if (begin >= end || end > c) {
    throw DimensionError("slice_channels: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") outside " + std::to_string(c) + " channels");
  }
  const std::size_t rows = x.size() / c;
  const std::size_t width = end - begin;
  Shape os = x.shape();
  os.back() = width;
  std::vector<double> out(rows * width);
  const auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.data() + r * c + begin, width, out.data() + r * width);
  }
  auto xn = x.node();
  return make_result(os, std::move(out), should_record({&x}), "slice_channels",
                     [xn, rows, c, begin, width](Node& o) {
    auto& g = grad_buffer(*xn);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < width; ++j) g[r * c + begin + j] += o.grad[r * width + j];
    }
  });
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_channels: nothing to concatenate");
  const Shape& first = parts[0].shape();
  if (first.empty()) throw DimensionError("concat_channels: scalar input");
  const Shape lead(first.begin(), first.end() - 1);
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  bool rec = false;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size() || !std::equal(lead.begin(), lead.end(), s.begin())) {
      throw DimensionError("concat_channels: " + shape_string(s) + " does not match " + shape_string(first));
    }
    widths.push_back(s.back());
    total += s.back();
    rec = rec || should_record({&p});
  }
  const std::size_t rows = shape_size(lead);
  std::vector<double> out(rows * total);
  std::vector<detail::NodePtr> nodes;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto v = parts[i].values();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.data() + r * widths[i], widths[i], out.data() + r * total + offset);
    }
    offset += widths[i];
    nodes.push_back(parts[i].node());
  }
  Shape os = first;
  os.back() = total;
  return make_result(os, std::move(out), rec, "concat_channels", [nodes, widths, rows, total](Node& o) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i]->requires_grad) {
        auto& g = grad_buffer(*nodes[i]);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < widths[i]; ++j) g[r * widths[i] + j] += o.grad[r * total + off + j];
        }
      }
      off += widths[i];
    }
  });
}

Tensor replicate_channels(const Tensor& x, std::size_t channels) {
  if (x.rank() == 0 || x.shape().back() != 1) {
    throw DimensionError("replicate_channels: last extent must be 1, got " + shape_string(x.shape()));
  }
  if (channels == 0) throw DimensionError("replicate_channels: zero channels");
  const std::size_t rows = x.size();
  Shape os = x.shape();
  os.back() = channels;
  std::vector<double> out(rows * channels);
  const auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) std::fill_n(out.data() + r * channels, channels, xv[r]);
  auto xn = x.node();
  return make_result(os, std::move(out), should_record({&x}), "replicate_channels",
                     [xn, rows, channels](Node& o) {
    auto& g = grad_buffer(*xn);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < channels; ++j) g[r] += o.grad[r * channels + j];
    }
  });
}

Tensor bias_add(const Tensor& x, const Tensor& bias) {
  if (x.rank() == 0) throw DimensionError("bias_add: scalar input");
  const std::size_t c = x.shape().back();
  check_bias(bias, c, "bias_add");
  const std::size_t rows = x.size() / c;
  const auto xv = x.values();
  const auto bv = bias.values();
  std::vector<double> out(xv.begin(), xv.end());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] += bv[j];
  }
  auto xn = x.node();
  auto bn = bias.node();
  return make_result(x.shape(), std::move(out), should_record({&x, &bias}), "bias_add",
                     [xn, bn, rows, c](Node& o) {
    if (xn->requires_grad) {
      auto& g = grad_buffer(*xn);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
    if (bn->requires_grad) add_column_sums(o.grad.data(), rows, c, grad_buffer(*bn).data());
  });
}

}  // namespace maga
