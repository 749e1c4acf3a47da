#pragma once

// Reference implementations written as direct nested loops over plain
// arrays. They share no code with the library's kernels and exist to be
// compared against them.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "maga/fusion.hpp"
#include "maga/magaconv.hpp"
#include "maga/metrics.hpp"
#include "maga/tensor.hpp"

namespace maga::oracle {

/// Dense h x w x c array with plain indexing.
struct Grid {
  std::size_t h = 0, w = 0, c = 0;
  std::vector<double> v;

  Grid() = default;
  Grid(std::size_t h_, std::size_t w_, std::size_t c_, double fill = 0.0) : h(h_), w(w_), c(c_), v(h_ * w_ * c_, fill) {}
  static Grid from(const Tensor& t);
  Tensor to_tensor() const;

  double& at(std::size_t y, std::size_t x, std::size_t ch) { return v[(y * w + x) * c + ch]; }
  double at(std::size_t y, std::size_t x, std::size_t ch) const { return v[(y * w + x) * c + ch]; }
};

/// kernel[ky][kx][ci][co] read from a k x k x ci x co tensor.
double kernel_at(const Tensor& kernel, std::size_t ky, std::size_t kx, std::size_t ci, std::size_t co);

/// Zero-padded convolution. `same`: pad (k-1)/2, output ceil(n / stride).
/// Otherwise valid: output (n - k) / stride + 1. Bias may be undefined.
Grid conv2d(const Grid& in, const Tensor& kernel, const Tensor& bias, std::size_t stride, bool same);

/// Scatter form of the transposed convolution with a k x k x A x C kernel:
/// every input pixel adds kernel-weighted copies into a stride-times larger
/// output, offset by (k-1)/2.
Grid conv_transpose2d(const Grid& in, const Tensor& kernel, const Tensor& bias, std::size_t stride);

/// Min over each window, TF-style "same" placement, outside taps count as 1.
Grid min_pool(const Grid& in, std::size_t window, std::size_t stride);

double rnc(double x);
double sigmoid(double x);

/// One MagaConv head evaluated pixel by pixel: feature convolution, masked
/// |kernel| sum over the replicated mask, RnC gate, product.
Grid maga_conv(const Grid& features, const Grid& mask, const Tensor& kernel, const Tensor& bias,
               double epsilon_raw, std::size_t stride);

/// Three heads, concatenation, 1x1 fuse, ReLU.
Grid maga_layer(const MagaConvLayer& layer, const Grid& features, const Grid& mask);

/// Cross-modal fusion step by step: expand, slice, per-slice MLP over
/// every pixel, residual correction with gate, restore, fuse.
Grid cmf(const CmfModule& m, const Grid& target, const Grid& query);

struct Metrics {
  double rmse = 0.0, rel = 0.0, mae = 0.0;
  std::array<double, 4> delta{};
  std::size_t count = 0;
};

/// Pixels with gt > 0 and mask == 0 (mask may be empty: all valid).
Metrics metrics(const Grid& pred, const Grid& gt, const Grid& mask);

/// 5-point Laplacian; `full` zero-pads to the same extent, otherwise interior.
Grid laplacian(const Grid& x, bool full);
double mse(const Grid& a, const Grid& b);
double sc(const Grid& pred, const Grid& gt, bool full);

/// Central difference of `f` with respect to element `index` of `param`,
/// restoring the value afterwards.
double central_difference(const std::function<double()>& f, Tensor& param, std::size_t index, double step);

/// |a - b| / max(floor, |a|, |b|).
double relative_error(double a, double b, double floor = 1.0);

}  // namespace maga::oracle
