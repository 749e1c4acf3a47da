#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "maga/tensor.hpp"

namespace maga {

enum class Padding { same, valid };

/// 2-D cross-correlation over an h x w x c_in image with a k x k x c_in x c_out
/// kernel. `same` padding pads (k-1)/2 zeros per side (k must be odd) and
/// yields ceil(h/stride) x ceil(w/stride) outputs; `valid` pads nothing.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias = {},
              std::size_t stride = 1, Padding padding = Padding::same);

/// Adjoint of `conv2d` with padding (k-1)/2: maps h x w x c to
/// (h*stride) x (w*stride) x a using a k x k x a x c kernel, i.e. the same
/// kernel tensor a forward convolution from a to c channels would use.
Tensor conv_transpose2d(const Tensor& input, const Tensor& kernel, std::size_t stride,
                        const Tensor& bias = {});

// Pointwise ops. Binary ops accept equal shapes, or one operand holding a
// single element which is broadcast.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor shift(const Tensor& x, double offset);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor abs(const Tensor& x);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Sums over `axis`, keeping it with extent 1.
Tensor sum_axis(const Tensor& x, std::size_t axis);

/// Windowed minimum per channel of an h x w x c tensor. Output extent is
/// ceil(h/stride); out-of-image taps read as 1. Not differentiable: the
/// result never requires grad.
Tensor min_pool2d(const Tensor& input, std::size_t window, std::size_t stride);

Tensor matmul(const Tensor& a, const Tensor& b);

Tensor reshape(const Tensor& x, Shape shape);
/// Channels [begin, end) of the last axis.
Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t end);
/// Concatenation along the last axis; leading extents must agree.
Tensor concat_channels(std::span<const Tensor> parts);
/// Tiles a tensor whose last extent is 1 to `channels` copies.
Tensor replicate_channels(const Tensor& x, std::size_t channels);
/// Adds a length-c vector along the last axis.
Tensor bias_add(const Tensor& x, const Tensor& bias);

}  // namespace maga
