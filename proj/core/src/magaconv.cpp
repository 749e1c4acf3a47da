#include "maga/magaconv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "maga/errors.hpp"
#include "maga/ops.hpp"
#include "path_error.hpp"

namespace maga {

Tensor rnc(const Tensor& x) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    if (!(v >= 0.0)) throw ContractError("rnc: input must be non-negative");
    out[i] = v >= std::numbers::ln2 ? 0.0 : std::max(2.0 * (std::exp(-v) - 0.5), 0.0);
  }
  auto xn = x.node();
  return detail::make_result(x.shape(), std::move(out), detail::should_record({&x}), "rnc",
                             [xn](detail::Node& o) {
    auto& g = detail::grad_buffer(*xn);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (o.value[i] > 0.0) g[i] -= o.grad[i] * 2.0 * std::exp(-xn->value[i]);
    }
  });
}

MagaConvHead MagaConvHead::create(ParamStore& params, Initializer& init, const std::string& prefix,
                                  std::size_t kernel_size, std::size_t c_in, std::size_t c_head) {
  MagaConvHead h;
  h.kernel_size = kernel_size;
  h.kernel = params.add(prefix + ".kernel",
                        init.he_uniform({kernel_size, kernel_size, c_in, c_head}, kernel_size * kernel_size * c_in));
  h.bias = params.add(prefix + ".bias", init.zeros({c_head}));
  double epsilon_raw = init.epsilon_raw();
  if (init.gate_target() > 0.0) {
    double total = 0.0;
    for (double w : h.kernel.values()) total += std::abs(w);
    const double footprint = total / static_cast<double>(c_head);
    const double eps = std::clamp(init.gate_target() / footprint, 1e-12, 1.0 - 1e-12);
    epsilon_raw = std::log(eps / (1.0 - eps));
  }
  h.epsilon_raw = params.add(prefix + ".epsilon_raw", Tensor::scalar(epsilon_raw));
  return h;
}

double MagaConvHead::epsilon() const { return 1.0 / (1.0 + std::exp(-epsilon_raw.item())); }

Tensor maga_conv(const MagaConvHead& head, const Tensor& features, const Mask& mask, std::size_t stride,
                 Gating gating) {
  Tensor conv = conv2d(features, head.kernel, head.bias, stride, Padding::same);
  if (gating == Gating::disabled) return conv;
  if (mask.height() != features.dim(0) || mask.width() != features.dim(1)) {
    throw DimensionError("maga_conv: mask " + shape_string(mask.grid().shape()) + " does not cover features " +
                         shape_string(features.shape()));
  }
  // The replicated mask is constant across input channels, so its convolution
  // with |w| equals a single-channel convolution with |w| summed over inputs.
  Tensor abs_weight = sum_axis(abs(head.kernel), 2);
  Tensor coverage = conv2d(mask.grid(), abs_weight, {}, stride, Padding::same);
  Tensor unsuitability = mul(sigmoid(head.epsilon_raw), coverage);
  return mul(rnc(unsuitability), conv);
}

MagaConvLayer::MagaConvLayer(ParamStore& params, Initializer& init, std::string path, std::size_t c_in,
                             std::size_t c_out, std::size_t stride)
    : path_(std::move(path)), c_out_(c_out), stride_(stride) {
  if (c_out == 0 || c_out % kHeadKernels.size() != 0) {
    throw ConfigError(path_ + ": output channels " + std::to_string(c_out) + " not divisible by 3 heads");
  }
  if (stride != 1 && stride != 2) throw ConfigError(path_ + ": stride must be 1 or 2");
  const std::size_t c_head = c_out / kHeadKernels.size();
  for (std::size_t i = 0; i < kHeadKernels.size(); ++i) {
    const std::size_t k = kHeadKernels[i];
    heads_[i] = MagaConvHead::create(params, init, path_ + ".head_k" + std::to_string(k), k, c_in, c_head);
  }
  fuse_kernel_ = params.add(path_ + ".fuse.kernel", init.he_uniform({1, 1, c_out, c_out}, c_out));
  fuse_bias_ = params.add(path_ + ".fuse.bias", init.zeros({c_out}));
}

Tensor MagaConvLayer::forward(const Tensor& features, const Mask& mask, Gating gating) const {
  return detail::with_path(path_, [&] {
    std::array<Tensor, 3> outs;
    for (std::size_t i = 0; i < heads_.size(); ++i) outs[i] = maga_conv(heads_[i], features, mask, stride_, gating);
    return relu(conv2d(concat_channels(outs), fuse_kernel_, fuse_bias_, 1, Padding::same));
  });
}

MagaConvBlock::MagaConvBlock(ParamStore& params, Initializer& init, const std::string& path, int block_index,
                             std::size_t c_in, std::size_t c_out)
    : block_index_(block_index),
      layers_{MagaConvLayer(params, init, path + ".layer1", c_in, c_out, 2),
              MagaConvLayer(params, init, path + ".layer2", c_out, c_out, 1),
              MagaConvLayer(params, init, path + ".layer3", c_out, c_out, 1)} {}

Tensor MagaConvBlock::forward(const Tensor& features, const MaskPyramid& pyramid, Gating gating) const {
  Tensor x = features;
  for (int l = 0; l < 3; ++l) x = layers_[l].forward(x, pyramid.at(block_index_, l + 1), gating);
  return x;
}

DepthEncoder::DepthEncoder(ParamStore& params, Initializer& init, const std::string& path,
                           const std::array<std::size_t, 3>& channels)
    : blocks_{MagaConvBlock(params, init, path + ".block1", 1, 1, channels[0]),
              MagaConvBlock(params, init, path + ".block2", 2, channels[0], channels[1]),
              MagaConvBlock(params, init, path + ".block3", 3, channels[1], channels[2])} {}

EncoderOutput DepthEncoder::forward(const Tensor& depth, const MaskPyramid& pyramid, Gating gating) const {
  EncoderOutput out;
  Tensor x = depth;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    x = blocks_[b].forward(x, pyramid, gating);
    out.skips[b] = x;
  }
  out.bottom = x;
  return out;
}

}  // namespace maga
