#include "maga/network.hpp"

#include <algorithm>

#include "maga/errors.hpp"
#include "maga/mask.hpp"
#include "maga/ops.hpp"
#include "path_error.hpp"

namespace maga {

ColorEncoder::ColorEncoder(ParamStore& params, Initializer& init, const std::string& path,
                           const std::array<std::size_t, 3>& channels) {
  std::size_t c_in = 3;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    Block& blk = blocks_[b];
    blk.path = path + ".block" + std::to_string(b + 1);
    const std::size_t c = channels[b];
    for (std::size_t l = 0; l < 3; ++l) {
      const std::size_t in = l == 0 ? c_in : c;
      const std::string p = blk.path + ".conv" + std::to_string(l + 1);
      blk.kernels[l] = params.add(p + ".kernel", init.he_uniform({3, 3, in, c}, 9 * in));
      blk.biases[l] = params.add(p + ".bias", init.zeros({c}));
    }
    c_in = c;
  }
}

Tensor ColorEncoder::forward(const Tensor& color) const {
  Tensor x = color;
  for (const Block& blk : blocks_) {
    x = detail::with_path(blk.path, [&] {
      Tensor a = relu(conv2d(x, blk.kernels[0], blk.biases[0], 2, Padding::same));
      Tensor b = relu(conv2d(a, blk.kernels[1], blk.biases[1], 1, Padding::same));
      return relu(add(conv2d(b, blk.kernels[2], blk.biases[2], 1, Padding::same), a));
    });
  }
  return x;
}

GatedDeconvLayer::GatedDeconvLayer(ParamStore& params, Initializer& init, std::string path, std::size_t c_in,
                                   std::size_t c_out, std::size_t kernel_size)
    : path_(std::move(path)) {
  const std::size_t taps = std::max<std::size_t>(1, (kernel_size / 2) * (kernel_size / 2));
  const std::size_t fan_in = taps * c_in;
  feature_kernel_ = params.add(path_ + ".feature.kernel",
                               init.he_uniform({kernel_size, kernel_size, c_out, c_in}, fan_in));
  feature_bias_ = params.add(path_ + ".feature.bias", init.zeros({c_out}));
  gate_kernel_ = params.add(path_ + ".gate.kernel", init.he_uniform({kernel_size, kernel_size, c_out, c_in}, fan_in));
  gate_bias_ = params.add(path_ + ".gate.bias", init.zeros({c_out}));
}

Tensor GatedDeconvLayer::forward(const Tensor& state, const Tensor& skip) const {
  return detail::with_path(path_, [&] {
    const std::array<Tensor, 2> parts = {state, skip};
    Tensor x = concat_channels(parts);
    Tensor feature = conv_transpose2d(x, feature_kernel_, 2, feature_bias_);
    Tensor gate = sigmoid(conv_transpose2d(x, gate_kernel_, 2, gate_bias_));
    return mul(feature, gate);
  });
}

CompletionModel::CompletionModel(ModelConfig config) : config_(config) {
  if (!(config_.depth_scale > 0.0)) throw ConfigError("depth_scale must be positive");
  for (std::size_t c : config_.channels) {
    if (c == 0 || c % 3 != 0) throw ConfigError("channel plan entries must be positive multiples of 3");
  }
  Initializer init(config_.seed, config_.epsilon_raw_init, config_.gate_target);
  const auto& ch = config_.channels;
  depth_encoder_ = std::make_unique<DepthEncoder>(params_, init, "depth_encoder", ch);
  color_encoder_ = std::make_unique<ColorEncoder>(params_, init, "color_encoder", ch);
  fusion_ = std::make_unique<BpFusion>(params_, init, "fusion", ch[2], config_.fusion_blocks, config_.cmf_heads,
                                       config_.mlp_hidden, config_.color_feed);
  const std::size_t k = config_.decoder_kernel;
  decoder_[0] = std::make_unique<GatedDeconvLayer>(params_, init, "decoder.up1", 2 * ch[2], ch[1], k);
  decoder_[1] = std::make_unique<GatedDeconvLayer>(params_, init, "decoder.up2", 2 * ch[1], ch[0], k);
  decoder_[2] = std::make_unique<GatedDeconvLayer>(params_, init, "decoder.up3", 2 * ch[0], ch[0], k);
  head_kernel_ = params_.add("decoder.head.kernel", init.he_uniform({1, 1, ch[0], 1}, ch[0]));
  head_bias_ = params_.add("decoder.head.bias", init.constant({1}, config_.initial_depth / config_.depth_scale));
}

Tensor CompletionModel::forward(const Tensor& depth, const Tensor& color) const {
  return forward(depth, color, config_.gating);
}

Tensor CompletionModel::forward(const Tensor& depth, const Tensor& color, Gating gating) const {
  if (depth.rank() != 3 || depth.dim(2) != 1) {
    throw DimensionError("depth must be h x w x 1, got " + shape_string(depth.shape()));
  }
  if (color.rank() != 3 || color.dim(2) != 3 || color.dim(0) != depth.dim(0) || color.dim(1) != depth.dim(1)) {
    throw DimensionError("colour " + shape_string(color.shape()) + " does not match depth " +
                         shape_string(depth.shape()));
  }
  if (depth.dim(0) % 8 != 0 || depth.dim(1) % 8 != 0) {
    throw ConfigError("input extents " + shape_string(depth.shape()) + " must be divisible by 8");
  }
  const MaskPyramid pyramid = MaskPyramid::build(mask_from_depth(depth));
  const double ds = config_.depth_scale;
  const EncoderOutput enc = depth_encoder_->forward(ds == 1.0 ? depth : scale(depth, 1.0 / ds), pyramid, gating);
  const Tensor color_bottom = color_encoder_->forward(color);
  const Tensor fused = fusion_->forward(enc.bottom, color_bottom);
  Tensor x = decoder_[0]->forward(fused, enc.skips[2]);
  x = decoder_[1]->forward(x, enc.skips[1]);
  x = decoder_[2]->forward(x, enc.skips[0]);
  return detail::with_path("decoder.head", [&] {
    Tensor out = relu(conv2d(x, head_kernel_, head_bias_, 1, Padding::same));
    return ds == 1.0 ? out : scale(out, ds);
  });
}

}  // namespace maga
