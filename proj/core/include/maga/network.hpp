#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "maga/fusion.hpp"
#include "maga/magaconv.hpp"
#include "maga/params.hpp"
#include "maga/tensor.hpp"

namespace maga {

struct ModelConfig {
  std::array<std::size_t, 3> channels = {24, 48, 96};
  std::size_t fusion_blocks = 3;
  std::size_t cmf_heads = 3;
  std::size_t mlp_hidden = 16;
  std::size_t decoder_kernel = 4;
  ColorFeed color_feed = ColorFeed::updated;
  Gating gating = Gating::enabled;
  std::uint64_t seed = 1;
  // MagaConv epsilon start: calibrated per head when gate_target > 0,
  // otherwise the fixed epsilon_raw_init.
  double epsilon_raw_init = 0.0;
  double gate_target = 0.35;
  // Depth enters the encoder divided by depth_scale and leaves the head
  // multiplied by it; the head bias starts at initial_depth (metres).
  double depth_scale = 3.0;
  double initial_depth = 5.0;
};

/// Three residual blocks of plain 3x3 convolutions mirroring the depth
/// encoder's extents and widths. In each block: a = relu(conv_s2(x)),
/// b = relu(conv(a)), out = relu(conv(b) + a).
class ColorEncoder {
 public:
  ColorEncoder(ParamStore& params, Initializer& init, const std::string& path,
               const std::array<std::size_t, 3>& channels);

  Tensor forward(const Tensor& color) const;

 private:
  struct Block {
    std::string path;
    std::array<Tensor, 3> kernels;
    std::array<Tensor, 3> biases;
  };
  std::array<Block, 3> blocks_;
};

/// Decoder stage: concatenates the running state with an encoder skip and
/// upsamples x2 through a transposed convolution modulated by a sigmoid gate
/// from a second transposed convolution.
class GatedDeconvLayer {
 public:
  GatedDeconvLayer(ParamStore& params, Initializer& init, std::string path, std::size_t c_in,
                   std::size_t c_out, std::size_t kernel_size);

  Tensor forward(const Tensor& state, const Tensor& skip) const;

 private:
  std::string path_;
  Tensor feature_kernel_, feature_bias_;
  Tensor gate_kernel_, gate_bias_;
};

/// Depth completion network: mask-adaptive depth encoder, colour encoder,
/// BP-Fusion at the bottleneck, and a skip-connected gated decoder ending in
/// a 1x1 convolution with ReLU.
class CompletionModel {
 public:
  explicit CompletionModel(ModelConfig config = {});
  CompletionModel(const CompletionModel&) = delete;
  CompletionModel& operator=(const CompletionModel&) = delete;

  /// depth: h x w x 1 in metres (0 = missing); color: h x w x 3 in [0, 1];
  /// h and w divisible by 8. Returns a dense, non-negative h x w x 1 map.
  Tensor forward(const Tensor& depth, const Tensor& color) const;
  Tensor forward(const Tensor& depth, const Tensor& color, Gating gating) const;

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::vector<ParamInfo> param_inventory() const { return params_.inventory(); }

  const DepthEncoder& depth_encoder() const { return *depth_encoder_; }
  const BpFusion& fusion() const { return *fusion_; }

 private:
  ModelConfig config_;
  ParamStore params_;
  std::unique_ptr<DepthEncoder> depth_encoder_;
  std::unique_ptr<ColorEncoder> color_encoder_;
  std::unique_ptr<BpFusion> fusion_;
  std::array<std::unique_ptr<GatedDeconvLayer>, 3> decoder_;
  Tensor head_kernel_, head_bias_;
};

}  // namespace maga
