#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "maga/mask.hpp"
#include "maga/params.hpp"
#include "maga/tensor.hpp"

namespace maga {

/// Switch used to build the gating-disabled twin of a model: with
/// `disabled`, every MagaConv returns its plain convolution.
enum class Gating { enabled, disabled };

/// Reverse-and-Cut activation, 2 * relu(exp(-x) - 0.5), for x >= 0.
/// Returns exactly 0 for x >= ln 2 with zero gradient there (including at the
/// kink). Throws ContractError on negative input.
Tensor rnc(const Tensor& x);

/// One MagaConv head: a k x k convolution whose output is gated by how much
/// of its |kernel|-weighted footprint lands on invalid pixels.
struct MagaConvHead {
  std::size_t kernel_size = 0;
  Tensor kernel;       // k x k x c_in x c_head
  Tensor bias;         // c_head
  Tensor epsilon_raw;  // scalar; epsilon = sigmoid(epsilon_raw)

  static MagaConvHead create(ParamStore& params, Initializer& init, const std::string& prefix,
                             std::size_t kernel_size, std::size_t c_in, std::size_t c_head);

  double epsilon() const;
};

/// conv(features) * RnC(epsilon * conv(mask, |kernel|)).
///
/// The mask convolution sees the mask replicated over the input channels,
/// zero-padded outside the image, and carries no bias. Gradients reach the
/// kernel through both the feature path and the |kernel| gate path.
Tensor maga_conv(const MagaConvHead& head, const Tensor& features, const Mask& mask,
                 std::size_t stride, Gating gating = Gating::enabled);

/// Three parallel heads (k = 3, 5, 7), channel-concatenated in that order,
/// then a 1x1 fuse convolution and ReLU.
class MagaConvLayer {
 public:
  static constexpr std::array<std::size_t, 3> kHeadKernels = {3, 5, 7};

  MagaConvLayer(ParamStore& params, Initializer& init, std::string path, std::size_t c_in,
                std::size_t c_out, std::size_t stride);

  Tensor forward(const Tensor& features, const Mask& mask, Gating gating = Gating::enabled) const;

  const std::array<MagaConvHead, 3>& heads() const { return heads_; }
  const Tensor& fuse_kernel() const { return fuse_kernel_; }
  const Tensor& fuse_bias() const { return fuse_bias_; }
  std::size_t stride() const { return stride_; }
  std::size_t out_channels() const { return c_out_; }

 private:
  std::string path_;
  std::size_t c_out_;
  std::size_t stride_;
  std::array<MagaConvHead, 3> heads_;
  Tensor fuse_kernel_;
  Tensor fuse_bias_;
};

/// Three MagaConv layers; the first has stride 2. Layer l of block b reads
/// pyramid entry M(b, l).
class MagaConvBlock {
 public:
  MagaConvBlock(ParamStore& params, Initializer& init, const std::string& path, int block_index,
                std::size_t c_in, std::size_t c_out);

  Tensor forward(const Tensor& features, const MaskPyramid& pyramid, Gating gating = Gating::enabled) const;

  const std::array<MagaConvLayer, 3>& layers() const { return layers_; }

 private:
  int block_index_;
  std::array<MagaConvLayer, 3> layers_;
};

struct EncoderOutput {
  std::array<Tensor, 3> skips;  // final-layer output of each block
  Tensor bottom;                // same tensor as skips[2]
};

class DepthEncoder {
 public:
  DepthEncoder(ParamStore& params, Initializer& init, const std::string& path,
               const std::array<std::size_t, 3>& channels);

  EncoderOutput forward(const Tensor& depth, const MaskPyramid& pyramid,
                        Gating gating = Gating::enabled) const;

  const std::array<MagaConvBlock, 3>& blocks() const { return blocks_; }

 private:
  std::array<MagaConvBlock, 3> blocks_;
};

}  // namespace maga
