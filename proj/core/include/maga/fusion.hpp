#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "maga/params.hpp"
#include "maga/tensor.hpp"

namespace maga {

/// Which colour stream the C->D pass of a Bid-Fusion block consumes.
enum class ColorFeed {
  updated,   // output of the D->C pass (default)
  original,  // the block's input colour stream; severs D->C from the depth path
};

/// Cross-modal fusion. Target and query (h x w x c) are expanded to c*heads
/// channels by 1x1 convolutions; every expanded channel pair (t, q) is run
/// pixel-wise through one shared MLP (2 -> H -> H, ReLU) with a correction
/// head c and a gate head g; the slice result relu(c + t) * sigmoid(g) is
/// fused back to c channels by a 1x1 convolution.
struct CmfModule {
  std::size_t channels = 0;
  std::size_t heads = 0;
  std::size_t hidden = 0;
  Tensor expand_t_kernel, expand_t_bias;
  Tensor expand_q_kernel, expand_q_bias;
  Tensor hidden1_weight, hidden1_bias;  // 2 x H, H
  Tensor hidden2_weight, hidden2_bias;  // H x H, H
  Tensor correction_weight, correction_bias;  // H x 1, 1
  Tensor gate_weight, gate_bias;              // H x 1, 1
  Tensor fuse_kernel, fuse_bias;              // 1 x 1 x c*heads x c, c
  std::string path;

  static CmfModule create(ParamStore& params, Initializer& init, const std::string& path,
                          std::size_t channels, std::size_t heads = 3, std::size_t hidden = 16);
};

Tensor cmf_forward(const CmfModule& m, const Tensor& target, const Tensor& query);

struct BidFusionBlock {
  CmfModule depth_to_color;  // target = colour, query = depth
  CmfModule color_to_depth;  // target = depth, query = colour

  static BidFusionBlock create(ParamStore& params, Initializer& init, const std::string& path,
                               std::size_t channels, std::size_t heads = 3, std::size_t hidden = 16);
};

/// Returns (depth_out, color_out). D->C runs first; C->D reads the colour
/// stream selected by `feed`.
std::pair<Tensor, Tensor> bid_fusion_forward(const BidFusionBlock& block, const Tensor& depth_feat,
                                             const Tensor& color_feat, ColorFeed feed = ColorFeed::updated);

/// A sequence of Bid-Fusion blocks threading both streams; the result is the
/// final depth stream.
class BpFusion {
 public:
  BpFusion(ParamStore& params, Initializer& init, const std::string& path, std::size_t channels,
           std::size_t block_count = 3, std::size_t heads = 3, std::size_t hidden = 16,
           ColorFeed feed = ColorFeed::updated);

  Tensor forward(const Tensor& depth_feat, const Tensor& color_feat) const;

  const std::vector<BidFusionBlock>& blocks() const { return blocks_; }

 private:
  std::vector<BidFusionBlock> blocks_;
  ColorFeed feed_;
};

}  // namespace maga
