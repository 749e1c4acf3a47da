#include "maga/fusion.hpp"

#include <array>

#include "maga/errors.hpp"
#include "maga/ops.hpp"
#include "path_error.hpp"

namespace maga {

CmfModule CmfModule::create(ParamStore& params, Initializer& init, const std::string& path,
                            std::size_t channels, std::size_t heads, std::size_t hidden) {
  if (channels == 0 || heads == 0 || hidden == 0) throw ConfigError(path + ": zero-sized CMF");
  const std::size_t wide = channels * heads;
  CmfModule m;
  m.channels = channels;
  m.heads = heads;
  m.hidden = hidden;
  m.path = path;
  m.expand_t_kernel = params.add(path + ".expand_t.kernel", init.he_uniform({1, 1, channels, wide}, channels));
  m.expand_t_bias = params.add(path + ".expand_t.bias", init.zeros({wide}));
  m.expand_q_kernel = params.add(path + ".expand_q.kernel", init.he_uniform({1, 1, channels, wide}, channels));
  m.expand_q_bias = params.add(path + ".expand_q.bias", init.zeros({wide}));
  m.hidden1_weight = params.add(path + ".mlp.hidden1.weight", init.he_uniform({2, hidden}, 2));
  m.hidden1_bias = params.add(path + ".mlp.hidden1.bias", init.zeros({hidden}));
  m.hidden2_weight = params.add(path + ".mlp.hidden2.weight", init.he_uniform({hidden, hidden}, hidden));
  m.hidden2_bias = params.add(path + ".mlp.hidden2.bias", init.zeros({hidden}));
  m.correction_weight = params.add(path + ".mlp.correction.weight", init.he_uniform({hidden, 1}, hidden));
  m.correction_bias = params.add(path + ".mlp.correction.bias", init.zeros({1}));
  m.gate_weight = params.add(path + ".mlp.gate.weight", init.he_uniform({hidden, 1}, hidden));
  m.gate_bias = params.add(path + ".mlp.gate.bias", init.zeros({1}));
  m.fuse_kernel = params.add(path + ".fuse.kernel", init.he_uniform({1, 1, wide, channels}, wide));
  m.fuse_bias = params.add(path + ".fuse.bias", init.zeros({channels}));
  return m;
}

Tensor cmf_forward(const CmfModule& m, const Tensor& target, const Tensor& query) {
  if (target.shape() != query.shape()) {
    throw DimensionError("cmf: target " + shape_string(target.shape()) + " and query " +
                         shape_string(query.shape()) + " differ");
  }
  if (target.rank() != 3 || target.dim(2) != m.channels) {
    throw DimensionError("cmf: expected h x w x " + std::to_string(m.channels) + ", got " +
                         shape_string(target.shape()));
  }
  return detail::with_path(m.path, [&] {
    const std::size_t h = target.dim(0), w = target.dim(1);
    const std::size_t wide = m.channels * m.heads;
    const std::size_t rows = h * w * wide;
    Tensor t = conv2d(target, m.expand_t_kernel, m.expand_t_bias, 1, Padding::same);
    Tensor q = conv2d(query, m.expand_q_kernel, m.expand_q_bias, 1, Padding::same);
    // Every (pixel, channel) pair becomes one MLP row. Row order is irrelevant
    // to a row-wise MLP, so the channel slices need not be materialised.
    Tensor t_col = reshape(t, {rows, 1});
    Tensor q_col = reshape(q, {rows, 1});
    const std::array<Tensor, 2> pair = {t_col, q_col};
    Tensor tq = concat_channels(pair);
    Tensor a1 = relu(bias_add(matmul(tq, m.hidden1_weight), m.hidden1_bias));
    Tensor a2 = relu(bias_add(matmul(a1, m.hidden2_weight), m.hidden2_bias));
    Tensor correction = bias_add(matmul(a2, m.correction_weight), m.correction_bias);
    Tensor gate = bias_add(matmul(a2, m.gate_weight), m.gate_bias);
    Tensor slices = mul(relu(add(correction, t_col)), sigmoid(gate));
    Tensor restored = reshape(slices, {h, w, wide});
    return conv2d(restored, m.fuse_kernel, m.fuse_bias, 1, Padding::same);
  });
}

BidFusionBlock BidFusionBlock::create(ParamStore& params, Initializer& init, const std::string& path,
                                      std::size_t channels, std::size_t heads, std::size_t hidden) {
  BidFusionBlock b;
  b.depth_to_color = CmfModule::create(params, init, path + ".d2c", channels, heads, hidden);
  b.color_to_depth = CmfModule::create(params, init, path + ".c2d", channels, heads, hidden);
  return b;
}

std::pair<Tensor, Tensor> bid_fusion_forward(const BidFusionBlock& block, const Tensor& depth_feat,
                                             const Tensor& color_feat, ColorFeed feed) {
  if (depth_feat.shape() != color_feat.shape()) {
    throw DimensionError("bid_fusion: depth " + shape_string(depth_feat.shape()) + " and colour " +
                         shape_string(color_feat.shape()) + " differ");
  }
  Tensor color_out = cmf_forward(block.depth_to_color, color_feat, depth_feat);
  const Tensor& color_for_depth = feed == ColorFeed::updated ? color_out : color_feat;
  Tensor depth_out = cmf_forward(block.color_to_depth, depth_feat, color_for_depth);
  return {depth_out, color_out};
}

BpFusion::BpFusion(ParamStore& params, Initializer& init, const std::string& path, std::size_t channels,
                   std::size_t block_count, std::size_t heads, std::size_t hidden, ColorFeed feed)
    : feed_(feed) {
  if (block_count == 0) throw ConfigError(path + ": BP-Fusion needs at least one block");
  for (std::size_t i = 0; i < block_count; ++i) {
    blocks_.push_back(BidFusionBlock::create(params, init, path + ".block" + std::to_string(i + 1), channels,
                                             heads, hidden));
  }
}

Tensor BpFusion::forward(const Tensor& depth_feat, const Tensor& color_feat) const {
  Tensor depth = depth_feat;
  Tensor color = color_feat;
  for (const BidFusionBlock& b : blocks_) std::tie(depth, color) = bid_fusion_forward(b, depth, color, feed_);
  return depth;
}

}  // namespace maga
