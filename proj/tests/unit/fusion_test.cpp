#include <gtest/gtest.h>

#include <cmath>

#include "maga/errors.hpp"
#include "maga/fusion.hpp"
#include "maga/ops.hpp"
#include "maga/oracles.hpp"
#include "test_util.hpp"

namespace maga {
namespace {

void fill(Tensor t, double v) {
  for (double& x : t.mutable_values()) x = v;
}

void randomize_biases(CmfModule& m, SplitMix64& rng) {
  for (Tensor* b : {&m.expand_t_bias, &m.expand_q_bias, &m.hidden1_bias, &m.hidden2_bias, &m.correction_bias,
                    &m.gate_bias, &m.fuse_bias}) {
    for (double& x : b->mutable_values()) x = rng.uniform(-0.5, 0.5);
  }
}

std::size_t mlp_param_count(const ParamStore& ps) {
  std::size_t n = 0;
  for (const auto& [path, t] : ps.entries()) {
    if (path.find(".mlp.") != std::string::npos) n += t.size();
  }
  return n;
}

TEST(CmfTest, ZeroMlpClosedForm) {
  ParamStore ps;
  Initializer init(1);
  CmfModule m = CmfModule::create(ps, init, "cmf", 3);
  for (Tensor* w : {&m.hidden1_weight, &m.hidden1_bias, &m.hidden2_weight, &m.hidden2_bias, &m.correction_weight,
                    &m.correction_bias, &m.gate_weight, &m.gate_bias}) {
    fill(*w, 0.0);
  }
  SplitMix64 rng(61);
  const Tensor t = test::random_tensor(rng, {4, 5, 3});
  const Tensor q = test::random_tensor(rng, {4, 5, 3});
  const Tensor got = cmf_forward(m, t, q);
  const Tensor expanded = conv2d(t, m.expand_t_kernel, m.expand_t_bias, 1, Padding::same);
  const Tensor want = conv2d(scale(relu(expanded), 0.5), m.fuse_kernel, m.fuse_bias, 1, Padding::same);
  ASSERT_EQ(got.shape(), want.shape());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.values()[i], want.values()[i], 1e-14);
}

// Probe: identity-like expand and fuse kernels with a channel-tagged target
// show every slice lands back at its own channel and pixel.
TEST(CmfTest, SliceBookkeepingPreservesPositions) {
  ParamStore ps;
  Initializer init(2);
  CmfModule m = CmfModule::create(ps, init, "cmf", 2, 3, 4);
  for (Tensor* w : {&m.hidden1_weight, &m.hidden1_bias, &m.hidden2_weight, &m.hidden2_bias, &m.correction_weight,
                    &m.correction_bias, &m.gate_weight, &m.gate_bias, &m.expand_t_bias, &m.expand_q_bias,
                    &m.fuse_bias}) {
    fill(*w, 0.0);
  }
  auto et = m.expand_t_kernel.mutable_values();  // 1 x 1 x 2 x 6
  for (std::size_t ci = 0; ci < 2; ++ci) {
    for (std::size_t co = 0; co < 6; ++co) et[ci * 6 + co] = (co % 2 == ci) ? 1.0 : 0.0;
  }
  fill(m.expand_q_kernel, 0.0);
  auto fk = m.fuse_kernel.mutable_values();  // 1 x 1 x 6 x 2
  for (std::size_t ci = 0; ci < 6; ++ci) {
    for (std::size_t co = 0; co < 2; ++co) fk[ci * 2 + co] = (ci == co) ? 1.0 : 0.0;
  }
  std::vector<double> tv(3 * 4 * 2);
  for (std::size_t y = 0; y < 3; ++y) {
    for (std::size_t x = 0; x < 4; ++x) {
      for (std::size_t c = 0; c < 2; ++c) tv[(y * 4 + x) * 2 + c] = 100.0 * c + 10.0 * y + x + 1.0;
    }
  }
  const Tensor target({3, 4, 2}, tv);
  const Tensor out = cmf_forward(m, target, Tensor({3, 4, 2}, 0.0));
  for (std::size_t i = 0; i < tv.size(); ++i) EXPECT_DOUBLE_EQ(out.values()[i], 0.5 * tv[i]);
}

TEST(CmfTest, MatchesStepByStepOracle) {
  SplitMix64 rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t c = 1 + rng.below(4);
    const std::size_t h = 1 + rng.below(6), w = 1 + rng.below(6);
    ParamStore ps;
    Initializer init(100 + trial);
    CmfModule m = CmfModule::create(ps, init, "cmf", c);
    randomize_biases(m, rng);
    const Tensor t = test::random_tensor(rng, {h, w, c});
    const Tensor q = test::random_tensor(rng, {h, w, c});
    test::expect_near_grid(cmf_forward(m, t, q), oracle::cmf(m, oracle::Grid::from(t), oracle::Grid::from(q)),
                           1e-12);
  }
}

TEST(CmfTest, ShapeMismatchIsDimensionError) {
  ParamStore ps;
  Initializer init(3);
  const CmfModule m = CmfModule::create(ps, init, "cmf", 3);
  EXPECT_THROW(cmf_forward(m, Tensor({2, 2, 3}, 1.0), Tensor({2, 3, 3}, 1.0)), DimensionError);
  EXPECT_THROW(cmf_forward(m, Tensor({2, 2, 2}, 1.0), Tensor({2, 2, 2}, 1.0)), DimensionError);
}

TEST(CmfTest, MlpParameterCountIndependentOfChannels) {
  std::size_t first = 0;
  for (std::size_t c : {1u, 4u, 96u}) {
    ParamStore ps;
    Initializer init(4);
    CmfModule::create(ps, init, "cmf", c);
    const std::size_t n = mlp_param_count(ps);
    if (first == 0) first = n;
    EXPECT_EQ(n, first);
  }
  EXPECT_EQ(first, 2u * 16 + 16 + 16 * 16 + 16 + 16 + 1 + 16 + 1);
}

TEST(CmfTest, PerturbingSharedMlpChangesEverySlice) {
  ParamStore ps;
  Initializer init(5);
  CmfModule m = CmfModule::create(ps, init, "cmf", 2);
  SplitMix64 rng(63);
  const Tensor t = test::random_tensor(rng, {3, 3, 2}, 0.5, 1.5);
  const Tensor q = test::random_tensor(rng, {3, 3, 2}, 0.5, 1.5);
  fill(m.fuse_kernel, 1.0);
  // Every expanded slice feeds the fused output, so inspect the slice map.
  auto slice_outputs = [&] {
    const Tensor te = conv2d(t, m.expand_t_kernel, m.expand_t_bias, 1, Padding::same);
    const Tensor qe = conv2d(q, m.expand_q_kernel, m.expand_q_bias, 1, Padding::same);
    const oracle::Grid tg = oracle::Grid::from(te), qg = oracle::Grid::from(qe);
    std::vector<double> out;
    for (std::size_t ch = 0; ch < tg.c; ++ch) {
      double s = 0.0;
      for (std::size_t p = 0; p < tg.h * tg.w; ++p) {
        const Tensor pair({1, 2}, std::vector<double>{tg.v[p * tg.c + ch], qg.v[p * qg.c + ch]});
        const Tensor h1 = relu(add(matmul(pair, m.hidden1_weight), reshape(m.hidden1_bias, {1, 16})));
        const Tensor h2 = relu(add(matmul(h1, m.hidden2_weight), reshape(m.hidden2_bias, {1, 16})));
        s += add(matmul(h2, m.gate_weight), m.gate_bias).item();
      }
      out.push_back(s);
    }
    return out;
  };
  const std::vector<double> before = slice_outputs();
  m.hidden1_weight.mutable_values()[0] += 0.3;
  m.hidden1_weight.mutable_values()[17] -= 0.3;
  const std::vector<double> after = slice_outputs();
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NE(before[i], after[i]) << "slice " << i;
}

TEST(CmfTest, GateNeverExceedsOpenGate) {
  ParamStore ps;
  Initializer init(6);
  CmfModule m = CmfModule::create(ps, init, "cmf", 2);
  SplitMix64 rng(64);
  randomize_biases(m, rng);
  for (double& w : m.fuse_kernel.mutable_values()) w = std::abs(w);
  fill(m.fuse_bias, 0.0);
  const Tensor t = test::random_tensor(rng, {4, 4, 2});
  const Tensor q = test::random_tensor(rng, {4, 4, 2});
  const Tensor gated = cmf_forward(m, t, q);
  fill(m.gate_weight, 0.0);
  fill(m.gate_bias, 40.0);
  const Tensor open = cmf_forward(m, t, q);
  for (std::size_t i = 0; i < gated.size(); ++i) {
    EXPECT_GE(gated.values()[i], 0.0);
    EXPECT_LE(gated.values()[i], open.values()[i] + 1e-12);
  }
}

TEST(CmfTest, ZeroQueryStillDependsOnTarget) {
  ParamStore ps;
  Initializer init(7);
  const CmfModule m = CmfModule::create(ps, init, "cmf", 3);
  SplitMix64 rng(65);
  const Tensor zero({4, 4, 3}, 0.0);
  const Tensor a = cmf_forward(m, test::random_tensor(rng, {4, 4, 3}), zero);
  const Tensor b = cmf_forward(m, test::random_tensor(rng, {4, 4, 3}), zero);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += std::abs(a.values()[i] - b.values()[i]);
  EXPECT_GT(diff, 0.0);
}

TEST(BidFusionTest, PreservesShapesAndComposesTwoCmfs) {
  ParamStore ps;
  Initializer init(8);
  const BidFusionBlock blk = BidFusionBlock::create(ps, init, "bid", 3);
  SplitMix64 rng(66);
  const Tensor d = test::random_tensor(rng, {4, 5, 3});
  const Tensor c = test::random_tensor(rng, {4, 5, 3});
  const auto [depth_out, color_out] = bid_fusion_forward(blk, d, c);
  EXPECT_EQ(depth_out.shape(), d.shape());
  EXPECT_EQ(color_out.shape(), c.shape());
  const oracle::Grid c_want = oracle::cmf(blk.depth_to_color, oracle::Grid::from(c), oracle::Grid::from(d));
  const oracle::Grid d_want = oracle::cmf(blk.color_to_depth, oracle::Grid::from(d), c_want);
  test::expect_near_grid(color_out, c_want, 1e-12);
  test::expect_near_grid(depth_out, d_want, 1e-12);
}

TEST(BidFusionTest, SeveringDepthToColourChangesDepthOutput) {
  ParamStore ps;
  Initializer init(9);
  const BidFusionBlock blk = BidFusionBlock::create(ps, init, "bid", 3);
  SplitMix64 rng(67);
  const Tensor d = test::random_tensor(rng, {4, 4, 3});
  const Tensor c = test::random_tensor(rng, {4, 4, 3});
  const Tensor updated = bid_fusion_forward(blk, d, c, ColorFeed::updated).first;
  const Tensor severed = bid_fusion_forward(blk, d, c, ColorFeed::original).first;
  double diff = 0.0;
  for (std::size_t i = 0; i < updated.size(); ++i) diff += std::abs(updated.values()[i] - severed.values()[i]);
  EXPECT_GT(diff, 0.0);
  test::expect_near_grid(severed, oracle::cmf(blk.color_to_depth, oracle::Grid::from(d), oracle::Grid::from(c)),
                         1e-12);
}

TEST(BidFusionTest, ShapeMismatchIsDimensionError) {
  ParamStore ps;
  Initializer init(10);
  const BidFusionBlock blk = BidFusionBlock::create(ps, init, "bid", 3);
  EXPECT_THROW(bid_fusion_forward(blk, Tensor({2, 2, 3}, 1.0), Tensor({4, 2, 3}, 1.0)), DimensionError);
}

TEST(BpFusionTest, SingleBlockEqualsBidFusion) {
  ParamStore ps;
  Initializer init(11);
  const BpFusion f(ps, init, "bp", 3, 1);
  SplitMix64 rng(68);
  const Tensor d = test::random_tensor(rng, {4, 4, 3});
  const Tensor c = test::random_tensor(rng, {4, 4, 3});
  test::expect_bit_equal(f.forward(d, c), bid_fusion_forward(f.blocks()[0], d, c).first);
}

TEST(BpFusionTest, OutputShapeMatchesDepthForAnyBlockCount) {
  SplitMix64 rng(69);
  for (std::size_t n : {1u, 2u, 3u}) {
    ParamStore ps;
    Initializer init(12);
    const BpFusion f(ps, init, "bp", 6, n);
    EXPECT_EQ(f.blocks().size(), n);
    const Tensor d = test::random_tensor(rng, {3, 5, 6});
    EXPECT_EQ(f.forward(d, test::random_tensor(rng, {3, 5, 6})).shape(), d.shape());
  }
}

TEST(BpFusionTest, ZeroBlocksIsConfigError) {
  ParamStore ps;
  Initializer init(13);
  EXPECT_THROW(BpFusion(ps, init, "bp", 3, 0), ConfigError);
}

TEST(BpFusionTest, GradientsMatchFiniteDifferences) {
  ParamStore ps;
  Initializer init(14);
  const BpFusion f(ps, init, "bp", 2, 2, 3, 4);
  SplitMix64 rng(70);
  for (auto& [path, t] : ps.mutable_entries()) {
    if (path.ends_with("bias")) {
      for (double& x : t.mutable_values()) x = rng.uniform(-0.3, 0.3);
    }
  }
  const Tensor d = test::random_tensor(rng, {3, 3, 2});
  const Tensor c = test::random_tensor(rng, {3, 3, 2});
  auto loss = [&] {
    const Tensor o = f.forward(d, c);
    return sum(mul(o, o));
  };
  ps.zero_grad();
  GradTape tape;
  tape.backward(loss());
  for (auto& [path, t] : ps.mutable_entries()) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    for (std::size_t i = 0; i < t.size(); i += 1 + t.size() / 5) {
      const double numeric = oracle::central_difference([&] { return loss().item(); }, t, i, 1e-5);
      EXPECT_LE(oracle::relative_error(analytic[i], numeric), 1e-4) << path << "[" << i << "]";
    }
  }
}

}  // namespace
}  // namespace maga
