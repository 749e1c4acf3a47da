#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "maga/errors.hpp"
#include "maga/ops.hpp"
#include "maga/oracles.hpp"
#include "maga/rng.hpp"
#include "maga/tensor.hpp"
#include "test_util.hpp"

namespace maga {
namespace {

using test::random_tensor;

TEST(TensorTest, ConstructionChecksElementCount) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1.0, 2.0, 3.0}), DimensionError);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_DOUBLE_EQ(t.at({1, 2}), 1.5);
}

TEST(TensorTest, CopiesShareStorageAndCloneDetaches) {
  Tensor a({2}, std::vector<double>{1.0, 2.0});
  Tensor b = a;
  b.mutable_values()[0] = 7.0;
  EXPECT_EQ(a.values()[0], 7.0);
  Tensor c = a.clone();
  c.mutable_values()[0] = 3.0;
  EXPECT_EQ(a.values()[0], 7.0);
}

TEST(Conv2dTest, IdentityOnSinglePixel) {
  const Tensor in({1, 1, 1}, std::vector<double>{5.0});
  const Tensor k({1, 1, 1, 1}, std::vector<double>{1.0});
  const Tensor out = conv2d(in, k);
  ASSERT_EQ(out.shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(out.item(), 5.0);
}

TEST(Conv2dTest, ValidWindowSum) {
  const Tensor in({3, 3, 1}, 1.0);
  const Tensor k({3, 3, 1, 1}, 1.0);
  const Tensor out = conv2d(in, k, {}, 1, Padding::valid);
  ASSERT_EQ(out.shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(out.item(), 9.0);
}

TEST(Conv2dTest, MatchesLoopOracle) {
  SplitMix64 rng(21);
  const Tensor in = random_tensor(rng, {5, 5, 2});
  const Tensor k = random_tensor(rng, {3, 3, 2, 4});
  const Tensor b = random_tensor(rng, {4});
  for (std::size_t stride : {1u, 2u}) {
    for (bool same : {true, false}) {
      const Tensor got = conv2d(in, k, b, stride, same ? Padding::same : Padding::valid);
      const oracle::Grid want = oracle::conv2d(oracle::Grid::from(in), k, b, stride, same);
      test::expect_near_grid(got, want, 1e-12);
    }
  }
}

TEST(Conv2dTest, SameExtentIsCeilOfStride) {
  const Tensor in({7, 5, 1}, 1.0);
  const Tensor k({3, 3, 1, 2}, 1.0);
  EXPECT_EQ(conv2d(in, k, {}, 2).shape(), (Shape{4, 3, 2}));
  EXPECT_EQ(conv2d(in, k, {}, 1).shape(), (Shape{7, 5, 2}));
}

TEST(Conv2dTest, ChannelMismatchIsDimensionError) {
  const Tensor in({4, 4, 2}, 1.0);
  const Tensor k({3, 3, 3, 1}, 1.0);
  EXPECT_THROW(conv2d(in, k), DimensionError);
}

TEST(Conv2dTest, EvenKernelWithSamePaddingIsRejected) {
  const Tensor in({4, 4, 1}, 1.0);
  const Tensor k({2, 2, 1, 1}, 1.0);
  EXPECT_THROW(conv2d(in, k), ContractError);
}

TEST(Conv2dTest, ValidPaddingNeedsRoomForKernel) {
  const Tensor in({2, 2, 1}, 1.0);
  const Tensor k({3, 3, 1, 1}, 1.0);
  EXPECT_THROW(conv2d(in, k, {}, 1, Padding::valid), DimensionError);
}

TEST(ConvTranspose2dTest, SinglePixelExpandsKernel) {
  const Tensor in({1, 1, 1}, std::vector<double>{3.0});
  const Tensor k({2, 2, 1, 1}, std::vector<double>{1.0, 2.0, 3.0, 4.0});
  const Tensor out = conv_transpose2d(in, k, 2);
  ASSERT_EQ(out.shape(), (Shape{2, 2, 1}));
  EXPECT_EQ(out.at({0, 0, 0}), 3.0);
  EXPECT_EQ(out.at({0, 1, 0}), 6.0);
  EXPECT_EQ(out.at({1, 0, 0}), 9.0);
  EXPECT_EQ(out.at({1, 1, 0}), 12.0);
}

TEST(ConvTranspose2dTest, UnitKernelStrideOneIsIdentity) {
  SplitMix64 rng(4);
  const Tensor in = random_tensor(rng, {4, 3, 2});
  std::vector<double> eye(4, 0.0);
  eye[0] = eye[3] = 1.0;
  const Tensor k({1, 1, 2, 2}, eye);
  const Tensor out = conv_transpose2d(in, k, 1);
  ASSERT_EQ(out.shape(), in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(out.values()[i], in.values()[i]);
}

TEST(ConvTranspose2dTest, MatchesScatterOracle) {
  SplitMix64 rng(5);
  for (std::size_t k : {1u, 2u, 3u, 4u}) {
    for (std::size_t stride : {1u, 2u}) {
      const Tensor in = random_tensor(rng, {3, 4, 2});
      const Tensor kernel = random_tensor(rng, {k, k, 3, 2});
      const Tensor bias = random_tensor(rng, {3});
      if (k % 2 == 0 && stride == 1) {
        EXPECT_THROW(conv_transpose2d(in, kernel, stride, bias), DimensionError);
        continue;
      }
      const Tensor got = conv_transpose2d(in, kernel, stride, bias);
      test::expect_near_grid(got, oracle::conv_transpose2d(oracle::Grid::from(in), kernel, bias, stride), 1e-12);
    }
  }
}

TEST(ConvTranspose2dTest, AdjointDotProductIdentity) {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 * rng.below(3) + 1;
    const std::size_t stride = 1 + rng.below(2);
    const std::size_t h = stride * (2 + rng.below(4));
    const std::size_t w = stride * (2 + rng.below(4));
    const std::size_t ca = 1 + rng.below(3);
    const std::size_t cb = 1 + rng.below(3);
    const Tensor x = random_tensor(rng, {h, w, ca});
    const Tensor kernel = random_tensor(rng, {k, k, ca, cb});
    const Tensor y = random_tensor(rng, {h / stride, w / stride, cb});
    const Tensor cx = conv2d(x, kernel, {}, stride);
    const Tensor ty = conv_transpose2d(y, kernel, stride);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < cx.size(); ++i) lhs += cx.values()[i] * y.values()[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x.values()[i] * ty.values()[i];
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs))) << "trial " << trial;
  }
}

TEST(ConvTranspose2dTest, StrideMustBeOneOrTwo) {
  const Tensor in({2, 2, 1}, 1.0);
  const Tensor k({3, 3, 1, 1}, 1.0);
  EXPECT_THROW(conv_transpose2d(in, k, 3), ContractError);
}

TEST(ConvTranspose2dTest, ChannelMismatchIsDimensionError) {
  const Tensor in({2, 2, 2}, 1.0);
  const Tensor k({3, 3, 1, 3}, 1.0);
  EXPECT_THROW(conv_transpose2d(in, k, 2), DimensionError);
}

TEST(ElementwiseTest, ScalarExamples) {
  EXPECT_EQ(relu(Tensor::scalar(-1.0)).item(), 0.0);
  EXPECT_EQ(sigmoid(Tensor::scalar(0.0)).item(), 0.5);
  EXPECT_EQ(neg(Tensor::scalar(2.0)).item(), -2.0);
  EXPECT_EQ(scale(Tensor::scalar(2.0), 3.0).item(), 6.0);
  EXPECT_EQ(exp(Tensor::scalar(0.0)).item(), 1.0);
  EXPECT_EQ(abs(Tensor::scalar(-4.0)).item(), 4.0);
}

TEST(ElementwiseTest, MulMatchesPointwiseProduct) {
  SplitMix64 rng(7);
  const Tensor a = random_tensor(rng, {4, 5, 3});
  const Tensor b = random_tensor(rng, {4, 5, 3});
  const Tensor p = mul(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(p.values()[i], a.values()[i] * b.values()[i]);
}

TEST(ElementwiseTest, ScalarBroadcastBothSides) {
  const Tensor a({2, 2}, std::vector<double>{1, 2, 3, 4});
  const Tensor s = Tensor::scalar(10.0);
  const Tensor l = add(s, a);
  const Tensor r = sub(a, s);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(l.values()[i], a.values()[i] + 10.0);
    EXPECT_EQ(r.values()[i], a.values()[i] - 10.0);
  }
}

TEST(ElementwiseTest, SingleElementBroadcastKeepsHigherRank) {
  const Tensor s = Tensor::scalar(2.0);
  const Tensor one({1, 1, 1}, std::vector<double>{3.0});
  EXPECT_EQ(mul(s, one).shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(mul(one, s).shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(add(s, one).item(), 5.0);
}

TEST(ElementwiseTest, IncompatibleShapesAreRejected) {
  const Tensor a({2, 2}, 1.0);
  const Tensor b({4}, 1.0);
  EXPECT_THROW(add(a, b), DimensionError);
  EXPECT_THROW(mul(a, b), DimensionError);
}

TEST(ElementwiseTest, NonFiniteForwardIsNumericError) {
  EXPECT_THROW(exp(Tensor::scalar(1000.0)), NumericError);
}

TEST(MinPoolTest, OneValidCentreValidatesEverything) {
  const Tensor in({3, 3, 1}, std::vector<double>{1, 1, 1, 1, 0, 1, 1, 1, 1});
  const Tensor out = min_pool2d(in, 3, 1);
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(MinPoolTest, AllOnesStayOnes) {
  const Tensor out = min_pool2d(Tensor({4, 5, 1}, 1.0), 3, 1);
  for (double v : out.values()) EXPECT_EQ(v, 1.0);
}

TEST(MinPoolTest, MatchesLoopOracleAndStaysBinary) {
  SplitMix64 rng(8);
  for (auto [window, stride] : {std::pair{2u, 2u}, std::pair{3u, 1u}, std::pair{3u, 2u}}) {
    const Tensor in = test::random_binary(rng, {6, 6, 2}, 0.5);
    const Tensor out = min_pool2d(in, window, stride);
    test::expect_near_grid(out, oracle::min_pool(oracle::Grid::from(in), window, stride), 0.0);
    for (double v : out.values()) EXPECT_TRUE(v == 0.0 || v == 1.0);
  }
}

TEST(MatmulTest, IdentityAndHandExample) {
  const Tensor a({2, 2}, std::vector<double>{1, 2, 3, 4});
  const Tensor eye({2, 2}, std::vector<double>{1, 0, 0, 1});
  const Tensor ia = matmul(eye, a);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(ia.values()[i], a.values()[i]);
  const Tensor v = matmul(a, Tensor({2, 1}, 1.0));
  EXPECT_EQ(v.values()[0], 3.0);
  EXPECT_EQ(v.values()[1], 7.0);
}

TEST(MatmulTest, MatchesTripleLoop) {
  SplitMix64 rng(9);
  const Tensor a = random_tensor(rng, {7, 5});
  const Tensor b = random_tensor(rng, {5, 3});
  const Tensor c = matmul(a, b);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += a.at({i, k}) * b.at({k, j});
      EXPECT_NEAR(c.at({i, j}), s, 1e-12);
    }
  }
}

TEST(MatmulTest, InnerDimensionMismatch) {
  EXPECT_THROW(matmul(Tensor({2, 3}, 1.0), Tensor({2, 3}, 1.0)), DimensionError);
}

TEST(DataMovementTest, ReshapeRoundTrip) {
  SplitMix64 rng(10);
  const Tensor x = random_tensor(rng, {4, 3, 1});
  const Tensor back = reshape(reshape(x, {12, 1}), {4, 3, 1});
  EXPECT_EQ(back.shape(), x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(back.values()[i], x.values()[i]);
  EXPECT_THROW(reshape(x, {5, 2}), DimensionError);
}

TEST(DataMovementTest, ConcatKeepsChannelOrder) {
  const Tensor a({2, 2, 1}, 1.0);
  const Tensor b({2, 2, 1}, 2.0);
  const std::array<Tensor, 2> parts = {a, b};
  const Tensor c = concat_channels(parts);
  ASSERT_EQ(c.shape(), (Shape{2, 2, 2}));
  for (std::size_t p = 0; p < 4; ++p) {
    EXPECT_EQ(c.values()[2 * p], 1.0);
    EXPECT_EQ(c.values()[2 * p + 1], 2.0);
  }
}

TEST(DataMovementTest, ReplicateAndSliceChannels) {
  SplitMix64 rng(11);
  const Tensor m = test::random_binary(rng, {3, 3, 1}, 0.5);
  const Tensor r = replicate_channels(m, 4);
  ASSERT_EQ(r.shape(), (Shape{3, 3, 4}));
  for (std::size_t ch = 0; ch < 4; ++ch) {
    const Tensor s = slice_channels(r, ch, ch + 1);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(s.values()[i], m.values()[i]);
  }
  EXPECT_THROW(slice_channels(r, 2, 5), DimensionError);
}

TEST(BackwardTest, SumGivesOnes) {
  SplitMix64 rng(12);
  Tensor x = random_tensor(rng, {3, 4});
  x.set_requires_grad(true);
  GradTape tape;
  tape.backward(sum(x));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(BackwardTest, SquareGivesTwiceInput) {
  SplitMix64 rng(13);
  Tensor x = random_tensor(rng, {5});
  x.set_requires_grad(true);
  GradTape tape;
  tape.backward(sum(mul(x, x)));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(x.grad()[i], 2.0 * x.values()[i]);
}

TEST(BackwardTest, RepeatedCallsAccumulate) {
  Tensor x({2}, std::vector<double>{1.0, -2.0});
  x.set_requires_grad(true);
  GradTape tape;
  const Tensor loss = sum(scale(x, 3.0));
  tape.backward(loss);
  tape.backward(loss);
  EXPECT_EQ(x.grad()[0], 6.0);
  EXPECT_EQ(x.grad()[1], 6.0);
}

TEST(BackwardTest, NonScalarLossIsContractError) {
  Tensor x({2}, 1.0);
  x.set_requires_grad(true);
  GradTape tape;
  EXPECT_THROW(tape.backward(scale(x, 2.0)), ContractError);
}

TEST(BackwardTest, NothingRecordedWithoutTape) {
  Tensor x({2}, 1.0);
  x.set_requires_grad(true);
  const Tensor y = scale(x, 2.0);
  EXPECT_FALSE(y.requires_grad());
}

// A composite graph touching every differentiable op, checked against
// central differences on each input element.
TEST(BackwardTest, CompositeGraphMatchesFiniteDifferences) {
  SplitMix64 rng(14);
  Tensor img = random_tensor(rng, {6, 6, 2});
  Tensor kernel = random_tensor(rng, {3, 3, 2, 3});
  Tensor bias = random_tensor(rng, {3});
  Tensor up = random_tensor(rng, {4, 4, 2, 3});
  Tensor w = random_tensor(rng, {2, 2});
  for (Tensor* t : {&img, &kernel, &bias, &up, &w}) t->set_requires_grad(true);

  auto loss_fn = [&] {
    Tensor a = relu(conv2d(img, kernel, bias, 2));
    Tensor b = sigmoid(conv_transpose2d(a, up, 2));
    Tensor c = mul(b, exp(scale(img, 0.1)));
    Tensor d = abs(sub(c, shift(neg(img), 0.3)));
    Tensor flat = reshape(slice_channels(d, 0, 2), {36, 2});
    const std::array<Tensor, 2> parts = {matmul(flat, w), flat};
    Tensor e = concat_channels(parts);
    Tensor f = mul(replicate_channels(sum_axis(e, 1), 4), e);
    return mean(add(f, Tensor::scalar(0.5)));
  };

  GradTape tape;
  tape.backward(loss_fn());
  for (Tensor* t : {&img, &kernel, &bias, &up, &w}) {
    const std::vector<double> analytic(t->grad().begin(), t->grad().end());
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double numeric = oracle::central_difference([&] { return loss_fn().item(); }, *t, i, 1e-5);
      EXPECT_LE(oracle::relative_error(analytic[i], numeric), 1e-4) << "index " << i;
    }
  }
}

TEST(DeterminismTest, IdenticalInputsGiveIdenticalGradients) {
  auto run = [] {
    SplitMix64 rng(15);
    Tensor x = random_tensor(rng, {5, 5, 2});
    Tensor k = random_tensor(rng, {3, 3, 2, 2});
    k.set_requires_grad(true);
    GradTape tape;
    const Tensor y = conv2d(x, k);
    tape.backward(sum(mul(y, y)));
    std::vector<double> out(y.values().begin(), y.values().end());
    out.insert(out.end(), k.grad().begin(), k.grad().end());
    return out;
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace maga
