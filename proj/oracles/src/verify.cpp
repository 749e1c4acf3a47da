#include "maga/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

#include "maga/errors.hpp"
#include "maga/losses.hpp"
#include "maga/mask.hpp"
#include "maga/metrics.hpp"
#include "maga/network.hpp"
#include "maga/ops.hpp"
#include "maga/oracles.hpp"
#include "maga/rng.hpp"

namespace maga::verify {

namespace {

Tensor random_tensor(SplitMix64& rng, Shape shape, double lo, double hi) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(v));
}

Tensor random_mask_grid(SplitMix64& rng, std::size_t h, std::size_t w, double invalid_fraction) {
  std::vector<double> v(h * w);
  for (double& x : v) x = rng.uniform() < invalid_fraction ? 1.0 : 0.0;
  return Tensor({h, w, 1}, std::move(v));
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }
bool ends_with(const std::string& s, const std::string& p) {
  return s.size() >= p.size() && s.compare(s.size() - p.size(), p.size(), p) == 0;
}
bool contains(const std::string& s, const std::string& p) { return s.find(p) != std::string::npos; }

struct ParamClass {
  const char* name;
  std::function<bool(const std::string&)> member;
};

const std::vector<ParamClass>& param_classes() {
  static const std::vector<ParamClass> classes = {
      {"magaconv.kernel",
       [](const std::string& p) { return starts_with(p, "depth_encoder.") && contains(p, ".head_k") && ends_with(p, ".kernel"); }},
      {"magaconv.epsilon_raw", [](const std::string& p) { return ends_with(p, ".epsilon_raw"); }},
      {"magaconv.fuse.kernel",
       [](const std::string& p) { return starts_with(p, "depth_encoder.") && ends_with(p, ".fuse.kernel"); }},
      {"cmf.expand.kernel", [](const std::string& p) { return contains(p, ".expand_") && ends_with(p, ".kernel"); }},
      {"cmf.mlp.weight", [](const std::string& p) { return contains(p, ".mlp.") && ends_with(p, ".weight"); }},
      {"cmf.fuse.kernel", [](const std::string& p) { return starts_with(p, "fusion.") && ends_with(p, ".fuse.kernel"); }},
      {"decoder.kernel", [](const std::string& p) { return starts_with(p, "decoder.") && ends_with(p, ".kernel"); }},
      {"color_encoder.kernel",
       [](const std::string& p) { return starts_with(p, "color_encoder.") && ends_with(p, ".kernel"); }},
      {"bias", [](const std::string& p) { return ends_with(p, ".bias"); }},
  };
  return classes;
}

Mask to_mask(const Tensor& grid) { return Mask::from_grid(grid); }

}  // namespace

void offset_biases(ParamStore& params, std::uint64_t seed, double amplitude) {
  SplitMix64 rng(seed);
  for (auto& [path, t] : params.mutable_entries()) {
    if (!path.ends_with(".bias")) continue;
    for (double& v : t.mutable_values()) v += rng.uniform(-amplitude, amplitude);
  }
}

std::vector<CheckResult> check_gradients(const GradientOptions& options) {
  SplitMix64 rng(options.seed);
  ModelConfig config;
  config.channels = {6, 6, 6};
  config.seed = options.seed;
  config.initial_depth = 2.5;
  CompletionModel model(config);
  offset_biases(model.params(), options.seed + 1);
  const std::size_t n = options.size;

  std::vector<double> depth(n * n), gt(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    gt[i] = rng.uniform(1.0, 4.0);
    depth[i] = rng.uniform() < 0.3 ? 0.0 : gt[i];
  }
  const Tensor depth_in({n, n, 1}, depth);
  const Tensor depth_gt({n, n, 1}, gt);
  const Tensor color = random_tensor(rng, {n, n, 3}, 0.0, 1.0);

  auto loss_value = [&] { return completion_loss(model.forward(depth_in, color), depth_gt).values().total; };

  model.params().zero_grad();
  {
    GradTape tape;
    tape.backward(completion_loss(model.forward(depth_in, color), depth_gt).total);
  }

  std::vector<CheckResult> results;
  for (const ParamClass& cls : param_classes()) {
    std::vector<std::pair<std::string, std::size_t>> coords;
    for (const auto& [path, t] : model.params().entries()) {
      if (!cls.member(path)) continue;
      for (std::size_t i = 0; i < t.size(); ++i) coords.emplace_back(path, i);
    }
    const bool exhaustive = coords.size() <= options.coords_per_class;
    const std::size_t take = exhaustive ? coords.size() : options.coords_per_class;
    for (std::size_t i = 0; i < take && !exhaustive; ++i) {
      std::swap(coords[i], coords[i + static_cast<std::size_t>(rng.below(coords.size() - i))]);
    }
    double worst = 0.0;
    std::size_t failures = 0, nonzero = 0;
    std::string worst_at;
    for (std::size_t i = 0; i < take; ++i) {
      Tensor& p = model.params().mutable_entries().at(coords[i].first);
      const std::size_t idx = coords[i].second;
      const double analytic = p.has_grad() ? p.grad()[idx] : 0.0;
      const double numeric = oracle::central_difference(loss_value, p, idx, options.step);
      const double err = oracle::relative_error(analytic, numeric, 1.0);
      if (analytic != 0.0) ++nonzero;
      if (err > options.tolerance) ++failures;
      if (err >= worst) {
        worst = err;
        worst_at = coords[i].first + "[" + std::to_string(idx) + "]";
      }
    }
    CheckResult r;
    r.name = std::string("grad ") + cls.name;
    r.passed = take > 0 && failures == 0 && nonzero > 0;
    r.detail = std::to_string(take) + (exhaustive ? " coords (all)" : " coords") + ", nonzero " +
               std::to_string(nonzero) + ", max rel err " + fmt(worst) + " at " + worst_at;
    results.push_back(std::move(r));
  }
  return results;
}

CheckResult check_vanilla_collapse(std::size_t size, std::uint64_t seed) {
  SplitMix64 rng(seed);
  ModelConfig config;
  config.seed = seed;
  CompletionModel model(config);
  ModelConfig twin_config = config;
  twin_config.gating = Gating::disabled;
  CompletionModel twin(twin_config);
  const Tensor depth = random_tensor(rng, {size, size, 1}, 1.0, 10.0);
  const Tensor color = random_tensor(rng, {size, size, 3}, 0.0, 1.0);
  const Tensor gated = model.forward(depth, color, Gating::enabled);
  const Tensor plain = twin.forward(depth, color);
  const bool same = gated.shape() == plain.shape() &&
                    std::memcmp(gated.values().data(), plain.values().data(), gated.size() * sizeof(double)) == 0;
  return {"vanilla collapse", same,
          std::to_string(size) + "x" + std::to_string(size) + " fully valid, max diff " +
              fmt(max_abs_diff(gated.values(), plain.values()))};
}

CheckResult check_rnc_contract(std::size_t points) {
  std::vector<double> xs(points);
  for (std::size_t i = 0; i < points; ++i) xs[i] = 4.0 * static_cast<double>(i) / static_cast<double>(points - 1);
  const Tensor y = rnc(Tensor({points}, xs));
  const double at0 = rnc(Tensor::scalar(0.0)).item();
  const double at_ln2 = rnc(Tensor::scalar(std::numbers::ln2)).item();
  bool monotone = true, in_range = true;
  for (std::size_t i = 0; i < points; ++i) {
    in_range = in_range && y.values()[i] >= 0.0 && y.values()[i] <= 1.0;
    if (i > 0) monotone = monotone && y.values()[i] <= y.values()[i - 1];
  }
  const bool ok = at0 == 1.0 && at_ln2 == 0.0 && monotone && in_range;
  return {"rnc contract", ok,
          "rnc(0)=" + fmt(at0) + " rnc(ln2)=" + fmt(at_ln2) + " monotone=" + (monotone ? "yes" : "no") +
              " range=" + (in_range ? "ok" : "bad") + " over " + std::to_string(points) + " points"};
}

CheckResult check_mask_pyramid(std::size_t count, std::size_t size, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::size_t mismatches = 0, monotone_violations = 0;
  for (std::size_t t = 0; t < count; ++t) {
    const Tensor grid = random_mask_grid(rng, size, size, rng.uniform(0.05, 0.98));
    const MaskPyramid pyramid = MaskPyramid::build(to_mask(grid));

    std::vector<oracle::Grid> expected;
    oracle::Grid current = oracle::Grid::from(grid);
    for (int b = 0; b < MaskPyramid::kBlocks; ++b) {
      expected.push_back(current);
      expected.push_back(oracle::min_pool(expected.back(), 2, 2));
      expected.push_back(oracle::min_pool(expected.back(), 3, 1));
      current = oracle::min_pool(expected.back(), 3, 1);
    }
    double previous_valid = -1.0;
    const oracle::Grid* previous = nullptr;
    for (int b = 1; b <= MaskPyramid::kBlocks; ++b) {
      for (int l = 1; l <= MaskPyramid::kLayers; ++l) {
        const Tensor& got = pyramid.at(b, l).grid();
        const oracle::Grid& want = expected[static_cast<std::size_t>((b - 1) * 3 + (l - 1))];
        if (got.dim(0) != want.h || got.dim(1) != want.w || max_abs_diff(got.values(), want.v) != 0.0) ++mismatches;
        std::size_t invalid = 0;
        for (double v : want.v) invalid += v != 0.0;
        const double valid = 1.0 - static_cast<double>(invalid) / static_cast<double>(want.v.size());
        if (valid < previous_valid) ++monotone_violations;
        if (previous && previous->h == want.h) {
          for (std::size_t i = 0; i < want.v.size(); ++i) {
            if (previous->v[i] == 0.0 && want.v[i] != 0.0) ++monotone_violations;
          }
        }
        previous_valid = valid;
        previous = &want;
      }
    }
  }
  const bool ok = mismatches == 0 && monotone_violations == 0;
  return {"mask pyramid", ok,
          std::to_string(count) + " masks, oracle mismatches " + std::to_string(mismatches) +
              ", monotonicity violations " + std::to_string(monotone_violations)};
}

CheckResult check_gate_monotonicity(std::size_t count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::size_t violations = 0;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t h = 4 + rng.below(9), w = 4 + rng.below(9), cin = 1 + rng.below(3);
    const std::size_t k = 3 + 2 * rng.below(3);
    MagaConvHead head;
    head.kernel_size = k;
    head.kernel = random_tensor(rng, {k, k, cin, 2}, -0.3, 0.3);
    head.bias = random_tensor(rng, {2}, -0.5, 0.5);
    head.epsilon_raw = Tensor::scalar(rng.uniform(-3.0, 1.0));
    const Tensor features = random_tensor(rng, {h, w, cin}, -1.0, 1.0);
    const Tensor m1 = random_mask_grid(rng, h, w, 0.3);
    std::vector<double> more(m1.values().begin(), m1.values().end());
    for (double& v : more) {
      if (rng.uniform() < 0.3) v = 1.0;
    }
    const Tensor m2({h, w, 1}, more);
    const std::size_t stride = 1 + rng.below(2);
    const Tensor o1 = maga_conv(head, features, to_mask(m1), stride);
    const Tensor o2 = maga_conv(head, features, to_mask(m2), stride);
    for (std::size_t i = 0; i < o1.size(); ++i) violations += std::fabs(o2.values()[i]) > std::fabs(o1.values()[i]);
  }
  return {"gate monotonicity", violations == 0,
          std::to_string(count) + " mask pairs, violations " + std::to_string(violations)};
}

CheckResult check_conv_oracle(std::size_t count, double tolerance, std::uint64_t seed) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t h = 1 + rng.below(9), w = 1 + rng.below(9);
    const std::size_t cin = 1 + rng.below(4), cout = 1 + rng.below(4);
    const std::size_t k = 1 + 2 * rng.below(3), stride = 1 + rng.below(2);
    const Tensor x = random_tensor(rng, {h, w, cin}, -1.0, 1.0);
    const Tensor kern = random_tensor(rng, {k, k, cin, cout}, -1.0, 1.0);
    const Tensor bias = random_tensor(rng, {cout}, -1.0, 1.0);
    worst = std::max(worst, max_abs_diff(conv2d(x, kern, bias, stride, Padding::same).values(),
                                         oracle::conv2d(oracle::Grid::from(x), kern, bias, stride, true).v));
    if (h >= k && w >= k) {
      worst = std::max(worst, max_abs_diff(conv2d(x, kern, bias, stride, Padding::valid).values(),
                                           oracle::conv2d(oracle::Grid::from(x), kern, bias, stride, false).v));
    }
    // transposed convolution, including the even decoder kernel
    const std::size_t kt = 2 + rng.below(4);
    const std::size_t st = (kt % 2 == 0) ? 2 : stride;
    const Tensor y = random_tensor(rng, {1 + rng.below(5), 1 + rng.below(5), cout}, -1.0, 1.0);
    const Tensor kt_kernel = random_tensor(rng, {kt, kt, cin, cout}, -1.0, 1.0);
    const Tensor bt = random_tensor(rng, {cin}, -1.0, 1.0);
    try {
      const Tensor got = conv_transpose2d(y, kt_kernel, st, bt);
      worst = std::max(worst, max_abs_diff(got.values(), oracle::conv_transpose2d(oracle::Grid::from(y), kt_kernel, bt, st).v));
    } catch (const DimensionError&) {
      // geometry without an exact inverse extent (e.g. odd k > 2 * extent)
    }
  }
  return {"conv oracle", worst <= tolerance, std::to_string(count) + " cases, max abs diff " + fmt(worst)};
}

CheckResult check_conv_adjoint(std::size_t count, double tolerance, std::uint64_t seed) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t stride = 1 + rng.below(2);
    const std::size_t k = stride == 2 && rng.below(2) ? 4 : 1 + 2 * rng.below(3);
    const std::size_t a = 1 + rng.below(4), c = 1 + rng.below(4);
    const std::size_t ho = 1 + rng.below(5), wo = 1 + rng.below(5);
    const std::size_t h = ho * stride, w = wo * stride;
    if (h + 2 * ((k - 1) / 2) < k || w + 2 * ((k - 1) / 2) < k) continue;
    const Tensor x = random_tensor(rng, {h, w, a}, -1.0, 1.0);
    const Tensor y = random_tensor(rng, {ho, wo, c}, -1.0, 1.0);
    const Tensor kern = random_tensor(rng, {k, k, a, c}, -1.0, 1.0);
    // forward of the geometry by the loop oracle (works for even k as well)
    oracle::Grid fx(ho, wo, c);
    const long pad = static_cast<long>((k - 1) / 2);
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox)
        for (std::size_t o = 0; o < c; ++o)
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long iy = static_cast<long>(oy * stride + ky) - pad, ix = static_cast<long>(ox * stride + kx) - pad;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
              for (std::size_t ci = 0; ci < a; ++ci)
                fx.at(oy, ox, o) += x.at({static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), ci}) *
                                    oracle::kernel_at(kern, ky, kx, ci, o);
            }
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < fx.v.size(); ++i) lhs += fx.v[i] * y.values()[i];
    const Tensor ty = conv_transpose2d(y, kern, stride);
    for (std::size_t i = 0; i < ty.size(); ++i) rhs += x.values()[i] * ty.values()[i];
    worst = std::max(worst, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(lhs)));
  }
  return {"conv adjoint", worst <= tolerance, std::to_string(count) + " cases, max rel gap " + fmt(worst)};
}

CheckResult check_magaconv_oracle(std::size_t count, double tolerance, std::uint64_t seed) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  std::size_t cut = 0, total = 0;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t h = 1 + rng.below(8), w = 1 + rng.below(8);
    const std::size_t cin = 1 + rng.below(4), cout = 1 + rng.below(4);
    const std::size_t k = 3 + 2 * rng.below(3), stride = 1 + rng.below(2);
    const double scale = rng.uniform(0.02, 0.6);
    MagaConvHead head;
    head.kernel_size = k;
    head.kernel = random_tensor(rng, {k, k, cin, cout}, -scale, scale);
    head.bias = random_tensor(rng, {cout}, -0.5, 0.5);
    head.epsilon_raw = Tensor::scalar(rng.uniform(-3.0, 3.0));
    const Tensor features = random_tensor(rng, {h, w, cin}, -2.0, 2.0);
    const Tensor mask = random_mask_grid(rng, h, w, rng.uniform());
    const Tensor got = maga_conv(head, features, to_mask(mask), stride);
    const oracle::Grid want = oracle::maga_conv(oracle::Grid::from(features), oracle::Grid::from(mask), head.kernel,
                                                head.bias, head.epsilon_raw.item(), stride);
    worst = std::max(worst, max_abs_diff(got.values(), want.v));
    for (double v : want.v) {
      cut += v == 0.0;
      ++total;
    }
  }
  // whole layers: three heads, concatenation, fuse, ReLU
  for (std::size_t t = 0; t < count / 4; ++t) {
    ParamStore params;
    Initializer init(rng.next(), rng.uniform(-4.0, 1.0));
    const std::size_t h = 1 + rng.below(8), w = 1 + rng.below(8), cin = 1 + rng.below(3);
    MagaConvLayer layer(params, init, "layer", cin, 3 * (1 + rng.below(2)), 1 + rng.below(2));
    const Tensor features = random_tensor(rng, {h, w, cin}, -2.0, 2.0);
    const Tensor mask = random_mask_grid(rng, h, w, rng.uniform());
    const Tensor got = layer.forward(features, to_mask(mask));
    const oracle::Grid want = oracle::maga_layer(layer, oracle::Grid::from(features), oracle::Grid::from(mask));
    worst = std::max(worst, max_abs_diff(got.values(), want.v));
  }
  return {"magaconv oracle", worst <= tolerance,
          std::to_string(count) + " heads + " + std::to_string(count / 4) + " layers, max abs diff " + fmt(worst) +
              ", cut outputs " + std::to_string(cut) + "/" + std::to_string(total)};
}

CheckResult check_cmf_oracle(std::size_t count, double tolerance, std::uint64_t seed) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t c = 1 + rng.below(4), h = 1 + rng.below(6), w = 1 + rng.below(6);
    ParamStore params;
    Initializer init(rng.next());
    const CmfModule m = CmfModule::create(params, init, "cmf", c, 3, 16);
    for (auto& [path, p] : params.mutable_entries()) {
      if (ends_with(path, ".bias")) {
        for (double& v : p.mutable_values()) v = rng.uniform(-0.5, 0.5);
      }
    }
    const Tensor target = random_tensor(rng, {h, w, c}, -1.0, 2.0);
    const Tensor query = random_tensor(rng, {h, w, c}, -1.0, 2.0);
    const Tensor got = cmf_forward(m, target, query);
    const oracle::Grid want = oracle::cmf(m, oracle::Grid::from(target), oracle::Grid::from(query));
    worst = std::max(worst, max_abs_diff(got.values(), want.v));
  }
  auto mlp_count = [](std::size_t c) {
    ParamStore params;
    Initializer init(1);
    CmfModule::create(params, init, "cmf", c, 3, 16);
    std::size_t n = 0;
    for (const auto& info : params.inventory()) n += contains(info.path, ".mlp.") ? info.count : 0;
    return n;
  };
  const std::size_t n1 = mlp_count(1), n4 = mlp_count(4), n96 = mlp_count(96);
  const bool shared = n1 == n4 && n4 == n96;
  return {"cmf oracle", worst <= tolerance && shared,
          std::to_string(count) + " cases, max abs diff " + fmt(worst) + ", mlp params c=1/4/96: " +
              std::to_string(n1) + "/" + std::to_string(n4) + "/" + std::to_string(n96)};
}

CheckResult check_metric_oracle(std::size_t count, double tolerance, std::uint64_t seed) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  std::size_t property_failures = 0;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t h = 1 + rng.below(10), w = 1 + rng.below(10);
    std::vector<double> p(h * w), g(h * w);
    for (std::size_t i = 0; i < p.size(); ++i) {
      g[i] = rng.uniform() < 0.1 ? 0.0 : rng.uniform(0.5, 10.0);
      p[i] = rng.uniform() < 0.05 ? 0.0 : g[i] * rng.uniform(0.6, 1.6);
    }
    g[rng.below(g.size())] = rng.uniform(0.5, 10.0);
    const Tensor pred({h, w, 1}, p), gt({h, w, 1}, g);
    const Tensor mask = random_mask_grid(rng, h, w, 0.2);
    std::vector<double> mv(mask.values().begin(), mask.values().end());
    for (std::size_t i = 0; i < mv.size(); ++i) {
      if (g[i] > 0.0) {
        mv[i] = 0.0;
        break;
      }
    }
    const Tensor m({h, w, 1}, mv);
    const MetricReport got = evaluate(pred, gt, to_mask(m));
    const oracle::Metrics want = oracle::metrics(oracle::Grid::from(pred), oracle::Grid::from(gt), oracle::Grid::from(m));
    worst = std::max({worst, std::fabs(got.rmse - want.rmse), std::fabs(got.rel - want.rel),
                      std::fabs(got.mae - want.mae)});
    for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::fabs(got.delta[i] - want.delta[i]));
    if (got.pixel_count != want.count) ++property_failures;
    if (!(got.rmse >= got.mae)) ++property_failures;
    for (std::size_t i = 0; i + 1 < 4; ++i) property_failures += got.delta[i] > got.delta[i + 1];
    for (double lambda : {0.5, 2.0, 10.0}) {
      const MetricReport s = evaluate(scale(pred, lambda), scale(gt, lambda), to_mask(m));
      if (std::fabs(s.rel - got.rel) > tolerance) ++property_failures;
      for (std::size_t i = 0; i < 4; ++i) property_failures += std::fabs(s.delta[i] - got.delta[i]) > tolerance;
    }
  }
  return {"metric oracle", worst <= tolerance && property_failures == 0,
          std::to_string(count) + " cases, max abs diff " + fmt(worst) + ", property failures " +
              std::to_string(property_failures)};
}

CheckResult check_loss_contract(std::size_t count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::size_t failures = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t h = 3 + rng.below(8), w = 3 + rng.below(8);
    const Tensor gt = random_tensor(rng, {h, w, 1}, 1.0, 10.0);
    const Tensor pred = random_tensor(rng, {h, w, 1}, 1.0, 10.0);
    const LossBreakdown b = completion_loss(pred, gt).values();
    failures += b.total != b.mse + b.sc;
    failures += !(b.mse > 0.0 && b.sc > 0.0);
    const LossBreakdown same = completion_loss(gt, gt).values();
    failures += !(same.mse == 0.0 && same.sc == 0.0 && same.total == 0.0);
    const oracle::Grid pg = oracle::Grid::from(pred), gg = oracle::Grid::from(gt);
    worst = std::max({worst, std::fabs(b.mse - oracle::mse(pg, gg)), std::fabs(b.sc - oracle::sc(pg, gg, true)),
                      std::fabs(sc_loss(pred, gt, LaplacianRegion::interior).item() - oracle::sc(pg, gg, false))});
    std::vector<double> ints(h * w);
    for (double& v : ints) v = static_cast<double>(1 + rng.below(9000));
    const Tensor base({h, w, 1}, ints);
    failures += sc_loss(shift(base, 7.0), base, LaplacianRegion::interior).item() != 0.0;
  }
  return {"loss contract", failures == 0 && worst <= 1e-12,
          std::to_string(count) + " cases, oracle max abs diff " + fmt(worst) + ", failures " + std::to_string(failures)};
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"grads", "masks", "oracles", "all"};
  return names;
}

std::vector<CheckResult> run_suite(const std::string& suite) {
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end()) {
    throw ArgumentError("unknown suite " + suite + " (expected grads, masks, oracles or all)");
  }
  std::vector<CheckResult> out;
  const bool all = suite == "all";
  if (all || suite == "grads") {
    const auto g = check_gradients();
    out.insert(out.end(), g.begin(), g.end());
  }
  if (all || suite == "masks") {
    out.push_back(check_mask_pyramid());
    out.push_back(check_gate_monotonicity());
    out.push_back(check_vanilla_collapse());
  }
  if (all || suite == "oracles") {
    out.push_back(check_rnc_contract());
    out.push_back(check_conv_oracle());
    out.push_back(check_conv_adjoint());
    out.push_back(check_magaconv_oracle());
    out.push_back(check_cmf_oracle());
    out.push_back(check_metric_oracle());
    out.push_back(check_loss_contract());
  }
  return out;
}

void print_results(std::ostream& out, const std::vector<CheckResult>& results) {
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << std::string(width - r.name.size() + 2, ' ') << r.detail << '\n';
  }
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace maga::verify
