#include "maga/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "maga/errors.hpp"
#include "maga/rng.hpp"

namespace maga {

namespace {

void check_depth(const Tensor& depth) {
  if (depth.rank() != 3 || depth.dim(2) != 1) {
    throw DimensionError("depth must be h x w x 1, got " + shape_string(depth.shape()));
  }
}

std::vector<char> edge_shadow(const Tensor& depth, const RawCorruptionParams& p) {
  const std::size_t h = depth.dim(0), w = depth.dim(1);
  const auto d = depth.values();
  std::vector<char> far(h * w, 0);
  auto visit = [&](std::size_t a, std::size_t b) {
    if (std::abs(d[a] - d[b]) > p.edge_threshold) far[d[a] > d[b] ? a : b] = 1;
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (x + 1 < w) visit(y * w + x, y * w + x + 1);
      if (y + 1 < h) visit(y * w + x, (y + 1) * w + x);
    }
  }
  if (p.edge_band <= 1) return far;
  const auto r = static_cast<std::ptrdiff_t>(p.edge_band - 1);
  std::vector<char> band(h * w, 0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!far[y * w + x]) continue;
      for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
        for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
          const auto yy = static_cast<std::ptrdiff_t>(y) + dy, xx = static_cast<std::ptrdiff_t>(x) + dx;
          if (yy < 0 || xx < 0 || yy >= static_cast<std::ptrdiff_t>(h) || xx >= static_cast<std::ptrdiff_t>(w)) continue;
          band[static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx)] = 1;
        }
      }
    }
  }
  return band;
}

void add_blobs(std::vector<char>& holes, std::size_t h, std::size_t w, std::uint64_t seed,
               const RawCorruptionParams& p) {
  SplitMix64 rng(seed);
  const auto n = static_cast<std::size_t>(
      rng.range(static_cast<std::int64_t>(p.min_blobs), static_cast<std::int64_t>(p.max_blobs)));
  if (n == 0) return;
  const double coverage = rng.uniform(p.min_coverage, p.max_coverage);
  const double area = coverage * static_cast<double>(h * w) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double aspect = rng.uniform(0.5, 2.0);
    const double a = std::sqrt(area * aspect / std::numbers::pi);
    const double b = std::sqrt(area / (aspect * std::numbers::pi));
    const double reach = std::max(a, b);
    auto centre = [&](std::size_t extent) {
      const double lo = std::min(reach, 0.5 * static_cast<double>(extent));
      return rng.uniform(lo, static_cast<double>(extent) - lo);
    };
    const double cx = centre(w), cy = centre(h);
    double ex, ey;
    for (;;) {
      ex = rng.uniform(-1.0, 1.0);
      ey = rng.uniform(-1.0, 1.0);
      const double n2 = ex * ex + ey * ey;
      if (n2 > 0.01 && n2 <= 1.0) {
        const double norm = std::sqrt(n2);
        ex /= norm;
        ey /= norm;
        break;
      }
    }
    for (std::size_t y = 0; y < h; ++y) {
      const double py = static_cast<double>(y) + 0.5 - cy;
      for (std::size_t x = 0; x < w; ++x) {
        const double px = static_cast<double>(x) + 0.5 - cx;
        const double s = (px * ex + py * ey) / a;
        const double t = (-px * ey + py * ex) / b;
        if (s * s + t * t <= 1.0) holes[y * w + x] = 1;
      }
    }
  }
}

}  // namespace

Tensor corrupt_raw(const Tensor& depth_gt, std::uint64_t seed, const RawCorruptionParams& params) {
  check_depth(depth_gt);
  if (params.min_blobs > params.max_blobs || params.min_coverage > params.max_coverage) {
    throw ArgumentError("invalid raw corruption ranges");
  }
  const std::size_t h = depth_gt.dim(0), w = depth_gt.dim(1);
  std::vector<char> holes = edge_shadow(depth_gt, params);
  add_blobs(holes, h, w, seed, params);
  std::vector<double> out(depth_gt.values().begin(), depth_gt.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (holes[i]) out[i] = 0.0;
  }
  return Tensor(depth_gt.shape(), std::move(out));
}

Tensor corrupt_sparse(const Tensor& depth_gt, std::size_t count, std::uint64_t seed, double depth_cap) {
  check_depth(depth_gt);
  const auto d = depth_gt.values();
  std::vector<std::size_t> candidates;
  candidates.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0 && d[i] < depth_cap) candidates.push_back(i);
  }
  if (count > candidates.size()) {
    throw ArgumentError("sparse count " + std::to_string(count) + " exceeds the " +
                        std::to_string(candidates.size()) + " eligible pixels");
  }
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  std::vector<double> out(d.size(), 0.0);
  for (std::size_t i = 0; i < count; ++i) out[candidates[i]] = d[candidates[i]];
  return Tensor(depth_gt.shape(), std::move(out));
}

double missing_fraction(const Tensor& depth) {
  std::size_t zeros = 0;
  for (double v : depth.values()) zeros += v == 0.0;
  return static_cast<double>(zeros) / static_cast<double>(depth.size());
}

}  // namespace maga
