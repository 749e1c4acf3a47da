#include "maga/scene.hpp"

#include <algorithm>
#include <cmath>

#include "maga/errors.hpp"
#include "maga/rng.hpp"

namespace maga {

namespace {

constexpr std::array<Rgb, 8> kPalette = {{
    {0.85, 0.25, 0.20},
    {0.20, 0.55, 0.85},
    {0.30, 0.75, 0.30},
    {0.90, 0.80, 0.25},
    {0.65, 0.35, 0.75},
    {0.95, 0.55, 0.15},
    {0.25, 0.80, 0.75},
    {0.80, 0.80, 0.80},
}};

constexpr Rgb kBackground = {0.45, 0.45, 0.50};

struct DepthVisitor {
  double u, v;
  double& depth;

  bool operator()(const Plane& p) const {
    if (p.bounded && p.nu * u + p.nv * v < p.offset) return false;
    depth = p.z0 + p.du * u + p.dv * v;
    return true;
  }
  bool operator()(const Sphere& s) const {
    const double du = u - s.cu, dv = v - s.cv;
    const double d2 = (du * du + dv * dv) / (s.radius * s.radius);
    if (d2 >= 1.0) return false;
    depth = s.cz - s.depth_radius * std::sqrt(1.0 - d2);
    return true;
  }
  bool operator()(const Box& b) const {
    if (u < b.u0 || u > b.u1 || v < b.v0 || v > b.v1) return false;
    depth = b.z;
    return true;
  }
};

const Rgb& albedo_of(const Primitive& p) {
  return std::visit([](const auto& x) -> const Rgb& { return x.albedo; }, p);
}

// Random unit vector using only arithmetic and sqrt.
void unit_vector(SplitMix64& rng, double& x, double& y) {
  for (;;) {
    x = rng.uniform(-1.0, 1.0);
    y = rng.uniform(-1.0, 1.0);
    const double n2 = x * x + y * y;
    if (n2 > 0.01 && n2 <= 1.0) {
      const double n = std::sqrt(n2);
      x /= n;
      y /= n;
      return;
    }
  }
}

}  // namespace

bool primitive_depth(const Primitive& p, double u, double v, double& depth) {
  return std::visit(DepthVisitor{u, v, depth}, p);
}

std::vector<Primitive> sample_primitives(const SceneSpec& spec) {
  if (spec.min_primitives > spec.max_primitives) throw ArgumentError("min_primitives exceeds max_primitives");
  SplitMix64 rng(spec.seed);
  const auto count = static_cast<std::size_t>(
      rng.range(static_cast<std::int64_t>(spec.min_primitives), static_cast<std::int64_t>(spec.max_primitives)));
  std::vector<Primitive> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Rgb albedo = kPalette[rng.below(kPalette.size())];
    switch (rng.below(3)) {
      case 0: {
        Plane p;
        p.z0 = rng.uniform(4.0, 9.5);
        p.du = rng.uniform(-1.5, 1.5);
        p.dv = rng.uniform(-1.5, 1.5);
        p.bounded = true;
        unit_vector(rng, p.nu, p.nv);
        p.offset = rng.uniform(-0.5, 0.5);
        p.albedo = albedo;
        out.emplace_back(p);
        break;
      }
      case 1: {
        Sphere s;
        s.cu = rng.uniform(-0.9, 0.9);
        s.cv = rng.uniform(-0.9, 0.9);
        s.radius = rng.uniform(0.15, 0.45);
        s.cz = rng.uniform(2.5, 8.5);
        s.depth_radius = 2.5 * s.radius;
        s.albedo = albedo;
        out.emplace_back(s);
        break;
      }
      default: {
        Box b;
        b.u0 = rng.uniform(-1.0, 0.6);
        b.u1 = b.u0 + rng.uniform(0.2, 0.8);
        b.v0 = rng.uniform(-1.0, 0.6);
        b.v1 = b.v0 + rng.uniform(0.2, 0.8);
        b.z = rng.uniform(1.5, 9.0);
        b.albedo = albedo;
        out.emplace_back(b);
        break;
      }
    }
  }
  return out;
}

RenderedScene render_primitives(const std::vector<Primitive>& primitives, const SceneSpec& spec) {
  const std::size_t h = spec.height, w = spec.width;
  if (h == 0 || w == 0) throw ArgumentError("scene extents must be positive");
  if (!(spec.near_depth > 0.0) || !(spec.far_depth > spec.near_depth)) {
    throw ArgumentError("scene needs 0 < near < far");
  }
  std::vector<double> depth(h * w, spec.far_depth);
  std::vector<double> color(h * w * 3);
  const double span = spec.far_depth - spec.near_depth;
  for (std::size_t y = 0; y < h; ++y) {
    const double v = (2.0 * static_cast<double>(y) + 1.0) / static_cast<double>(h) - 1.0;
    for (std::size_t x = 0; x < w; ++x) {
      const double u = (2.0 * static_cast<double>(x) + 1.0) / static_cast<double>(w) - 1.0;
      double best = spec.far_depth;
      const Rgb* albedo = &kBackground;
      for (const Primitive& p : primitives) {
        double d;
        if (primitive_depth(p, u, v, d)) {
          d = std::clamp(d, spec.near_depth, spec.far_depth);
          if (d < best) {
            best = d;
            albedo = &albedo_of(p);
          }
        }
      }
      const std::size_t i = y * w + x;
      depth[i] = best;
      const double shade = 1.0 - 0.6 * (best - spec.near_depth) / span;
      for (std::size_t c = 0; c < 3; ++c) color[i * 3 + c] = (*albedo)[c] * shade;
    }
  }
  return {Tensor({h, w, 3}, std::move(color)), Tensor({h, w, 1}, std::move(depth))};
}

RenderedScene render_scene(const SceneSpec& spec) {
  if (spec.height % 8 != 0 || spec.width % 8 != 0) {
    throw ArgumentError("scene extents must be divisible by 8");
  }
  return render_primitives(sample_primitives(spec), spec);
}

}  // namespace maga
