#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "maga/tensor.hpp"

namespace maga {

using Rgb = std::array<double, 3>;

// Primitives live in normalised image coordinates u, v in (-1, 1), with
// u = (2x + 1) / width - 1 and likewise v; depth is along the orthographic
// viewing axis in metres.

/// Tilted plane z = z0 + du * u + dv * v, optionally restricted to the
/// half-plane nu * u + nv * v >= offset.
struct Plane {
  double z0 = 5.0, du = 0.0, dv = 0.0;
  bool bounded = false;
  double nu = 0.0, nv = 0.0, offset = 0.0;
  Rgb albedo{0.5, 0.5, 0.5};
};

/// Front hemisphere of an ellipsoid: disc of radius `radius` (uv units)
/// centred at (cu, cv) with depth cz - depth_radius * sqrt(1 - d^2 / r^2).
struct Sphere {
  double cu = 0.0, cv = 0.0, radius = 0.3;
  double cz = 5.0, depth_radius = 0.75;
  Rgb albedo{0.5, 0.5, 0.5};
};

/// Fronto-parallel box face covering [u0, u1] x [v0, v1] at depth z.
struct Box {
  double u0 = -0.5, u1 = 0.5, v0 = -0.5, v1 = 0.5;
  double z = 5.0;
  Rgb albedo{0.5, 0.5, 0.5};
};

using Primitive = std::variant<Plane, Sphere, Box>;

struct SceneSpec {
  std::uint64_t seed = 0;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t min_primitives = 3;
  std::size_t max_primitives = 8;
  double near_depth = 1.0;
  double far_depth = 10.0;
};

struct RenderedScene {
  Tensor color;     // h x w x 3 in [0, 1]
  Tensor depth_gt;  // h x w x 1 in [near, far]
};

/// Analytic depth of `p` at (u, v), if the primitive covers that point.
bool primitive_depth(const Primitive& p, double u, double v, double& depth);

/// Seeded primitive list for `spec` (3 to 8 planes, spheres and boxes).
std::vector<Primitive> sample_primitives(const SceneSpec& spec);

/// Z-buffer composition under orthographic projection. Uncovered pixels take
/// the far depth; depths are clamped to [near, far]. Colour is the albedo of
/// the nearest surface attenuated linearly with depth.
RenderedScene render_primitives(const std::vector<Primitive>& primitives, const SceneSpec& spec);

/// render_primitives(sample_primitives(spec), spec). Extents must be
/// divisible by 8.
RenderedScene render_scene(const SceneSpec& spec);

}  // namespace maga
