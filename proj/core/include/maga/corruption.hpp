#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

#include "maga/tensor.hpp"

namespace maga {

/// Parameters of the raw-sensor hole model.
struct RawCorruptionParams {
  double edge_threshold = 0.3;  // metres between 4-neighbours
  std::size_t edge_band = 2;    // pixels
  std::size_t min_blobs = 2;
  std::size_t max_blobs = 5;
  double min_coverage = 0.05;  // target blob area as a fraction of the image
  double max_coverage = 0.20;
};

/// Raw-style corruption of a dense depth map (h x w x 1).
///
/// Edge shadows: for every 4-neighbour pair whose depths differ by more than
/// `edge_threshold`, the farther pixel is marked and every pixel within
/// Chebyshev distance `edge_band - 1` of a marked pixel is zeroed.
/// Irregular holes: `min_blobs`..`max_blobs` random ellipses whose total area
/// is drawn uniformly from [min_coverage, max_coverage] of the image.
Tensor corrupt_raw(const Tensor& depth_gt, std::uint64_t seed, const RawCorruptionParams& params = {});

/// Keeps exactly `count` pixels sampled uniformly without replacement among
/// those with 0 < depth < depth_cap; zeroes the rest. Throws ArgumentError if
/// fewer than `count` pixels qualify.
Tensor corrupt_sparse(const Tensor& depth_gt, std::size_t count, std::uint64_t seed,
                      double depth_cap = std::numeric_limits<double>::infinity());

/// Fraction of pixels equal to zero.
double missing_fraction(const Tensor& depth);

}  // namespace maga
