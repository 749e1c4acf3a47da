#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "maga/mask.hpp"
#include "maga/tensor.hpp"

namespace maga {

inline constexpr std::array<double, 4> kDeltaThresholds = {1.10, 1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};

struct MetricReport {
  double rmse = 0.0;  // metres
  double rel = 0.0;   // mean |p - g| / g
  double mae = 0.0;   // metres
  std::array<double, 4> delta{};  // percent of pixels with max(p/g, g/p) < t
  std::size_t pixel_count = 0;

  /// "key=value" lines in fixed order: rmse, rel, mae, d110, d125, d125_2,
  /// d125_3, pixels.
  std::string to_key_value() const;
};

/// Pools pixels across any number of images. A pixel counts when its
/// ground truth is positive and the validity mask (if given) marks it valid.
class MetricAccumulator {
 public:
  void add(const Tensor& pred, const Tensor& gt);
  void add(const Tensor& pred, const Tensor& gt, const Mask& valid_gt_mask);

  std::size_t pixel_count() const { return count_; }
  /// Throws EmptyEvaluationError when no pixel was accumulated.
  MetricReport report() const;

 private:
  void add_pixel(double p, double g);

  double sq_ = 0.0;
  double abs_ = 0.0;
  double rel_ = 0.0;
  std::array<std::size_t, 4> hits_{};
  std::size_t count_ = 0;
};

MetricReport evaluate(const Tensor& pred, const Tensor& gt, const Mask& valid_gt_mask);
/// Uses mask_from_depth(gt).
MetricReport evaluate(const Tensor& pred, const Tensor& gt);

}  // namespace maga
