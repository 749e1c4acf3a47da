#include "maga/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "maga/errors.hpp"

namespace maga {

std::string MetricReport::to_key_value() const {
  static constexpr const char* kDeltaKeys[] = {"d110", "d125", "d125_2", "d125_3"};
  std::string out;
  char buf[96];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.9g\n", key, v);
    out += buf;
  };
  line("rmse", rmse);
  line("rel", rel);
  line("mae", mae);
  for (std::size_t i = 0; i < delta.size(); ++i) line(kDeltaKeys[i], delta[i]);
  out += "pixels=" + std::to_string(pixel_count) + "\n";
  return out;
}

void MetricAccumulator::add_pixel(double p, double g) {
  const double err = p - g;
  sq_ += err * err;
  abs_ += std::fabs(err);
  rel_ += std::fabs(err) / g;
  const double ratio = p > 0.0 ? std::max(p / g, g / p) : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kDeltaThresholds.size(); ++i) hits_[i] += ratio < kDeltaThresholds[i];
  ++count_;
}

void MetricAccumulator::add(const Tensor& pred, const Tensor& gt) {
  if (pred.shape() != gt.shape()) {
    throw DimensionError("evaluate: prediction " + shape_string(pred.shape()) + " vs ground truth " +
                         shape_string(gt.shape()));
  }
  const auto p = pred.values();
  const auto g = gt.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (g[i] > 0.0) add_pixel(p[i], g[i]);
  }
}

void MetricAccumulator::add(const Tensor& pred, const Tensor& gt, const Mask& valid_gt_mask) {
  if (pred.shape() != gt.shape() || gt.shape() != valid_gt_mask.grid().shape()) {
    throw DimensionError("evaluate: prediction " + shape_string(pred.shape()) + ", ground truth " +
                         shape_string(gt.shape()) + " and mask " + shape_string(valid_gt_mask.grid().shape()) +
                         " must agree");
  }
  const auto p = pred.values();
  const auto g = gt.values();
  const auto m = valid_gt_mask.grid().values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (m[i] == 0.0 && g[i] > 0.0) add_pixel(p[i], g[i]);
  }
}

MetricReport MetricAccumulator::report() const {
  if (count_ == 0) throw EmptyEvaluationError("no valid ground-truth pixels to evaluate");
  const double n = static_cast<double>(count_);
  MetricReport r;
  r.rmse = std::sqrt(sq_ / n);
  r.mae = abs_ / n;
  r.rel = rel_ / n;
  for (std::size_t i = 0; i < hits_.size(); ++i) r.delta[i] = 100.0 * static_cast<double>(hits_[i]) / n;
  r.pixel_count = count_;
  return r;
}

MetricReport evaluate(const Tensor& pred, const Tensor& gt, const Mask& valid_gt_mask) {
  MetricAccumulator acc;
  acc.add(pred, gt, valid_gt_mask);
  return acc.report();
}

MetricReport evaluate(const Tensor& pred, const Tensor& gt) { return evaluate(pred, gt, mask_from_depth(gt)); }

}  // namespace maga
