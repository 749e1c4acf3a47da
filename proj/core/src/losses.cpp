#include "maga/losses.hpp"

#include "maga/errors.hpp"
#include "maga/ops.hpp"

namespace maga {

namespace {

void check_pair(const Tensor& pred, const Tensor& gt, const char* op) {
  if (pred.shape() != gt.shape()) {
    throw DimensionError(std::string(op) + ": prediction " + shape_string(pred.shape()) + " vs ground truth " +
                         shape_string(gt.shape()));
  }
}

const Tensor& laplacian_kernel() {
  static const Tensor k({3, 3, 1, 1}, {0, 1, 0, 1, -4, 1, 0, 1, 0});
  return k;
}

}  // namespace

Tensor mse_loss(const Tensor& pred, const Tensor& gt) {
  check_pair(pred, gt, "mse_loss");
  Tensor d = sub(pred, gt);
  return mean(mul(d, d));
}

Tensor laplacian(const Tensor& x, LaplacianRegion region) {
  if (x.rank() != 3 || x.dim(2) != 1) throw DimensionError("laplacian: expected h x w x 1");
  return conv2d(x, laplacian_kernel(), {}, 1, region == LaplacianRegion::full ? Padding::same : Padding::valid);
}

Tensor sc_loss(const Tensor& pred, const Tensor& gt, LaplacianRegion region) {
  check_pair(pred, gt, "sc_loss");
  if (pred.rank() != 3 || pred.dim(0) < 3 || pred.dim(1) < 3) {
    throw DimensionError("sc_loss: needs an h x w x 1 map with h, w >= 3");
  }
  Tensor d = sub(laplacian(pred, region), laplacian(gt, region));
  return mean(mul(d, d));
}

LossBreakdown LossTerms::values() const { return {mse.item(), sc.item(), total.item()}; }

LossTerms completion_loss(const Tensor& pred, const Tensor& gt) {
  LossTerms t;
  t.mse = mse_loss(pred, gt);
  t.sc = sc_loss(pred, gt);
  t.total = add(t.mse, t.sc);
  return t;
}

}  // namespace maga
