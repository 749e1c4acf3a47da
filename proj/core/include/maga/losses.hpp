#pragma once

#include "maga/tensor.hpp"

namespace maga {

/// Mean squared difference over all pixels.
Tensor mse_loss(const Tensor& pred, const Tensor& gt);

enum class LaplacianRegion {
  full,      // same-size Laplacian map with zero padding
  interior,  // only positions whose 3x3 stencil lies inside the image
};

/// 3x3 discrete Laplacian [[0,1,0],[1,-4,1],[0,1,0]] applied to an h x w x 1 map.
Tensor laplacian(const Tensor& x, LaplacianRegion region = LaplacianRegion::full);

/// Structure-consistency loss: mean squared difference of the Laplacians of
/// prediction and ground truth. Extents must be at least 3.
Tensor sc_loss(const Tensor& pred, const Tensor& gt, LaplacianRegion region = LaplacianRegion::full);

struct LossBreakdown {
  double mse = 0.0;
  double sc = 0.0;
  double total = 0.0;  // mse + sc
};

struct LossTerms {
  Tensor mse;
  Tensor sc;
  Tensor total;

  LossBreakdown values() const;
};

/// mse + sc with unit weights.
LossTerms completion_loss(const Tensor& pred, const Tensor& gt);

}  // namespace maga
