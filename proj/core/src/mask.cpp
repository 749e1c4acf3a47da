#include "maga/mask.hpp"

#include <string>

#include "maga/errors.hpp"
#include "maga/ops.hpp"

namespace maga {

Mask Mask::from_grid(const Tensor& grid) {
  if (grid.rank() != 3 || grid.dim(2) != 1) {
    throw DimensionError("mask grid must be h x w x 1, got " + shape_string(grid.shape()));
  }
  if (grid.requires_grad()) throw ContractError("mask grids cannot require grad");
  for (double v : grid.values()) {
    if (v != 0.0 && v != 1.0) throw ContractError("mask values must be exactly 0 or 1");
  }
  return Mask(grid);
}

Mask Mask::filled(std::size_t h, std::size_t w, bool invalid) {
  return Mask(Tensor({h, w, 1}, invalid ? 1.0 : 0.0));
}

bool Mask::invalid(std::size_t y, std::size_t x) const { return grid_.at({y, x, 0}) != 0.0; }

std::size_t Mask::invalid_count() const {
  std::size_t n = 0;
  for (double v : grid_.values()) n += v != 0.0;
  return n;
}

Mask mask_from_depth(const Tensor& depth) {
  if (depth.rank() != 3 || depth.dim(2) != 1) {
    throw DimensionError("depth must be h x w x 1, got " + shape_string(depth.shape()));
  }
  std::vector<double> m(depth.size());
  const auto d = depth.values();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = d[i] <= 0.0 ? 1.0 : 0.0;
  return Mask::from_grid(Tensor(depth.shape(), std::move(m)));
}

Mask update_within_block(const Mask& mask) { return Mask::from_grid(min_pool2d(mask.grid(), 3, 1)); }

Mask update_across_block(const Mask& mask) { return Mask::from_grid(min_pool2d(mask.grid(), 2, 2)); }

MaskPyramid MaskPyramid::build(const Mask& initial) {
  MaskPyramid p;
  Mask current = initial;
  for (int b = 0; b < kBlocks; ++b) {
    p.masks_[b * kLayers + 0] = current;
    p.masks_[b * kLayers + 1] = update_across_block(p.masks_[b * kLayers + 0]);
    p.masks_[b * kLayers + 2] = update_within_block(p.masks_[b * kLayers + 1]);
    if (b + 1 < kBlocks) current = update_within_block(p.masks_[b * kLayers + 2]);
  }
  return p;
}

const Mask& MaskPyramid::at(int block, int layer) const {
  if (block < 1 || block > kBlocks || layer < 1 || layer > kLayers) {
    throw ArgumentError("mask pyramid index (" + std::to_string(block) + ", " + std::to_string(layer) +
                        ") out of range");
  }
  return masks_[(block - 1) * kLayers + (layer - 1)];
}

}  // namespace maga
