#pragma once

#include <array>
#include <cstddef>

#include "maga/tensor.hpp"

namespace maga {

/// Binary validity map, h x w x 1. A value of 1 marks a missing depth pixel,
/// 0 a valid one. Never participates in gradients.
class Mask {
 public:
  Mask() = default;

  /// Wraps `grid` after checking it is h x w x 1 and strictly {0, 1}.
  static Mask from_grid(const Tensor& grid);
  static Mask filled(std::size_t h, std::size_t w, bool invalid);

  const Tensor& grid() const { return grid_; }
  std::size_t height() const { return grid_.dim(0); }
  std::size_t width() const { return grid_.dim(1); }
  bool invalid(std::size_t y, std::size_t x) const;
  std::size_t invalid_count() const;
  bool fully_valid() const { return invalid_count() == 0; }

 private:
  explicit Mask(Tensor grid) : grid_(std::move(grid)) {}
  Tensor grid_;
};

/// 1 where depth <= 0, else 0.
Mask mask_from_depth(const Tensor& depth);

/// 3x3 stride-1 min-pool with out-of-image taps treated as invalid: a pixel
/// becomes valid iff its 3x3 neighbourhood holds a valid pixel.
Mask update_within_block(const Mask& mask);

/// 2x2 stride-2 min-pool; halves the extent (ceil).
Mask update_across_block(const Mask& mask);

/// Masks M(b, l) for encoder block b and layer l, both 1-based.
///
/// Each entry has the input extent of MagaConv-Layer (b, l). After a layer,
/// the next mask comes from a min-pool whose stride matches that layer's
/// stride: the stride-2 first layer of each block is followed by
/// update_across_block, the stride-1 layers by update_within_block.
class MaskPyramid {
 public:
  static constexpr int kBlocks = 3;
  static constexpr int kLayers = 3;

  static MaskPyramid build(const Mask& initial);

  const Mask& at(int block, int layer) const;

 private:
  std::array<Mask, kBlocks * kLayers> masks_;
};

}  // namespace maga
