#pragma once

#include <span>
#include <vector>

#include "gmcfuse/image.hpp"

namespace gmcfuse {

struct PatchGains {
  double beta1;
  double beta2;
};

/// Per-pixel sensor gains with beta1^2 + beta2^2 = 1 and both >= 0.
struct GainMap {
  Image beta1;
  Image beta2;
};

struct PatchRect {
  int x0;
  int y0;
  int width;
  int height;
};

/// Non-overlapping square tiling; edge patches may be smaller.
class PatchGrid {
 public:
  PatchGrid(int width, int height, int patch_size);

  int cols() const noexcept { return cols_; }
  int rows() const noexcept { return rows_; }
  int patch_size() const noexcept { return patch_size_; }
  PatchRect rect(int col, int row) const;

 private:
  int width_;
  int height_;
  int patch_size_;
  int cols_;
  int rows_;
};

/// Principal eigenvector of the 2x2 covariance of the two zero-meaned patch
/// vectors, componentwise absolute and unit-norm. Near-zero total variance
/// (trace < 1e-12) yields (1/sqrt2, 1/sqrt2).
PatchGains estimate_patch_gains(std::span<const double> p1, std::span<const double> p2);

struct GainOptions {
  int patch_size = 16;
  /// Average gains over the 3x3 neighbourhood in the patch grid, then renormalize.
  bool smooth = false;
};

GainMap build_gain_map(const Image& y1, const Image& y2, const GainOptions& options = {});

}  // namespace gmcfuse
