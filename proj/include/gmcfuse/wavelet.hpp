#pragma once

#include <span>
#include <vector>

#include "gmcfuse/image.hpp"

namespace gmcfuse {

enum class Band { LL, HL, LH, HH };

/// Multilevel orthonormal Haar coefficients stored in the usual Mallat
/// layout over the padded grid: the level-l detail bands occupy the three
/// off-diagonal quadrants of the (W/2^(l-1)) x (H/2^(l-1)) top-left block and
/// the coarsest LL band sits in the top-left corner. HL holds horizontal
/// high-pass (vertical edges), LH vertical high-pass.
///
/// levels == 0 is accepted and means the identity transform.
class WaveletPyramid {
 public:
  WaveletPyramid() = default;
  WaveletPyramid(int levels, int padded_width, int padded_height, int original_width,
                 int original_height, std::vector<double> coefficients);

  /// All-zero pyramid with the given structure.
  static WaveletPyramid zeros(int levels, int padded_width, int padded_height,
                              int original_width, int original_height);
  static WaveletPyramid zeros_like(const WaveletPyramid& other);

  int levels() const noexcept { return levels_; }
  int padded_width() const noexcept { return padded_width_; }
  int padded_height() const noexcept { return padded_height_; }
  int original_width() const noexcept { return original_width_; }
  int original_height() const noexcept { return original_height_; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  std::span<double> coefficients() noexcept { return coeffs_; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }

  /// Copy of one band. level in [1, levels]; Band::LL only valid at level == levels.
  Image band(int level, Band which) const;
  Image top_approx() const { return band(levels_, Band::LL); }

  bool same_structure(const WaveletPyramid& other) const noexcept;

  /// Throws StructureError unless the padded dims are divisible by 2^levels,
  /// the buffer matches, and the original size fits inside the padded grid.
  void validate() const;

 private:
  int levels_ = 0;
  int padded_width_ = 0;
  int padded_height_ = 0;
  int original_width_ = 0;
  int original_height_ = 0;
  std::vector<double> coeffs_;
};

/// Throws ArgumentError unless 0 <= levels and 2^(levels-1) < min(width, height).
void check_levels(int width, int height, int levels);

/// min(4, floor(log2(min(w,h))) - 2), at least 1.
int default_levels(int width, int height);

/// Symmetric-pads img to multiples of 2^levels, then runs the orthonormal
/// Haar analysis. For images whose dimensions are already divisible this is
/// exactly W^T.
WaveletPyramid dwt2_forward(const Image& img, int levels);

/// Haar synthesis followed by a crop to the recorded original size.
Image dwt2_inverse(const WaveletPyramid& pyr);

/// Analysis on an image whose dimensions are divisible by 2^levels; no
/// padding. Throws StructureError otherwise.
WaveletPyramid haar_analyze(const Image& img, int levels);

/// Synthesis onto the full padded grid (no crop).
Image haar_synthesize(const WaveletPyramid& pyr);

double dot(const WaveletPyramid& a, const WaveletPyramid& b);
double norm2(const WaveletPyramid& a);

}  // namespace gmcfuse
