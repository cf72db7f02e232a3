#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gmcfuse {

/// Real-valued row-major pixel grid. Nominal intensity range is [0,1] but
/// the container itself only enforces finiteness.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int x, int y) { return data_[index(x, y)]; }
  double operator()(int x, int y) const { return data_[index(x, y)]; }

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Throws ArgumentError if any value is NaN or infinite.
  void check_finite() const;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

struct ColorImage {
  Image r;
  Image g;
  Image b;

  int width() const noexcept { return r.width(); }
  int height() const noexcept { return r.height(); }
  /// Throws DimensionError if the planes disagree in size.
  void check_planes() const;
};

struct YCbCr {
  Image y;
  Image cb;
  Image cr;
};

/// BT.601 full-range conversion. Y in [0,1], Cb/Cr in [-0.5,0.5] for inputs in [0,1].
YCbCr rgb_to_ycbcr(const ColorImage& img);

/// Inverse of rgb_to_ycbcr. With clamp=true (the default) channels are
/// clipped to [0,1].
ColorImage ycbcr_to_rgb(const Image& y, const Image& cb, const Image& cr, bool clamp = true);

/// Whole-sample symmetric extension (edge not repeated): [1,2,3] -> [1,2,3,2,1].
/// Original content stays at the top-left.
Image pad_symmetric(const Image& img, int target_width, int target_height);

/// Top-left crop.
Image crop(const Image& img, int width, int height);

/// Centered crop to (width, height).
Image center_crop(const Image& img, int width, int height);

/// Smallest multiple of 2^levels that is >= n.
int padded_extent(int n, int levels);

void clamp_unit(Image& img);

double dot(const Image& a, const Image& b);
double norm2(const Image& a);

}  // namespace gmcfuse
