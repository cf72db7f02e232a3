#include "gmcfuse/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "boundary.hpp"
#include "gmcfuse/errors.hpp"

namespace gmcfuse {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw ArgumentError("image dimensions must be positive, got " + std::to_string(width) +
                        "x" + std::to_string(height));
  }
}

void require_same(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": plane sizes differ (" +
                         std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                         std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
  }
}

// BT.601 luma weights.
constexpr double kr = 0.299;
constexpr double kg = 0.587;
constexpr double kb = 0.114;

}  // namespace

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DimensionError("pixel buffer length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  check_finite();
}

void Image::check_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) throw ArgumentError("image contains non-finite values");
  }
}

void ColorImage::check_planes() const {
  require_same(r, g, "color image");
  require_same(r, b, "color image");
}

YCbCr rgb_to_ycbcr(const ColorImage& img) {
  img.check_planes();
  YCbCr out{Image(img.width(), img.height()), Image(img.width(), img.height()),
            Image(img.width(), img.height())};
  const auto r = img.r.pixels();
  const auto g = img.g.pixels();
  const auto b = img.b.pixels();
  auto y = out.y.pixels();
  auto cb = out.cb.pixels();
  auto cr = out.cr.pixels();
  for (std::size_t i = 0; i < r.size(); ++i) {
    y[i] = kr * r[i] + kg * g[i] + kb * b[i];
    cb[i] = (b[i] - y[i]) / (2.0 * (1.0 - kb));
    cr[i] = (r[i] - y[i]) / (2.0 * (1.0 - kr));
  }
  return out;
}

ColorImage ycbcr_to_rgb(const Image& y, const Image& cb, const Image& cr, bool clamp) {
  require_same(y, cb, "ycbcr_to_rgb");
  require_same(y, cr, "ycbcr_to_rgb");
  ColorImage out{Image(y.width(), y.height()), Image(y.width(), y.height()),
                 Image(y.width(), y.height())};
  const auto yy = y.pixels();
  const auto cbb = cb.pixels();
  const auto crr = cr.pixels();
  auto r = out.r.pixels();
  auto g = out.g.pixels();
  auto b = out.b.pixels();
  for (std::size_t i = 0; i < yy.size(); ++i) {
    r[i] = yy[i] + 2.0 * (1.0 - kr) * crr[i];
    b[i] = yy[i] + 2.0 * (1.0 - kb) * cbb[i];
    g[i] = (yy[i] - kr * r[i] - kb * b[i]) / kg;
  }
  if (clamp) {
    clamp_unit(out.r);
    clamp_unit(out.g);
    clamp_unit(out.b);
  }
  return out;
}

Image pad_symmetric(const Image& img, int target_width, int target_height) {
  if (target_width < img.width() || target_height < img.height()) {
    throw ArgumentError("pad_symmetric: target " + std::to_string(target_width) + "x" +
                        std::to_string(target_height) + " is smaller than source " +
                        std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  if (target_width == img.width() && target_height == img.height()) return img;
  Image out(target_width, target_height);
  for (int y = 0; y < target_height; ++y) {
    const int sy = detail::reflect_whole(y, img.height());
    for (int x = 0; x < target_width; ++x) {
      out(x, y) = img(detail::reflect_whole(x, img.width()), sy);
    }
  }
  return out;
}

Image crop(const Image& img, int width, int height) {
  if (width > img.width() || height > img.height()) {
    throw ArgumentError("crop: requested region exceeds image");
  }
  if (width == img.width() && height == img.height()) return img;
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    std::copy_n(img.pixels().begin() + static_cast<std::ptrdiff_t>(y) * img.width(), width,
                out.pixels().begin() + static_cast<std::ptrdiff_t>(y) * width);
  }
  return out;
}

Image center_crop(const Image& img, int width, int height) {
  if (width > img.width() || height > img.height()) {
    throw ArgumentError("center_crop: requested region exceeds image");
  }
  const int ox = (img.width() - width) / 2;
  const int oy = (img.height() - height) / 2;
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out(x, y) = img(x + ox, y + oy);
  }
  return out;
}

int padded_extent(int n, int levels) {
  const int block = 1 << levels;
  return (n + block - 1) / block * block;
}

void clamp_unit(Image& img) {
  for (double& v : img.pixels()) v = std::clamp(v, 0.0, 1.0);
}

double dot(const Image& a, const Image& b) {
  require_same(a, b, "dot");
  double s = 0.0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) s += pa[i] * pb[i];
  return s;
}

double norm2(const Image& a) { return std::sqrt(dot(a, a)); }

}  // namespace gmcfuse
