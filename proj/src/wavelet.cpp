#include "gmcfuse/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmcfuse/errors.hpp"

namespace gmcfuse {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::string dims(int w, int h) { return std::to_string(w) + "x" + std::to_string(h); }

// One analysis level on the top-left (w x h) block of a row-major grid with
// the given stride. tmp must hold max(w, h) values.
void analyze_level(std::vector<double>& c, int stride, int w, int h, std::vector<double>& tmp) {
  const int hw = w / 2;
  const int hh = h / 2;
  for (int y = 0; y < h; ++y) {
    double* row = c.data() + static_cast<std::ptrdiff_t>(y) * stride;
    for (int i = 0; i < hw; ++i) {
      const double a = row[2 * i];
      const double b = row[2 * i + 1];
      tmp[i] = (a + b) * kInvSqrt2;
      tmp[hw + i] = (a - b) * kInvSqrt2;
    }
    std::copy_n(tmp.begin(), w, row);
  }
  for (int x = 0; x < w; ++x) {
    for (int i = 0; i < hh; ++i) {
      const double a = c[static_cast<std::size_t>(2 * i) * stride + x];
      const double b = c[static_cast<std::size_t>(2 * i + 1) * stride + x];
      tmp[i] = (a + b) * kInvSqrt2;
      tmp[hh + i] = (a - b) * kInvSqrt2;
    }
    for (int i = 0; i < h; ++i) c[static_cast<std::size_t>(i) * stride + x] = tmp[i];
  }
}

void synthesize_level(std::vector<double>& c, int stride, int w, int h, std::vector<double>& tmp) {
  const int hw = w / 2;
  const int hh = h / 2;
  for (int x = 0; x < w; ++x) {
    for (int i = 0; i < hh; ++i) {
      const double s = c[static_cast<std::size_t>(i) * stride + x];
      const double d = c[static_cast<std::size_t>(hh + i) * stride + x];
      tmp[2 * i] = (s + d) * kInvSqrt2;
      tmp[2 * i + 1] = (s - d) * kInvSqrt2;
    }
    for (int i = 0; i < h; ++i) c[static_cast<std::size_t>(i) * stride + x] = tmp[i];
  }
  for (int y = 0; y < h; ++y) {
    double* row = c.data() + static_cast<std::ptrdiff_t>(y) * stride;
    for (int i = 0; i < hw; ++i) {
      const double s = row[i];
      const double d = row[hw + i];
      tmp[2 * i] = (s + d) * kInvSqrt2;
      tmp[2 * i + 1] = (s - d) * kInvSqrt2;
    }
    std::copy_n(tmp.begin(), w, row);
  }
}

}  // namespace

WaveletPyramid::WaveletPyramid(int levels, int padded_width, int padded_height,
                               int original_width, int original_height,
                               std::vector<double> coefficients)
    : levels_(levels),
      padded_width_(padded_width),
      padded_height_(padded_height),
      original_width_(original_width),
      original_height_(original_height),
      coeffs_(std::move(coefficients)) {
  validate();
}

WaveletPyramid WaveletPyramid::zeros(int levels, int padded_width, int padded_height,
                                     int original_width, int original_height) {
  if (padded_width <= 0 || padded_height <= 0) throw StructureError("pyramid dimensions must be positive");
  return WaveletPyramid(levels, padded_width, padded_height, original_width, original_height,
                        std::vector<double>(static_cast<std::size_t>(padded_width) * padded_height, 0.0));
}

WaveletPyramid WaveletPyramid::zeros_like(const WaveletPyramid& other) {
  return zeros(other.levels_, other.padded_width_, other.padded_height_, other.original_width_,
               other.original_height_);
}

void WaveletPyramid::validate() const {
  if (levels_ < 0 || levels_ > 30) throw StructureError("invalid level count " + std::to_string(levels_));
  const int block = 1 << levels_;
  if (padded_width_ <= 0 || padded_height_ <= 0 || padded_width_ % block != 0 ||
      padded_height_ % block != 0) {
    throw StructureError("padded grid " + dims(padded_width_, padded_height_) +
                         " is not divisible by 2^" + std::to_string(levels_));
  }
  if (coeffs_.size() != static_cast<std::size_t>(padded_width_) * padded_height_) {
    throw StructureError("coefficient count " + std::to_string(coeffs_.size()) +
                         " does not match grid " + dims(padded_width_, padded_height_));
  }
  if (original_width_ <= 0 || original_height_ <= 0 || original_width_ > padded_width_ ||
      original_height_ > padded_height_) {
    throw StructureError("original size " + dims(original_width_, original_height_) +
                         " does not fit padded grid " + dims(padded_width_, padded_height_));
  }
}

bool WaveletPyramid::same_structure(const WaveletPyramid& other) const noexcept {
  return levels_ == other.levels_ && padded_width_ == other.padded_width_ &&
         padded_height_ == other.padded_height_ && original_width_ == other.original_width_ &&
         original_height_ == other.original_height_;
}

Image WaveletPyramid::band(int level, Band which) const {
  if (level < 1 || level > levels_) throw ArgumentError("band level out of range");
  if (which == Band::LL && level != levels_) throw ArgumentError("LL band exists only at the top level");
  const int bw = padded_width_ >> level;
  const int bh = padded_height_ >> level;
  int x0 = 0;
  int y0 = 0;
  switch (which) {
    case Band::LL: break;
    case Band::HL: x0 = bw; break;
    case Band::LH: y0 = bh; break;
    case Band::HH: x0 = bw; y0 = bh; break;
  }
  Image out(bw, bh);
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      out(x, y) = coeffs_[static_cast<std::size_t>(y0 + y) * padded_width_ + (x0 + x)];
    }
  }
  return out;
}

void check_levels(int width, int height, int levels) {
  if (levels < 0) throw ArgumentError("levels must be >= 0");
  if (levels == 0) return;
  if (levels > 30 || (1LL << (levels - 1)) >= std::min(width, height)) {
    throw ArgumentError(std::to_string(levels) + " decomposition levels are too many for a " +
                        dims(width, height) + " image");
  }
}

int default_levels(int width, int height) {
  const int m = std::min(width, height);
  int lg = 0;
  while ((2 << lg) <= m) ++lg;
  return std::max(1, std::min(4, lg - 2));
}

WaveletPyramid haar_analyze(const Image& img, int levels) {
  if (levels < 0) throw ArgumentError("levels must be >= 0");
  const int block = 1 << levels;
  if (img.width() % block != 0 || img.height() % block != 0) {
    throw StructureError("image " + dims(img.width(), img.height()) + " is not divisible by 2^" +
                         std::to_string(levels));
  }
  std::vector<double> c(img.data());
  std::vector<double> tmp(static_cast<std::size_t>(std::max(img.width(), img.height())));
  int w = img.width();
  int h = img.height();
  for (int l = 0; l < levels; ++l) {
    analyze_level(c, img.width(), w, h, tmp);
    w /= 2;
    h /= 2;
  }
  return WaveletPyramid(levels, img.width(), img.height(), img.width(), img.height(), std::move(c));
}

Image haar_synthesize(const WaveletPyramid& pyr) {
  pyr.validate();
  std::vector<double> c(pyr.coefficients().begin(), pyr.coefficients().end());
  std::vector<double> tmp(static_cast<std::size_t>(std::max(pyr.padded_width(), pyr.padded_height())));
  for (int l = pyr.levels(); l >= 1; --l) {
    synthesize_level(c, pyr.padded_width(), pyr.padded_width() >> (l - 1),
                     pyr.padded_height() >> (l - 1), tmp);
  }
  return Image(pyr.padded_width(), pyr.padded_height(), std::move(c));
}

WaveletPyramid dwt2_forward(const Image& img, int levels) {
  check_levels(img.width(), img.height(), levels);
  const int pw = padded_extent(img.width(), levels);
  const int ph = padded_extent(img.height(), levels);
  WaveletPyramid p = haar_analyze(pad_symmetric(img, pw, ph), levels);
  return WaveletPyramid(levels, pw, ph, img.width(), img.height(),
                        std::vector<double>(p.coefficients().begin(), p.coefficients().end()));
}

Image dwt2_inverse(const WaveletPyramid& pyr) {
  return crop(haar_synthesize(pyr), pyr.original_width(), pyr.original_height());
}

double dot(const WaveletPyramid& a, const WaveletPyramid& b) {
  if (a.size() != b.size()) throw DimensionError("dot: pyramid sizes differ");
  double s = 0.0;
  const auto ca = a.coefficients();
  const auto cb = b.coefficients();
  for (std::size_t i = 0; i < ca.size(); ++i) s += ca[i] * cb[i];
  return s;
}

double norm2(const WaveletPyramid& a) { return std::sqrt(dot(a, a)); }

}  // namespace gmcfuse
