#include "gmcfuse/sensor_gain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmcfuse/errors.hpp"

namespace gmcfuse {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kDegenerateTrace = 1e-12;

PatchGains normalized(double a, double b) {
  a = std::abs(a);
  b = std::abs(b);
  const double n = std::hypot(a, b);
  if (n == 0.0) return {kInvSqrt2, kInvSqrt2};
  return {a / n, b / n};
}

}  // namespace

PatchGrid::PatchGrid(int width, int height, int patch_size)
    : width_(width), height_(height), patch_size_(patch_size) {
  if (patch_size < 2) throw ArgumentError("patch size must be >= 2");
  if (width <= 0 || height <= 0) throw ArgumentError("patch grid needs a non-empty image");
  cols_ = (width + patch_size - 1) / patch_size;
  rows_ = (height + patch_size - 1) / patch_size;
}

PatchRect PatchGrid::rect(int col, int row) const {
  const int x0 = col * patch_size_;
  const int y0 = row * patch_size_;
  return {x0, y0, std::min(patch_size_, width_ - x0), std::min(patch_size_, height_ - y0)};
}

PatchGains estimate_patch_gains(std::span<const double> p1, std::span<const double> p2) {
  if (p1.size() != p2.size()) {
    throw ArgumentError("patch vectors differ in length (" + std::to_string(p1.size()) + " vs " +
                        std::to_string(p2.size()) + ")");
  }
  if (p1.size() < 2) throw ArgumentError("patch vectors need at least two samples");

  const double n = static_cast<double>(p1.size());
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    m1 += p1[i];
    m2 += p2[i];
  }
  m1 /= n;
  m2 /= n;
  double c11 = 0.0;
  double c22 = 0.0;
  double c12 = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    const double a = p1[i] - m1;
    const double b = p2[i] - m2;
    c11 += a * a;
    c22 += b * b;
    c12 += a * b;
  }
  c11 /= n;
  c22 /= n;
  c12 /= n;

  if (c11 + c22 < kDegenerateTrace) return {kInvSqrt2, kInvSqrt2};

  const double half_diff = 0.5 * (c11 - c22);
  const double lambda_max = 0.5 * (c11 + c22) + std::hypot(half_diff, c12);
  // Pick the better-conditioned of the two equivalent eigenvector forms.
  if (c11 >= c22) return normalized(lambda_max - c22, c12);
  return normalized(c12, lambda_max - c11);
}

GainMap build_gain_map(const Image& y1, const Image& y2, const GainOptions& options) {
  if (!y1.same_shape(y2)) throw DimensionError("build_gain_map: source images differ in size");
  const PatchGrid grid(y1.width(), y1.height(), options.patch_size);

  std::vector<PatchGains> gains(static_cast<std::size_t>(grid.cols()) * grid.rows());
  std::vector<double> a;
  std::vector<double> b;
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      const PatchRect rc = grid.rect(c, r);
      a.clear();
      b.clear();
      for (int y = rc.y0; y < rc.y0 + rc.height; ++y) {
        for (int x = rc.x0; x < rc.x0 + rc.width; ++x) {
          a.push_back(y1(x, y));
          b.push_back(y2(x, y));
        }
      }
      gains[static_cast<std::size_t>(r) * grid.cols() + c] =
          a.size() < 2 ? PatchGains{kInvSqrt2, kInvSqrt2} : estimate_patch_gains(a, b);
    }
  }

  if (options.smooth) {
    std::vector<PatchGains> smoothed(gains.size());
    for (int r = 0; r < grid.rows(); ++r) {
      for (int c = 0; c < grid.cols(); ++c) {
        double s1 = 0.0;
        double s2 = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr;
            const int cc = c + dc;
            if (rr < 0 || cc < 0 || rr >= grid.rows() || cc >= grid.cols()) continue;
            const PatchGains& g = gains[static_cast<std::size_t>(rr) * grid.cols() + cc];
            s1 += g.beta1;
            s2 += g.beta2;
          }
        }
        smoothed[static_cast<std::size_t>(r) * grid.cols() + c] = normalized(s1, s2);
      }
    }
    gains = std::move(smoothed);
  }

  GainMap map{Image(y1.width(), y1.height()), Image(y1.width(), y1.height())};
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      const PatchRect rc = grid.rect(c, r);
      const PatchGains& g = gains[static_cast<std::size_t>(r) * grid.cols() + c];
      for (int y = rc.y0; y < rc.y0 + rc.height; ++y) {
        for (int x = rc.x0; x < rc.x0 + rc.width; ++x) {
          map.beta1(x, y) = g.beta1;
          map.beta2(x, y) = g.beta2;
        }
      }
    }
  }
  return map;
}

}  // namespace gmcfuse
