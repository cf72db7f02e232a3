#include "gmcfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gmcfuse/errors.hpp"

namespace gmcfuse {

namespace mc = metric_constants;

namespace {

void check_triplet(const Image& a, const Image& b, const Image& f) {
  if (!a.same_shape(b) || !a.same_shape(f)) throw DimensionError("metric inputs differ in size");
}

void check_window(const Image& a, int window) {
  if (window < 2) throw ArgumentError("metric window must be >= 2");
  if (window > a.width() || window > a.height()) {
    throw ArgumentError("metric window " + std::to_string(window) + " exceeds image size");
  }
}

struct WindowStats {
  double mean;
  double var;
};

WindowStats stats(const double* x, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i) m += x[i];
  m /= n;
  double v = 0.0;
  for (int i = 0; i < n; ++i) v += (x[i] - m) * (x[i] - m);
  return {m, v / (n - 1)};
}

// Index from means/variances/covariance with the documented conventions.
double index_from_stats(WindowStats sx, WindowStats sy, double cov) {
  const bool flat_x = sx.var <= mc::flat_variance;
  const bool flat_y = sy.var <= mc::flat_variance;
  if (flat_x && flat_y) return std::abs(sx.mean - sy.mean) <= mc::equal_mean ? 1.0 : 0.0;
  if (flat_x || flat_y) return 0.0;  // correlation undefined against a flat window
  const double contrast = sx.var + sy.var;
  const double lum = sx.mean * sx.mean + sy.mean * sy.mean;
  if (contrast == 0.0 || lum == 0.0) return 0.0;
  return (4.0 * cov) * (sx.mean * sy.mean) / ((sx.var + sy.var) * lum);
}

double covariance(const double* x, double mx, const double* y, double my, int n) {
  double c = 0.0;
  for (int i = 0; i < n; ++i) c += (x[i] - mx) * (y[i] - my);
  return c / (n - 1);
}

void gather(const Image& img, int x0, int y0, int window, std::vector<double>& out) {
  for (int y = 0; y < window; ++y) {
    const double* row = img.pixels().data() + static_cast<std::ptrdiff_t>(y0 + y) * img.width() + x0;
    std::copy_n(row, window, out.begin() + static_cast<std::ptrdiff_t>(y) * window);
  }
}

template <class Score>
double window_mean(const Image& a, const Image& b, const Image& f, int window, Score score) {
  check_triplet(a, b, f);
  check_window(a, window);
  const int n = window * window;
  std::vector<double> wa(n), wb(n), wf(n);
  double total = 0.0;
  long count = 0;
  for (int y0 = 0; y0 + window <= a.height(); ++y0) {
    for (int x0 = 0; x0 + window <= a.width(); ++x0) {
      gather(a, x0, y0, window, wa);
      gather(b, x0, y0, window, wb);
      gather(f, x0, y0, window, wf);
      const WindowStats sa = stats(wa.data(), n);
      const WindowStats sb = stats(wb.data(), n);
      const WindowStats sf = stats(wf.data(), n);
      const double qa = index_from_stats(sa, sf, covariance(wa.data(), sa.mean, wf.data(), sf.mean, n));
      const double qb = index_from_stats(sb, sf, covariance(wb.data(), sb.mean, wf.data(), sf.mean, n));
      total += score(sa, sb, qa, qb);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

struct Gradient {
  Image magnitude;
  Image angle;
};

Gradient sobel(const Image& img) {
  const int w = img.width();
  const int h = img.height();
  auto at = [&](int x, int y) {
    return img(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  Gradient g{Image(w, h), Image(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
      const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
      g.magnitude(x, y) = std::hypot(gx, gy);
      g.angle(x, y) = gx == 0.0 ? std::numbers::pi / 2.0 : std::atan(gy / gx);
    }
  }
  return g;
}

double relative_strength(double gs, double gf) {
  if (gs == 0.0 && gf == 0.0) return 1.0;
  if (gs == 0.0 || gf == 0.0) return 0.0;
  return std::min(gf / gs, gs / gf);
}

double orientation_match(double as, double af) {
  double d = std::fmod(std::abs(as - af), std::numbers::pi);
  if (d > std::numbers::pi / 2.0) d = std::numbers::pi - d;
  return 1.0 - d / (std::numbers::pi / 2.0);
}

}  // namespace

double quality_index(const double* x, const double* y, int n) {
  if (n < 2) throw ArgumentError("quality_index needs at least two samples");
  const WindowStats sx = stats(x, n);
  const WindowStats sy = stats(y, n);
  return index_from_stats(sx, sy, covariance(x, sx.mean, y, sy.mean, n));
}

double q0_fusion(const Image& a, const Image& b, const Image& f, int window) {
  return window_mean(a, b, f, window,
                     [](const WindowStats&, const WindowStats&, double qa, double qb) {
                       return 0.5 * (qa + qb);
                     });
}

double piella_q(const Image& a, const Image& b, const Image& f, int window) {
  return window_mean(a, b, f, window,
                     [](const WindowStats& sa, const WindowStats& sb, double qa, double qb) {
                       const double total = sa.var + sb.var;
                       const double weight = total <= mc::flat_variance ? 0.5 : sa.var / total;
                       return weight * qa + (1.0 - weight) * qb;
                     });
}

double edge_preservation(double strength, double orientation) {
  const double qg = mc::gamma_g / (1.0 + std::exp(mc::kappa_g * (strength - mc::sigma_g)));
  const double qa = mc::gamma_a / (1.0 + std::exp(mc::kappa_a * (orientation - mc::sigma_a)));
  return qg * qa;
}

double petrovic_pe(const Image& a, const Image& b, const Image& f) {
  check_triplet(a, b, f);
  if (a.width() < 3 || a.height() < 3) throw ArgumentError("petrovic_pe needs images of at least 3x3");
  const Gradient ga = sobel(a);
  const Gradient gb = sobel(b);
  const Gradient gf = sobel(f);
  double num = 0.0;
  double den = 0.0;
  bool f_has_edges = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ma = ga.magnitude.pixels()[i];
    const double mb = gb.magnitude.pixels()[i];
    const double mf = gf.magnitude.pixels()[i];
    f_has_edges = f_has_edges || mf > 0.0;
    const double qaf = edge_preservation(relative_strength(ma, mf),
                                         orientation_match(ga.angle.pixels()[i], gf.angle.pixels()[i]));
    const double qbf = edge_preservation(relative_strength(mb, mf),
                                         orientation_match(gb.angle.pixels()[i], gf.angle.pixels()[i]));
    num += qaf * ma + qbf * mb;
    den += ma + mb;
  }
  if (den == 0.0) return f_has_edges ? 0.0 : edge_preservation(1.0, 1.0);
  return num / den;
}

MetricsReport evaluate_metrics(const Image& a, const Image& b, const Image& f, int window) {
  return {petrovic_pe(a, b, f), q0_fusion(a, b, f, window), piella_q(a, b, f, window), window};
}

double psnr(const Image& reference, const Image& test) {
  if (!reference.same_shape(test)) throw DimensionError("psnr: images differ in size");
  double mse = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference.pixels()[i] - test.pixels()[i];
    mse += d * d;
  }
  mse /= static_cast<double>(reference.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace gmcfuse
