#include "gmcfuse/operators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <vector>

#include "boundary.hpp"
#include "gmcfuse/errors.hpp"

namespace gmcfuse {

namespace {

void check_kernel_fits(const Image& img, const Psf& psf) {
  if (psf.width() > 2 * img.width() || psf.height() > 2 * img.height()) {
    throw ArgumentError("PSF " + std::to_string(psf.width()) + "x" + std::to_string(psf.height()) +
                        " is larger than twice the image extent");
  }
}

// table[i * n + x] = source index for output x under kernel tap i.
std::vector<int> tap_table(int n, int taps) {
  const int c = taps / 2;
  std::vector<int> t(static_cast<std::size_t>(taps) * n);
  for (int i = 0; i < taps; ++i) {
    for (int x = 0; x < n; ++x) t[static_cast<std::size_t>(i) * n + x] = detail::reflect_half(x + i - c, n);
  }
  return t;
}

void check_op_domain(const ForwardOp& op, const WaveletPyramid& coeffs) {
  if (coeffs.padded_width() != op.width() || coeffs.padded_height() != op.height() ||
      coeffs.levels() != op.levels()) {
    throw DimensionError("coefficient pyramid does not match operator domain");
  }
}

void check_pair(const ForwardOp& op1, const ForwardOp& op2) {
  if (op1.width() != op2.width() || op1.height() != op2.height() || op1.levels() != op2.levels()) {
    throw DimensionError("operator pair has mismatched domains");
  }
}

}  // namespace

Psf::Psf(Image kernel) : kernel_(std::move(kernel)) {
  if (kernel_.width() % 2 == 0 || kernel_.height() % 2 == 0) {
    throw ArgumentError("PSF dimensions must be odd");
  }
  double sum = 0.0;
  for (double v : kernel_.pixels()) {
    if (v < 0.0) throw ArgumentError("PSF entries must be nonnegative");
    sum += v;
  }
  if (!(sum > 0.0)) throw ArgumentError("PSF must have a positive sum");
  for (double& v : kernel_.pixels()) v /= sum;
}

Psf Psf::identity() { return Psf(Image(1, 1, 1.0)); }

Psf Psf::gaussian(double sigma) {
  if (sigma < 0.0) throw ArgumentError("Gaussian sigma must be >= 0");
  if (sigma == 0.0) return identity();
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  Image k(2 * r + 1, 2 * r + 1);
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) k(x + r, y + r) = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
  }
  return Psf(std::move(k));
}

Psf Psf::box(int size) {
  if (size < 1 || size % 2 == 0) throw ArgumentError("box PSF size must be odd and positive");
  return Psf(Image(size, size, 1.0));
}

Psf load_psf(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open PSF file '" + path + "'");
  long rows = 0;
  long cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0 || rows > 4096 || cols > 4096) {
    throw IoError("PSF file '" + path + "': bad header");
  }
  std::vector<double> v(static_cast<std::size_t>(rows * cols));
  for (double& x : v) {
    if (!(in >> x)) throw IoError("PSF file '" + path + "': expected " + std::to_string(rows * cols) + " values");
  }
  std::string extra;
  if (in >> extra) throw IoError("PSF file '" + path + "': trailing data");
  return Psf(Image(static_cast<int>(cols), static_cast<int>(rows), std::move(v)));
}

void save_psf(const std::string& path, const Psf& psf) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write PSF file '" + path + "'");
  out << psf.height() << ' ' << psf.width() << '\n' << std::setprecision(17);
  for (int y = 0; y < psf.height(); ++y) {
    for (int x = 0; x < psf.width(); ++x) out << (x ? " " : "") << psf.kernel()(x, y);
    out << '\n';
  }
}

Image conv2_apply(const Image& img, const Psf& psf) {
  check_kernel_fits(img, psf);
  if (psf.is_identity()) return img;
  const int w = img.width();
  const int h = img.height();
  const auto tx = tap_table(w, psf.width());
  const auto ty = tap_table(h, psf.height());
  const Image& k = psf.kernel();
  Image out(w, h);
  for (int j = 0; j < psf.height(); ++j) {
    for (int i = 0; i < psf.width(); ++i) {
      const double kv = k(i, j);
      if (kv == 0.0) continue;
      const int* sx = tx.data() + static_cast<std::size_t>(i) * w;
      for (int y = 0; y < h; ++y) {
        const int sy = ty[static_cast<std::size_t>(j) * h + y];
        const double* src = img.pixels().data() + static_cast<std::ptrdiff_t>(sy) * w;
        double* dst = out.pixels().data() + static_cast<std::ptrdiff_t>(y) * w;
        for (int x = 0; x < w; ++x) dst[x] += kv * src[sx[x]];
      }
    }
  }
  return out;
}

Image conv2_adjoint(const Image& img, const Psf& psf) {
  check_kernel_fits(img, psf);
  if (psf.is_identity()) return img;
  const int w = img.width();
  const int h = img.height();
  const auto tx = tap_table(w, psf.width());
  const auto ty = tap_table(h, psf.height());
  const Image& k = psf.kernel();
  Image out(w, h);
  for (int j = 0; j < psf.height(); ++j) {
    for (int i = 0; i < psf.width(); ++i) {
      const double kv = k(i, j);
      if (kv == 0.0) continue;
      const int* sx = tx.data() + static_cast<std::size_t>(i) * w;
      for (int y = 0; y < h; ++y) {
        const int sy = ty[static_cast<std::size_t>(j) * h + y];
        const double* src = img.pixels().data() + static_cast<std::ptrdiff_t>(y) * w;
        double* dst = out.pixels().data() + static_cast<std::ptrdiff_t>(sy) * w;
        for (int x = 0; x < w; ++x) dst[sx[x]] += kv * src[x];
      }
    }
  }
  return out;
}

ForwardOp::ForwardOp(Image gain, int levels, std::optional<Psf> psf)
    : gain_(std::move(gain)), levels_(levels), psf_(std::move(psf)) {
  if (levels_ < 0) throw ArgumentError("levels must be >= 0");
  const int block = 1 << levels_;
  if (gain_.width() % block != 0 || gain_.height() % block != 0) {
    throw DimensionError("operator domain " + std::to_string(gain_.width()) + "x" +
                         std::to_string(gain_.height()) + " is not divisible by 2^" +
                         std::to_string(levels_));
  }
  for (double g : gain_.pixels()) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw ArgumentError("sensor gains must be finite and >= 0");
  }
  if (psf_) {
    if (psf_->is_identity()) {
      psf_.reset();
    } else {
      check_kernel_fits(gain_, *psf_);
    }
  }
}

Image ForwardOp::blur(const Image& img) const { return psf_ ? conv2_apply(img, *psf_) : img; }

Image ForwardOp::blur_adjoint(const Image& img) const {
  return psf_ ? conv2_adjoint(img, *psf_) : img;
}

Image forward_apply(const ForwardOp& op, const WaveletPyramid& coeffs) {
  check_op_domain(op, coeffs);
  Image out = op.blur(haar_synthesize(coeffs));
  auto p = out.pixels();
  const auto g = op.gain().pixels();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] *= g[i];
  return out;
}

WaveletPyramid adjoint_apply(const ForwardOp& op, const Image& residual) {
  if (residual.width() != op.width() || residual.height() != op.height()) {
    throw DimensionError("residual does not match operator range");
  }
  Image weighted = residual;
  auto p = weighted.pixels();
  const auto g = op.gain().pixels();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] *= g[i];
  return haar_analyze(op.blur_adjoint(weighted), op.levels());
}

WaveletPyramid normal_apply(const ForwardOp& op1, const ForwardOp& op2, const WaveletPyramid& coeffs) {
  check_pair(op1, op2);
  WaveletPyramid a = adjoint_apply(op1, forward_apply(op1, coeffs));
  const WaveletPyramid b = adjoint_apply(op2, forward_apply(op2, coeffs));
  auto ca = a.coefficients();
  const auto cb = b.coefficients();
  for (std::size_t i = 0; i < ca.size(); ++i) ca[i] += cb[i];
  return a;
}

double operator_norm_sq(const ForwardOp& op1, const ForwardOp& op2, int iterations) {
  check_pair(op1, op2);
  if (iterations < 1) throw ArgumentError("operator_norm_sq needs at least one iteration");
  WaveletPyramid x = WaveletPyramid::zeros(op1.levels(), op1.width(), op1.height(), op1.width(),
                                           op1.height());
  const double inv = 1.0 / std::sqrt(static_cast<double>(x.size()));
  for (double& c : x.coefficients()) c = inv;
  double estimate = 0.0;
  for (int k = 0; k < iterations; ++k) {
    WaveletPyramid y = normal_apply(op1, op2, x);
    estimate = dot(x, y);
    const double n = norm2(y);
    if (n == 0.0) return 0.0;
    for (double& c : y.coefficients()) c /= n;
    x = std::move(y);
  }
  return estimate;
}

double normal_operator_bound(const ForwardOp& op1, const ForwardOp& op2) {
  check_pair(op1, op2);
  double bound = 0.0;
  for (const ForwardOp* op : {&op1, &op2}) {
    double gmax = 0.0;
    for (double g : op->gain().pixels()) gmax = std::max(gmax, g * g);
    double colsum = 1.0;
    if (op->psf()) {
      const Image ones(op->width(), op->height(), 1.0);
      const Image cs = op->blur_adjoint(ones);
      colsum = *std::max_element(cs.pixels().begin(), cs.pixels().end());
    }
    bound += gmax * colsum;
  }
  return bound;
}

double normal_operator_norm(const ForwardOp& op1, const ForwardOp& op2, int iterations) {
  check_pair(op1, op2);
  if (!op1.psf() && !op2.psf()) {
    double m = 0.0;
    const auto g1 = op1.gain().pixels();
    const auto g2 = op2.gain().pixels();
    for (std::size_t i = 0; i < g1.size(); ++i) m = std::max(m, g1[i] * g1[i] + g2[i] * g2[i]);
    return m;
  }
  return operator_norm_sq(op1, op2, iterations);
}

}  // namespace gmcfuse
