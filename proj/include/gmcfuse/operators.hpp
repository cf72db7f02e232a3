#pragma once

#include <optional>
#include <string>

#include "gmcfuse/image.hpp"
#include "gmcfuse/wavelet.hpp"

namespace gmcfuse {

/// Nonnegative, unit-sum convolution kernel with odd dimensions, anchored at
/// its center.
class Psf {
 public:
  /// Validates and normalizes. Throws ArgumentError on even dimensions,
  /// negative entries or a non-positive sum.
  explicit Psf(Image kernel);

  static Psf identity();
  /// Truncated Gaussian with radius ceil(3 sigma); sigma == 0 gives the 1x1 identity.
  static Psf gaussian(double sigma);
  static Psf box(int size);

  const Image& kernel() const noexcept { return kernel_; }
  int width() const noexcept { return kernel_.width(); }
  int height() const noexcept { return kernel_.height(); }
  bool is_identity() const noexcept { return kernel_.size() == 1; }

 private:
  Image kernel_;
};

/// Text format: "rows cols" followed by rows*cols row-major reals.
Psf load_psf(const std::string& path);
void save_psf(const std::string& path, const Psf& psf);

/// Correlation-convention convolution with half-sample symmetric boundary
/// extension (edge sample repeated). Output has the input size.
Image conv2_apply(const Image& img, const Psf& psf);

/// Exact transpose of conv2_apply, boundary fold-back included.
Image conv2_adjoint(const Image& img, const Psf& psf);

/// One sensor's observation operator A = diag(gain) * H * W acting on wavelet
/// coefficients. The gain grid defines the (padded) image domain, which must
/// be divisible by 2^levels.
class ForwardOp {
 public:
  ForwardOp(Image gain, int levels, std::optional<Psf> psf = std::nullopt);

  const Image& gain() const noexcept { return gain_; }
  const std::optional<Psf>& psf() const noexcept { return psf_; }
  int levels() const noexcept { return levels_; }
  int width() const noexcept { return gain_.width(); }
  int height() const noexcept { return gain_.height(); }

  /// H applied to an image (identity when no PSF).
  Image blur(const Image& img) const;
  Image blur_adjoint(const Image& img) const;

 private:
  Image gain_;
  int levels_;
  std::optional<Psf> psf_;
};

/// gain ⊙ H(W coeffs).
Image forward_apply(const ForwardOp& op, const WaveletPyramid& coeffs);

/// W^T H^T (gain ⊙ residual).
WaveletPyramid adjoint_apply(const ForwardOp& op, const Image& residual);

/// (A1^T A1 + A2^T A2) coeffs.
WaveletPyramid normal_apply(const ForwardOp& op1, const ForwardOp& op2, const WaveletPyramid& coeffs);

/// Power-iteration (Rayleigh quotient) estimate of the largest eigenvalue of
/// A1^T A1 + A2^T A2, started from the all-ones pyramid. Nondecreasing in
/// iterations.
double operator_norm_sq(const ForwardOp& op1, const ForwardOp& op2, int iterations);

/// Rigorous upper bound on ||A1^T A1 + A2^T A2||:
/// sum_i max(gain_i^2) * max column sum of H_i.
double normal_operator_bound(const ForwardOp& op1, const ForwardOp& op2);

/// Exact norm when both operators have H = I (max over pixels of
/// gain1^2 + gain2^2), otherwise the power-iteration estimate.
double normal_operator_norm(const ForwardOp& op1, const ForwardOp& op2, int iterations = 200);

}  // namespace gmcfuse
