#pragma once

#include "gmcfuse/image.hpp"

namespace gmcfuse {

/// Fixed constants of the edge-preservation metric and the degenerate-window
/// conventions shared by all three measures.
namespace metric_constants {
inline constexpr double gamma_g = 0.9994;
inline constexpr double kappa_g = -15.0;
inline constexpr double sigma_g = 0.5;
inline constexpr double gamma_a = 0.9879;
inline constexpr double kappa_a = -22.0;
inline constexpr double sigma_a = 0.8;
/// Window variance at or below this counts as constant.
inline constexpr double flat_variance = 1e-12;
/// Window means closer than this count as equal.
inline constexpr double equal_mean = 1e-12;
inline constexpr int default_window = 8;
}  // namespace metric_constants

struct MetricsReport {
  double pe = 0.0;
  double q0 = 0.0;
  double q = 0.0;
  int window = metric_constants::default_window;
};

/// Universal quality index of one pair of equally sized windows given as
/// flat sample vectors.
double quality_index(const double* x, const double* y, int n);

/// Mean over all sliding windows (step 1) of [q(a,f) + q(b,f)] / 2.
double q0_fusion(const Image& a, const Image& b, const Image& f, int window = metric_constants::default_window);

/// Saliency-weighted variant: weight s(a)/(s(a)+s(b)) with s the window variance.
double piella_q(const Image& a, const Image& b, const Image& f, int window = metric_constants::default_window);

/// Sobel-based edge-preservation score in [0, gamma_g * gamma_a].
double petrovic_pe(const Image& a, const Image& b, const Image& f);

/// Edge-preservation value Q^{XF} for given relative strength and orientation agreement.
double edge_preservation(double strength, double orientation);

MetricsReport evaluate_metrics(const Image& a, const Image& b, const Image& f,
                               int window = metric_constants::default_window);

/// 10 log10(1 / MSE) for unit-range images.
double psnr(const Image& reference, const Image& test);

}  // namespace gmcfuse
