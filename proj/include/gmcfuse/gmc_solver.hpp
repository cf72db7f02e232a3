#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gmcfuse/image.hpp"
#include "gmcfuse/operators.hpp"
#include "gmcfuse/wavelet.hpp"

namespace gmcfuse {

/// sign(t) * max(|t| - threshold, 0). Throws ArgumentError for threshold < 0.
double soft_threshold(double t, double threshold);
void soft_threshold_inplace(std::span<double> values, double threshold);
WaveletPyramid soft_threshold(const WaveletPyramid& pyr, double threshold);

/// The matrix-free quadratic form B^T B of the generalized Huber function,
/// together with an upper bound on its spectral norm.
class QuadraticForm {
 public:
  using Apply = std::function<void(std::span<const double> in, std::span<double> out)>;

  QuadraticForm(Apply apply, double norm_bound);

  /// B = b I; valid for vectors of any length.
  static QuadraticForm scalar(double b);

  /// B^T B = (gamma / lambda) (A1^T A1 + A2^T A2) on pyramids of the
  /// operators' domain, i.e. the convexity-preserving choice for the
  /// two-sensor cost.
  static QuadraticForm fusion(const ForwardOp& op1, const ForwardOp& op2, double gamma, double lambda);

  void apply(std::span<const double> in, std::span<double> out) const { apply_(in, out); }
  double norm_bound() const noexcept { return norm_bound_; }

 private:
  Apply apply_;
  double norm_bound_;
};

struct HuberOptions {
  /// Sup-norm of the proximal-gradient residual at which the inner solve stops.
  double tol = 1e-8;
  int max_iters = 200000;
};

/// S_B(x) = min_v ||v||_1 + 0.5 ||B(x - v)||^2, computed with restarted
/// FISTA on v. Meant for small instances. Throws DiagnosticError when the
/// iteration budget runs out.
double generalized_huber(std::span<const double> x, const QuadraticForm& btb,
                         const HuberOptions& options = {});

/// psi_B(x) = ||x||_1 - S_B(x).
double gmc_penalty(std::span<const double> x, const QuadraticForm& btb,
                   const HuberOptions& options = {});

struct SolverConfig {
  double lambda = 0.005;
  double gamma = 0.8;
  /// Unset means step_size_auto.
  std::optional<double> mu;
  int max_iters = 300;
  double tol = 1e-6;
  /// Decomposition depth; -1 lets the caller pick a default. When >= 0 it
  /// must agree with the operators.
  int levels = -1;
};

enum class PenaltyEvaluation {
  /// Exact GMC penalty through generalized_huber (small instances only).
  Exact,
  /// lambda * ||x||_1, an upper bound on lambda * psi_B(x); exact when gamma == 0.
  L1Bound,
};

struct CostValue {
  double data = 0.0;     ///< 0.5 ||y1 - A1 x||^2 + 0.5 ||y2 - A2 x||^2
  double penalty = 0.0;  ///< psi_B(x) or its L1 bound, before scaling by lambda
  double total = 0.0;
  bool exact = true;
};

CostValue cost_value(const WaveletPyramid& x, const Image& y1, const Image& y2, const ForwardOp& op1,
                     const ForwardOp& op2, const SolverConfig& cfg,
                     PenaltyEvaluation mode = PenaltyEvaluation::L1Bound,
                     const HuberOptions& huber = {});

struct StepSize {
  double mu;
  double rho;
};

/// rho = max(1, gamma/(1-gamma)) * max(1, ||A1^T A1 + A2^T A2||), mu = 1.9 / rho.
/// Throws ArgumentError for gamma outside [0, 1).
StepSize step_size_auto(const ForwardOp& op1, const ForwardOp& op2, double gamma);

struct FusionResult {
  /// Rendered image on the operators' domain, clamped to [0,1]:
  /// (W x) ⊙ (beta1^2 + beta2^2) / (beta1 + beta2). Under y_i = beta_i x this
  /// is the gain-weighted average sum(beta_i y_i) / sum(beta_i), i.e. the
  /// sources' intensity scale rather than the unit-norm-gain scale of x.
  Image fused;
  Image synthesis;  ///< W x, unscaled and unclamped
  WaveletPyramid x;
  WaveletPyramid v;
  int iters_used = 0;
  /// J(x^k) for k = 0..iters_used, penalty by the L1 bound unless gamma == 0.
  std::vector<double> cost_trace;
  bool cost_is_upper_bound = false;
  double final_residual = 0.0;
  double mu = 0.0;
  double rho = 0.0;
};

/// Called after every iteration k (0-based) with the updated x, v and the
/// pre-threshold forward step w.
using IterationObserver = std::function<void(int iteration, const WaveletPyramid& x,
                                             const WaveletPyramid& v, const WaveletPyramid& w)>;

/// Forward-backward saddle-point iteration for the two-sensor GMC cost,
/// started at x0 = v0 = W^T(beta1 y1 + beta2 y2):
///   w = x - mu [A1^T(A1 x - y1) + A2^T(A2 x - y2) + gamma N (v - x)]
///   u = v - mu gamma N (v - x),        N = A1^T A1 + A2^T A2
///   x <- soft(w, mu lambda), v <- soft(u, mu lambda)
/// Stops after max_iters or when ||x+ - x|| / max(||x||, 1e-12) < tol.
FusionResult solve(const Image& y1, const Image& y2, const ForwardOp& op1, const ForwardOp& op2,
                   const SolverConfig& cfg, const IterationObserver& observer = {});

}  // namespace gmcfuse
