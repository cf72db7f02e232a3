#include "gmcfuse/gmc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmcfuse/errors.hpp"

namespace gmcfuse {

namespace {

double l1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double sq_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

void validate(const SolverConfig& cfg, const ForwardOp& op1, const ForwardOp& op2) {
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) throw ConfigError("lambda must be > 0");
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(cfg.tol >= 0.0)) throw ConfigError("tol must be >= 0");
  if (cfg.levels >= 0 && (cfg.levels != op1.levels() || cfg.levels != op2.levels())) {
    throw ConfigError("configured levels disagree with the operators");
  }
  if (op1.width() != op2.width() || op1.height() != op2.height() || op1.levels() != op2.levels()) {
    throw DimensionError("operator pair has mismatched domains");
  }
}

double rho_factor(double gamma) {
  return gamma >= 1.0 ? INFINITY : std::max(1.0, gamma / (1.0 - gamma));
}

// Pixel-domain pieces of one sensor term: r = g ⊙ H X - y.
Image sensor_residual(const ForwardOp& op, const Image& synth, const Image& y) {
  Image r = op.blur(synth);
  auto p = r.pixels();
  const auto g = op.gain().pixels();
  const auto yy = y.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = g[i] * p[i] - yy[i];
  return r;
}

// acc += H^T (g ⊙ img)
void accumulate_adjoint(const ForwardOp& op, Image img, Image& acc) {
  auto p = img.pixels();
  const auto g = op.gain().pixels();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] *= g[i];
  const Image back = op.blur_adjoint(img);
  auto a = acc.pixels();
  const auto b = back.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

Image render_fused(const Image& synth, const ForwardOp& op1, const ForwardOp& op2) {
  Image out = synth;
  auto p = out.pixels();
  const auto g1 = op1.gain().pixels();
  const auto g2 = op2.gain().pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double sum = g1[i] + g2[i];
    p[i] = sum > 0.0 ? p[i] * (g1[i] * g1[i] + g2[i] * g2[i]) / sum : 0.0;
  }
  clamp_unit(out);
  return out;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

double soft_threshold(double t, double threshold) {
  if (!(threshold >= 0.0)) throw ArgumentError("soft threshold must be >= 0");
  const double m = std::abs(t) - threshold;
  return m > 0.0 ? std::copysign(m, t) : 0.0;
}

void soft_threshold_inplace(std::span<double> values, double threshold) {
  if (!(threshold >= 0.0)) throw ArgumentError("soft threshold must be >= 0");
  for (double& t : values) {
    const double m = std::abs(t) - threshold;
    t = m > 0.0 ? std::copysign(m, t) : 0.0;
  }
}

WaveletPyramid soft_threshold(const WaveletPyramid& pyr, double threshold) {
  WaveletPyramid out = pyr;
  soft_threshold_inplace(out.coefficients(), threshold);
  return out;
}

QuadraticForm::QuadraticForm(Apply apply, double norm_bound)
    : apply_(std::move(apply)), norm_bound_(norm_bound) {
  if (!(norm_bound >= 0.0) || !std::isfinite(norm_bound)) {
    throw ArgumentError("quadratic form norm bound must be finite and >= 0");
  }
}

QuadraticForm QuadraticForm::scalar(double b) {
  const double b2 = b * b;
  return QuadraticForm(
      [b2](std::span<const double> in, std::span<double> out) {
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = b2 * in[i];
      },
      b2);
}

QuadraticForm QuadraticForm::fusion(const ForwardOp& op1, const ForwardOp& op2, double gamma,
                                    double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ArgumentError("gamma must lie in [0, 1]");
  const double scale = gamma / lambda;
  const int w = op1.width();
  const int h = op1.height();
  const int levels = op1.levels();
  return QuadraticForm(
      [op1, op2, scale, w, h, levels](std::span<const double> in, std::span<double> out) {
        const WaveletPyramid p(levels, w, h, w, h, std::vector<double>(in.begin(), in.end()));
        const WaveletPyramid n = normal_apply(op1, op2, p);
        const auto c = n.coefficients();
        for (std::size_t i = 0; i < c.size(); ++i) out[i] = scale * c[i];
      },
      scale * normal_operator_bound(op1, op2));
}

double generalized_huber(std::span<const double> x, const QuadraticForm& btb,
                         const HuberOptions& options) {
  const double lip = btb.norm_bound();
  if (lip == 0.0) return 0.0;  // B = 0: v = 0 is optimal
  const std::size_t n = x.size();
  const double step = 1.0 / lip;

  std::vector<double> v(x.begin(), x.end());
  std::vector<double> v_prev(v);
  std::vector<double> y(v);
  std::vector<double> diff(n);
  std::vector<double> grad(n);
  std::vector<double> next(n);
  double t = 1.0;

  auto prox_grad = [&](const std::vector<double>& at, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) diff[i] = at[i] - x[i];
    btb.apply(diff, grad);
    for (std::size_t i = 0; i < n; ++i) out[i] = at[i] - step * grad[i];
    soft_threshold_inplace(out, step);
  };

  bool converged = false;
  for (int k = 0; k < options.max_iters; ++k) {
    prox_grad(y, next);
    // Gradient-mapping residual at the extrapolated point.
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(y[i] - next[i]) * lip);
    if (resid < options.tol) {
      v = next;
      converged = true;
      break;
    }
    // Restart momentum when it points against the last step.
    double align = 0.0;
    for (std::size_t i = 0; i < n; ++i) align += (y[i] - next[i]) * (next[i] - v[i]);
    v_prev.swap(v);
    v = next;
    if (align > 0.0) {
      t = 1.0;
      y = v;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < n; ++i) y[i] = v[i] + beta * (v[i] - v_prev[i]);
    t = t_next;
  }
  if (!converged) {
    throw DiagnosticError("generalized_huber: inner minimization did not reach tol " +
                          std::to_string(options.tol) + " within " +
                          std::to_string(options.max_iters) + " iterations");
  }

  for (std::size_t i = 0; i < n; ++i) diff[i] = x[i] - v[i];
  btb.apply(diff, grad);
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += diff[i] * grad[i];
  return l1(v) + 0.5 * quad;
}

double gmc_penalty(std::span<const double> x, const QuadraticForm& btb, const HuberOptions& options) {
  const double s = generalized_huber(x, btb, options);
  return std::max(0.0, l1(x) - s);
}

CostValue cost_value(const WaveletPyramid& x, const Image& y1, const Image& y2, const ForwardOp& op1,
                     const ForwardOp& op2, const SolverConfig& cfg, PenaltyEvaluation mode,
                     const HuberOptions& huber) {
  if (!y1.same_shape(y2) || y1.width() != op1.width() || y1.height() != op1.height()) {
    throw DimensionError("cost_value: images do not match the operator domain");
  }
  const Image r1 = forward_apply(op1, x);
  const Image r2 = forward_apply(op2, x);
  CostValue c;
  c.data = 0.5 * (sq_dist(y1.pixels(), r1.pixels()) + sq_dist(y2.pixels(), r2.pixels()));
  if (cfg.gamma == 0.0) {
    c.penalty = l1(x.coefficients());
    c.exact = true;
  } else if (mode == PenaltyEvaluation::Exact) {
    c.penalty = gmc_penalty(x.coefficients(), QuadraticForm::fusion(op1, op2, cfg.gamma, cfg.lambda),
                            huber);
    c.exact = true;
  } else {
    c.penalty = l1(x.coefficients());
    c.exact = false;
  }
  c.total = c.data + cfg.lambda * c.penalty;
  return c;
}

StepSize step_size_auto(const ForwardOp& op1, const ForwardOp& op2, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ArgumentError("automatic step size needs 0 <= gamma < 1");
  }
  const double rho = rho_factor(gamma) * std::max(1.0, normal_operator_norm(op1, op2));
  return {1.9 / rho, rho};
}

FusionResult solve(const Image& y1, const Image& y2, const ForwardOp& op1, const ForwardOp& op2,
                   const SolverConfig& cfg, const IterationObserver& observer) {
  validate(cfg, op1, op2);
  if (!y1.same_shape(y2) || y1.width() != op1.width() || y1.height() != op1.height()) {
    throw DimensionError("solve: source images do not match the operator domain");
  }

  StepSize step{};
  if (cfg.mu) {
    const double rho = rho_factor(cfg.gamma) * normal_operator_norm(op1, op2);
    if (!(*cfg.mu > 0.0) || !(*cfg.mu < 2.0 / rho)) {
      throw ConfigError("step size mu = " + std::to_string(*cfg.mu) + " is outside (0, " +
                        std::to_string(2.0 / rho) + ")");
    }
    step = {*cfg.mu, rho};
  } else {
    if (cfg.gamma >= 1.0) throw ConfigError("gamma = 1 admits no step size with 0 < mu < 2/rho");
    step = step_size_auto(op1, op2, cfg.gamma);
  }
  const double mu = step.mu;
  const double gamma = cfg.gamma;
  const double thresh = mu * cfg.lambda;
  const int w = op1.width();
  const int h = op1.height();
  const int levels = op1.levels();

  Image avg(w, h);
  {
    auto a = avg.pixels();
    const auto g1 = op1.gain().pixels();
    const auto g2 = op2.gain().pixels();
    const auto p1 = y1.pixels();
    const auto p2 = y2.pixels();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = g1[i] * p1[i] + g2[i] * p2[i];
  }
  WaveletPyramid x = haar_analyze(avg, levels);
  if (!all_finite(avg.pixels()) || !all_finite(x.coefficients())) {
    throw DivergenceError("initial iterate is not finite");
  }
  WaveletPyramid v = x;
  WaveletPyramid w_step = WaveletPyramid::zeros_like(x);
  WaveletPyramid u_step = WaveletPyramid::zeros_like(x);
  WaveletPyramid delta = WaveletPyramid::zeros_like(x);

  FusionResult result;
  result.mu = mu;
  result.rho = step.rho;
  result.cost_is_upper_bound = gamma != 0.0;

  auto record_cost = [&](const Image& r1, const Image& r2, const WaveletPyramid& at) {
    const double data = 0.5 * (sq_norm(r1.pixels()) + sq_norm(r2.pixels()));
    result.cost_trace.push_back(data + cfg.lambda * l1(at.coefficients()));
  };

  double change = 0.0;
  int k = 0;
  for (; k < cfg.max_iters; ++k) {
    const Image synth_x = haar_synthesize(x);
    const Image r1 = sensor_residual(op1, synth_x, y1);
    const Image r2 = sensor_residual(op2, synth_x, y2);
    record_cost(r1, r2, x);

    Image grad_px(w, h);
    Image normal_px(w, h);
    if (gamma != 0.0) {
      {
        auto d = delta.coefficients();
        const auto cv = v.coefficients();
        const auto cx = x.coefficients();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = cv[i] - cx[i];
      }
      const Image synth_d = haar_synthesize(delta);
      for (const ForwardOp* op : {&op1, &op2}) {
        Image s = op->blur(synth_d);
        auto ps = s.pixels();
        const auto g = op->gain().pixels();
        for (std::size_t i = 0; i < ps.size(); ++i) ps[i] *= g[i];
        const Image& r = op == &op1 ? r1 : r2;
        Image combined = r;
        auto pc = combined.pixels();
        for (std::size_t i = 0; i < pc.size(); ++i) pc[i] += gamma * ps[i];
        accumulate_adjoint(*op, std::move(combined), grad_px);
        accumulate_adjoint(*op, std::move(s), normal_px);
      }
    } else {
      accumulate_adjoint(op1, r1, grad_px);
      accumulate_adjoint(op2, r2, grad_px);
    }

    const WaveletPyramid grad = haar_analyze(grad_px, levels);
    {
      auto cw = w_step.coefficients();
      const auto cx = x.coefficients();
      const auto cg = grad.coefficients();
      for (std::size_t i = 0; i < cw.size(); ++i) cw[i] = cx[i] - mu * cg[i];
    }
    if (gamma != 0.0) {
      const WaveletPyramid nd = haar_analyze(normal_px, levels);
      auto cu = u_step.coefficients();
      const auto cv = v.coefficients();
      const auto cn = nd.coefficients();
      for (std::size_t i = 0; i < cu.size(); ++i) cu[i] = cv[i] - mu * gamma * cn[i];
    } else {
      std::copy(v.coefficients().begin(), v.coefficients().end(), u_step.coefficients().begin());
    }

    WaveletPyramid x_next = soft_threshold(w_step, thresh);
    WaveletPyramid v_next = soft_threshold(u_step, thresh);
    if (!all_finite(x_next.coefficients()) || !all_finite(v_next.coefficients())) {
      throw DivergenceError("solver iterates became non-finite at iteration " + std::to_string(k));
    }

    const double xn = std::sqrt(sq_norm(x.coefficients()));
    change = std::sqrt(sq_dist(x_next.coefficients(), x.coefficients())) / std::max(xn, 1e-12);
    x = std::move(x_next);
    v = std::move(v_next);
    if (observer) observer(k, x, v, w_step);
    if (change < cfg.tol) {
      ++k;
      break;
    }
  }

  const Image synth_x = haar_synthesize(x);
  record_cost(sensor_residual(op1, synth_x, y1), sensor_residual(op2, synth_x, y2), x);

  result.iters_used = k;
  result.final_residual = change;
  result.synthesis = synth_x;
  result.fused = render_fused(synth_x, op1, op2);
  result.x = std::move(x);
  result.v = std::move(v);
  return result;
}

}  // namespace gmcfuse
