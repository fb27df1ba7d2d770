#pragma once

// Tail fitting against the closed-form asymptotes and norm convergence.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "xbound/closedform.hpp"
#include "xbound/solver1d.hpp"
#include "xbound/solver2d.hpp"

namespace xbound {

enum class TailModel { power_tail, antiho };
inline const char* to_string(TailModel m) { return m == TailModel::power_tail ? "power-tail" : "antiho"; }

struct TailFit {
  double phi0 = 0.0;  // in the units of WaveFunction::values
  double chi0 = 0.0;  // [0, 2 pi)
  std::optional<double> core_scale;
  double residual = 0.0;  // relative RMS over the window
  double inner = 0.0;
  double outer = 0.0;
  TailModel model = TailModel::power_tail;
  int order = 1;
  std::size_t points = 0;

  AsymptoteParams params() const { return {phi0, chi0, core_scale, order}; }
};

struct FitWindow {
  double inner = 0.0;
  double outer = 0.0;
};

inline double first_zero(const WaveFunction& wf) {
  const auto z = find_zeros(wf);
  if (z.empty()) throw NumericalError("state has no zero crossing on the grid");
  return z.front();
}

inline double tail_phase(const ProblemSpec& spec, double x) {
  return spec.gamma > 1.0 ? std::pow(x, spec.gamma + 1.0) / (spec.gamma + 1.0) : 0.5 * x * x;
}

inline FitWindow default_window(const WaveFunction& wf, const ProblemSpec& spec) {
  (void)spec;
  const double L = wf.grid.end();
  return {std::max(3.0 * first_zero(wf), 0.4 * L), 0.95 * L};
}

inline int default_fit_order(const ProblemSpec& spec) {
  return (spec.gamma > 1.0 && spec.energy != 0.0) ? 2 : 1;
}

namespace detail {

inline double reduce_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0) a += two_pi;
  if (a >= two_pi) a -= two_pi;
  return a;
}

}  // namespace detail

// The model phi0 [A cos(phase - chi0) + B sin(phase - chi0)] is linear in
// c1 = phi0 cos chi0 and c2 = phi0 sin chi0, so the fit is a 2x2 solve.
inline TailFit fit_tail(const WaveFunction& wf, const ProblemSpec& spec, FitWindow window,
                        std::optional<int> order = {}) {
  wf.validate();
  const double L = wf.grid.end();
  if (!(window.outer > window.inner)) throw ConfigError("fit window must have inner < outer");
  if (window.outer > 0.95 * L * (1.0 + 1e-12)) throw ConfigError("fit window outer edge must not exceed 0.95 L");
  if (window.inner < 3.0 * first_zero(wf) * (1.0 - 1e-12))
    throw ConfigError("fit window inner edge must be at least 3x the first zero");
  const double oscillations = (tail_phase(spec, window.outer) - tail_phase(spec, window.inner)) / (2.0 * std::numbers::pi);
  if (oscillations < 3.0)
    throw ConfigError("fit window spans " + std::to_string(oscillations) + " oscillations; at least 3 needed");

  TailFit fit;
  fit.order = order.value_or(default_fit_order(spec));
  fit.model = spec.gamma > 1.0 ? TailModel::power_tail : TailModel::antiho;
  fit.inner = window.inner;
  fit.outer = window.outer;
  if (fit.model == TailModel::antiho && fit.order != 1) throw ConfigError("the gamma = 1 tail fit is order 1 only");

  double m11 = 0, m12 = 0, m22 = 0, r1 = 0, r2 = 0, yy = 0;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < wf.size(); ++i) {
    const double x = wf.x(i);
    if (x < window.inner || x > window.outer) continue;
    idx.push_back(i);
    const TailTerms t = tail_terms(spec, x, fit.order);
    const double c = std::cos(t.phase), s = std::sin(t.phase);
    const double b1 = t.cos_amp * c + t.sin_amp * s;
    const double b2 = t.cos_amp * s - t.sin_amp * c;
    const double y = wf.values[i];
    m11 += b1 * b1;
    m12 += b1 * b2;
    m22 += b2 * b2;
    r1 += b1 * y;
    r2 += b2 * y;
    yy += y * y;
  }
  fit.points = idx.size();
  const double det = m11 * m22 - m12 * m12;
  if (idx.size() < 8 || !(std::abs(det) > 1e-14 * m11 * m22))
    throw NumericalError("tail fit is singular over the window");
  const double c1 = (r1 * m22 - r2 * m12) / det;
  const double c2 = (r2 * m11 - r1 * m12) / det;
  fit.phi0 = std::hypot(c1, c2);
  if (!(fit.phi0 > 0.0) || !std::isfinite(fit.phi0)) throw NumericalError("tail fit did not converge");
  const double chi = std::atan2(c2, c1);
  fit.chi0 = detail::reduce_angle(chi);

  double rss = 0.0;
  for (std::size_t i : idx) {
    const TailTerms t = tail_terms(spec, wf.x(i), fit.order);
    const double d = wf.values[i] - evaluate(t, fit.phi0, fit.chi0);
    rss += d * d;
  }
  fit.residual = std::sqrt(rss / yy);

  if (fit.model == TailModel::antiho && spec.energy != 0.0) {
    // cos(x^2/2 + E ln x - chi) = cos(x^2/2 + E ln(x / l)) with l = exp(chi / E)
    const double wrapped = chi;  // (-pi, pi]
    fit.core_scale = std::exp(wrapped / spec.energy);
    fit.chi0 = 0.0;
  }
  return fit;
}

inline TailFit fit_tail(const WaveFunction& wf, const ProblemSpec& spec, std::optional<int> order = {}) {
  return fit_tail(wf, spec, default_window(wf, spec), order);
}

// Max over the fit window of |phi - model| / (phi0 x^{-p}).
inline double asymptotic_deviation(const WaveFunction& wf, const TailFit& fit, const ProblemSpec& spec) {
  const AsymptoteParams params = fit.params();
  double worst = 0.0;
  for (std::size_t i = 0; i < wf.size(); ++i) {
    const double x = wf.x(i);
    if (x < fit.inner || x > fit.outer) continue;
    const TailTerms t = tail_terms(spec, x, params.order, params.core_scale.value_or(1.0));
    const double model = evaluate(t, params.phi0, params.chi0);
    worst = std::max(worst, std::abs(wf.values[i] - model) / tail_envelope(spec, fit.phi0, x));
  }
  return worst;
}

// ---------------------------------------------------------------------------

enum class NormClass { convergent, log_divergent, undetermined };
inline const char* to_string(NormClass c) {
  switch (c) {
    case NormClass::convergent: return "convergent";
    case NormClass::log_divergent: return "log-divergent";
    default: return "undetermined";
  }
}

struct NormCurve {
  std::vector<double> truncations;
  std::vector<double> norms;
  NormClass classification = NormClass::undetermined;
  double log_intercept = 0.0;  // a in a + b ln L
  double log_slope = 0.0;      // b
  double log_slope_t = 0.0;    // t statistic of b
  double limit = 0.0;          // a in a - c L^{1-gamma}
  double saturation_coefficient = 0.0;
  double rss_log = 0.0;
  double rss_saturating = 0.0;
  double f_ratio_threshold = 4.0;
};

// Cumulative trapezoid of w(x) phi^2 on the grid (1D: 2 phi^2, 2D: 2 pi r phi^2).
inline std::vector<double> cumulative_norm(const WaveFunction& wf) {
  const double h = wf.grid.spacing();
  const double scale2 = std::exp(2.0 * wf.log_scale);
  auto density = [&](std::size_t i) {
    const double v = wf.values[i];
    return (wf.dimension == Dimension::line ? 2.0 : 2.0 * std::numbers::pi * wf.x(i)) * v * v;
  };
  std::vector<double> out(wf.size(), 0.0);
  for (std::size_t i = 1; i < wf.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (density(i - 1) + density(i));
  for (double& v : out) v *= scale2;
  return out;
}

inline double partial_norm(const std::vector<double>& cumulative, const Grid& grid, double L) {
  if (L > grid.end() * (1.0 + 1e-12)) throw ConfigError("truncation beyond the grid");
  const double pos = (L - grid.start) / grid.spacing();
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(pos), grid.samples - 2);
  const double t = pos - static_cast<double>(i);
  return cumulative[i] + t * (cumulative[i + 1] - cumulative[i]);
}

namespace detail {

struct LineFit {
  double a = 0.0, b = 0.0, rss = 0.0, se_b = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.b = sxx > 0 ? sxy / sxx : 0.0;
  f.a = my - f.b * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = y[i] - f.a - f.b * x[i];
    f.rss += d * d;
  }
  f.se_b = (n > 2 && sxx > 0) ? std::sqrt(f.rss / (n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace detail

inline NormCurve norm_curve(const WaveFunction& wf, const ProblemSpec& spec, std::vector<double> truncations) {
  if (truncations.size() < 4) throw ConfigError("norm_curve needs at least 4 truncations");
  for (std::size_t i = 1; i < truncations.size(); ++i)
    if (!(truncations[i] > truncations[i - 1])) throw ConfigError("truncations must be strictly ascending");
  wf.validate();
  NormCurve nc;
  nc.truncations = truncations;
  const auto cum = cumulative_norm(wf);
  for (double L : truncations) nc.norms.push_back(partial_norm(cum, wf.grid, L));

  std::vector<double> lnL;
  for (double L : truncations) lnL.push_back(std::log(L));
  const auto lf = detail::least_squares_line(lnL, nc.norms);
  nc.log_intercept = lf.a;
  nc.log_slope = lf.b;
  nc.rss_log = lf.rss;
  nc.log_slope_t = lf.se_b > 0 ? lf.b / lf.se_b : (lf.b > 0 ? INFINITY : 0.0);

  // Envelope squared times the measure decays as x^{-gamma} in both geometries.
  const double p = spec.gamma - 1.0;
  if (p > 0.0) {
    std::vector<double> u;
    for (double L : truncations) u.push_back(std::pow(L, -p));
    const auto sf = detail::least_squares_line(u, nc.norms);
    nc.limit = sf.a;
    nc.saturation_coefficient = -sf.b;
    nc.rss_saturating = sf.rss;
  } else {
    double mean = 0.0;
    for (double v : nc.norms) mean += v;
    mean /= static_cast<double>(nc.norms.size());
    nc.limit = mean;
    for (double v : nc.norms) nc.rss_saturating += (v - mean) * (v - mean);
  }

  const double thr = nc.f_ratio_threshold;
  if (nc.rss_saturating * thr < nc.rss_log)
    nc.classification = NormClass::convergent;
  else if (nc.rss_log * thr < nc.rss_saturating && nc.log_slope > 0.0 && nc.log_slope_t > 3.0)
    nc.classification = NormClass::log_divergent;
  else
    nc.classification = NormClass::undetermined;
  return nc;
}

// Evenly spaced truncations over the outer part of the grid.
inline std::vector<double> default_truncations(const WaveFunction& wf, std::size_t count = 16) {
  const double L = wf.grid.end();
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(0.3 * L + (0.95 * L - 0.3 * L) * static_cast<double>(k) / static_cast<double>(count - 1));
  return out;
}

// Norm of a stationary state with the oscillatory tail beyond L completed
// analytically from the fitted envelope (gamma > 1); 1D only.
inline double state_norm(const WaveFunction& wf, const ProblemSpec& spec) {
  const auto cum = cumulative_norm(wf);
  double n = cum.back();
  if (spec.gamma > 1.0) {
    const TailFit fit = fit_tail(wf, spec);
    const double L = wf.grid.end();
    const double phi0 = fit.phi0 * wf.scale();
    const double p = spec.gamma - 1.0;
    n += (wf.dimension == Dimension::line ? 1.0 : std::numbers::pi) * phi0 * phi0 * std::pow(L, -p) / p;
  }
  return n;
}

struct TunedState {
  WaveFunction state;
  double amplitude = 0.0;
  double norm = 0.0;
  int iterations = 0;
};

// Bisection over the origin amplitude A in [lo, hi] for a target norm. The
// norm must bracket the target at the ends.
inline TunedState tune_amplitude_to_norm(const ProblemSpec& spec, double target, double lo, double hi,
                                         ShootConfig cfg, double tol = 1e-4) {
  if (!(lo > 0.0 && hi > lo)) throw ConfigError("amplitude bracket must satisfy 0 < lo < hi");
  auto norm_at = [&](double A) {
    cfg.amplitude = A;
    return state_norm(solve_stationary_1d(spec, cfg), spec);
  };
  double flo = norm_at(lo) - target;
  const double fhi = norm_at(hi) - target;
  if ((flo < 0) == (fhi < 0))
    throw NumericalError("target norm " + std::to_string(target) + " is not bracketed by A in [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  int it = 0;
  while (hi - lo > tol * lo && it < 100) {
    const double mid = 0.5 * (lo + hi);
    const double fm = norm_at(mid) - target;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    ++it;
  }
  TunedState out;
  out.amplitude = 0.5 * (lo + hi);
  cfg.amplitude = out.amplitude;
  out.state = solve_stationary_1d(spec, cfg);
  out.norm = state_norm(out.state, spec);
  out.iterations = it;
  return out;
}

// Closed-form vortex sampled on [0, L] and passed through norm_curve; the
// saturating fit extrapolates the partial norms to L -> infinity.
inline NormCurve exact_vortex_quadrature(int S, std::optional<double> extent = {}, int ppw = 16) {
  const ProblemSpec spec = ProblemSpec::radial(vortex_gamma(S), 0.0, S);
  const double L = extent.value_or(S == 1 ? 30.0 : S == 2 ? 10.0 : S == 3 ? 8.0 : 5.0);
  const Grid grid = Grid::half_line(L, resolved_samples(spec, L, ppw));
  WaveFunction wf;
  wf.grid = grid;
  wf.dimension = Dimension::radial;
  wf.convention = AmplitudeConvention::explicit_amplitude;
  wf.values.resize(grid.samples);
  for (std::size_t i = 0; i < grid.samples; ++i) wf.values[i] = grid.at(i) > 0.0 ? exact_vortex(S, 1.0, grid.at(i)) : 0.0;
  return norm_curve(wf, spec, default_truncations(wf));
}

}  // namespace xbound
