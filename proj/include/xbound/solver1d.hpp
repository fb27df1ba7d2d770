#pragma once

// Stationary 1D states by outward integration from the origin, and the
// structural features read off them.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "xbound/detail/ode.hpp"
#include "xbound/detail/parallel.hpp"
#include "xbound/detail/roots.hpp"
#include "xbound/model.hpp"

namespace xbound {

struct ShootConfig {
  double amplitude = 1.0;  // origin value (even) or slope (odd); a0 in 2D
  int points_per_wavelength = 16;
  double max_extent = 30.0;
  double tolerance = 1e-10;
  Stepping stepping = Stepping::adaptive;
  std::optional<std::size_t> samples;  // overrides the resolution-derived count
  double overflow_cap = 1e6;           // nonlinear runaway threshold, times max(1, amplitude)

  void validate() const {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw ConfigError("origin amplitude must be positive");
    if (points_per_wavelength < 8) throw ConfigError("points per wavelength must be at least 8");
    if (!(max_extent > 0.0) || !std::isfinite(max_extent)) throw ConfigError("max extent L must be positive");
    if (!(tolerance > 0.0) || tolerance >= 1e-2) throw ConfigError("integrator tolerance must lie in (0, 1e-2)");
    if (!(overflow_cap > 1.0)) throw ConfigError("overflow cap must exceed 1");
  }
};

inline Grid shoot_grid(const ProblemSpec& spec, const ShootConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.samples.value_or(resolved_samples(spec, cfg.max_extent, cfg.points_per_wavelength));
  Grid grid = Grid::half_line(cfg.max_extent, n);
  check_resolution(spec, grid, cfg.points_per_wavelength);
  return grid;
}

namespace detail {

inline constexpr double rescale_threshold = 1e100;

inline IntegratorOptions integrator_options(const ShootConfig& cfg) {
  IntegratorOptions o;
  o.stepping = cfg.stepping;
  o.rtol = cfg.tolerance;
  return o;
}

inline double error_weight(const ProblemSpec& spec, double x) {
  return std::sqrt(steep_power(x, spec.gamma) + 2.0 * std::abs(spec.energy) + 1.0);
}

// Shared by the 1D and radial solvers: integrate from grid index `first`
// (whose state is given) to the end of the grid, storing values and slopes.
template <class Rhs>
void integrate_tail(const ProblemSpec& spec, const ShootConfig& cfg, const Rhs& rhs, std::size_t first,
                    State s, WaveFunction& wf) {
  const auto weight = [&spec](double x) { return error_weight(spec, x); };
  Stepper<Rhs, decltype(weight)> stepper(rhs, weight, integrator_options(cfg));
  const double cap = cfg.overflow_cap * std::max(1.0, cfg.amplitude);
  wf.values[first] = s.y;
  wf.slopes[first] = s.dy;
  for (std::size_t i = first + 1; i < wf.grid.samples; ++i) {
    s = stepper.advance(wf.grid.at(i - 1), wf.grid.at(i), s);
    if (!std::isfinite(s.y) || !std::isfinite(s.dy)) throw NumericalError("non-finite solution", wf.grid.at(i));
    if (spec.linear()) {
      if (std::abs(s.y) > rescale_threshold || std::abs(s.dy) > rescale_threshold * weight(wf.grid.at(i))) {
        const double f = 1.0 / rescale_threshold;
        s.y *= f;
        s.dy *= f;
        for (std::size_t j = 0; j < i; ++j) {
          wf.values[j] *= f;
          wf.slopes[j] *= f;
        }
        wf.log_scale += std::log(rescale_threshold);
      }
    } else if (std::abs(s.y) > cap) {
      throw NumericalError("nonlinear runaway: |phi| exceeded " + std::to_string(cap) + " at x = " +
                               std::to_string(wf.grid.at(i)),
                           wf.grid.at(i));
    }
    wf.values[i] = s.y;
    wf.slopes[i] = s.dy;
  }
}

}  // namespace detail

// phi'' = -2 E phi - x^{2 gamma} phi + 2 g phi^{2 sigma + 1}
inline double line_rhs(const ProblemSpec& spec, double x, double phi) {
  double nl = 0.0;
  if (spec.g != 0) {
    const double p2 = phi * phi;
    nl = 2.0 * spec.g * phi * (spec.sigma == 1 ? p2 : p2 * p2);
  }
  return (-2.0 * spec.energy - steep_power(x, spec.gamma)) * phi + nl;
}

inline WaveFunction solve_stationary_1d(const ProblemSpec& spec, const ShootConfig& cfg) {
  spec.validate();
  if (spec.dimension != Dimension::line) throw ConfigError("solve_stationary_1d needs a 1D problem");
  const Grid grid = shoot_grid(spec, cfg);
  WaveFunction wf;
  wf.grid = grid;
  wf.dimension = Dimension::line;
  const bool even = *spec.parity == Parity::even;
  if (!spec.linear() || cfg.amplitude != 1.0)
    wf.convention = AmplitudeConvention::explicit_amplitude;
  else
    wf.convention = even ? AmplitudeConvention::unit_origin_value : AmplitudeConvention::unit_origin_slope;
  wf.values.assign(grid.samples, 0.0);
  wf.slopes.assign(grid.samples, 0.0);
  const auto rhs = [&spec](double x, double y, double) { return line_rhs(spec, x, y); };
  const detail::State s0 = even ? detail::State{cfg.amplitude, 0.0} : detail::State{0.0, cfg.amplitude};
  detail::integrate_tail(spec, cfg, rhs, 0, s0, wf);
  return wf;
}

// ---------------------------------------------------------------------------

struct StructureReport {
  std::vector<double> zeros;
  std::vector<double> inflexions;
  std::vector<bool> matched;  // per inflexion: within one grid cell of a zero
  std::vector<double> extra_inflexions;
  std::optional<double> x_max;
  double cell = 0.0;

  bool all_matched() const { return std::all_of(matched.begin(), matched.end(), [](bool b) { return b; }); }
};

inline std::vector<double> find_zeros(const WaveFunction& wf) {
  std::vector<double> xs(wf.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = wf.x(i);
  if (wf.slopes.size() == wf.size()) {
    auto z = detail::hermite_zeros(xs, wf.values, wf.slopes, 0);
    std::erase_if(z, [](double x) { return x <= 0.0; });
    return z;
  }
  std::vector<double> z;
  for (std::size_t i = 0; i + 1 < wf.size(); ++i)
    if (detail::sign_change(wf.values[i], wf.values[i + 1]))
      z.push_back(detail::linear_crossing(xs[i], xs[i + 1], wf.values[i], wf.values[i + 1]));
  return z;
}

// Global maximiser of |phi|. The slope zero is refined by re-integrating the
// ODE from the bracketing grid point, so the location inherits the accuracy
// of the sampled state rather than that of an interpolant.
inline double locate_xmax(const WaveFunction& wf, const ProblemSpec& spec) {
  if (wf.size() < 3) throw ConfigError("locate_xmax needs at least three samples");
  std::size_t best = 0;
  for (std::size_t i = 1; i < wf.size(); ++i)
    if (std::abs(wf.values[i]) > std::abs(wf.values[best])) best = i;
  if (best == 0 || best + 1 == wf.size() || wf.slopes.size() != wf.size()) return wf.x(best);
  const auto rhs = [&spec](double x, double y, double) { return line_rhs(spec, x, y); };
  const auto weight = [&spec](double x) { return detail::error_weight(spec, x); };
  detail::IntegratorOptions opt;
  opt.rtol = 1e-13;
  for (std::size_t i : {best - 1, best}) {
    if (!detail::sign_change(wf.slopes[i], wf.slopes[i + 1]) && wf.slopes[i] != 0.0) continue;
    const double x0 = wf.x(i);
    const detail::State s0{wf.values[i], wf.slopes[i]};
    const auto slope_at = [&](double x) {
      if (x <= x0) return s0.dy;
      detail::Stepper<decltype(rhs), decltype(weight)> st(rhs, weight, opt);
      return st.advance(x0, x, s0).dy;
    };
    return detail::bisect(slope_at, x0, wf.x(i + 1), 1e-15 * wf.x(i + 1));
  }
  return wf.x(best);
}

// Zeros from the sampled field; inflexions from sign changes of the discrete
// second difference, independent of the ODE right-hand side.
inline StructureReport classify_structure(const WaveFunction& wf, const ProblemSpec& spec) {
  if (!spec.linear()) throw ConfigError("classify_structure applies to the linear equation (g = 0) only");
  if (spec.dimension != Dimension::line) throw ConfigError("classify_structure needs a 1D state");
  wf.validate();
  StructureReport rep;
  rep.cell = wf.grid.spacing();
  rep.zeros = find_zeros(wf);
  const auto& v = wf.values;
  std::vector<double> d2(v.size(), 0.0);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) d2[i] = v[i + 1] - 2.0 * v[i] + v[i - 1];
  for (std::size_t i = 2; i + 2 < v.size(); ++i) {
    if (!detail::sign_change(d2[i], d2[i + 1])) continue;
    rep.inflexions.push_back(detail::linear_crossing(wf.x(i), wf.x(i + 1), d2[i], d2[i + 1]));
  }
  for (double xi : rep.inflexions) {
    const auto it = std::lower_bound(rep.zeros.begin(), rep.zeros.end(), xi);
    double dist = std::numeric_limits<double>::infinity();
    if (it != rep.zeros.end()) dist = std::min(dist, *it - xi);
    if (it != rep.zeros.begin()) dist = std::min(dist, xi - *(it - 1));
    const bool m = dist <= rep.cell;
    rep.matched.push_back(m);
    if (!m) rep.extra_inflexions.push_back(xi);
  }
  if (spec.energy < 0.0) rep.x_max = locate_xmax(wf, spec);
  return rep;
}

// Max |phi - phi(0) cos(k x)| / |phi(0)| over |x| <= E^{1/(2 gamma)} / 2 with
// k = sqrt(2E); odd states compare against phi'(0) sin(k x) / k.
inline double core_wave_check(const WaveFunction& wf, const ProblemSpec& spec) {
  if (!spec.linear()) throw ConfigError("core_wave_check applies to the linear equation (g = 0) only");
  if (spec.dimension != Dimension::line) throw ConfigError("core_wave_check needs a 1D state");
  const double E = spec.energy;
  if (E < 10.0) throw ConfigError("core_wave_check needs E >= 10");
  const double k = std::sqrt(2.0 * E);
  const double half = 0.5 * std::pow(E, 1.0 / (2.0 * spec.gamma));
  if (2.0 * half < 2.0 * std::numbers::pi / k) throw ConfigError("core region is shorter than one wavelength");
  if (half > wf.grid.end()) throw ConfigError("state does not cover the core region");
  const bool even = spec.parity.value_or(Parity::even) == Parity::even;
  if (!even && wf.slopes.size() != wf.size()) throw ConfigError("odd core check needs the origin slope");
  const double amp = even ? wf.values[0] : wf.slopes[0] / k;
  if (amp == 0.0) throw NumericalError("core amplitude vanishes");
  double worst = 0.0;
  for (std::size_t i = 0; i < wf.size() && wf.x(i) <= half; ++i) {
    const double ref = even ? amp * std::cos(k * wf.x(i)) : amp * std::sin(k * wf.x(i));
    worst = std::max(worst, std::abs(wf.values[i] - ref) / std::abs(amp));
  }
  return worst;
}

// ---------------------------------------------------------------------------

struct XmaxPoint {
  double energy = 0.0;
  double x_max = 0.0;
  double extent = 0.0;
};

struct ScanResult {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<XmaxPoint> points;
  std::vector<double> residuals;  // ln x_max - fit
};

// Domain that comfortably contains the turning point for E < 0.
inline double xmax_extent(double gamma, double energy) {
  return 1.5 * std::pow(-2.0 * energy, 1.0 / (2.0 * gamma));
}

inline ScanResult xmax_scan(double gamma, const std::vector<double>& energies, const ShootConfig& cfg,
                            unsigned workers = default_workers()) {
  if (energies.size() < 3) throw ConfigError("xmax_scan needs at least 3 energies");
  for (double E : energies)
    if (!(E < 0.0)) throw ConfigError("xmax_scan needs negative energies (got " + std::to_string(E) + ")");
  auto points = detail::parallel_map<XmaxPoint>(energies.size(), workers, [&](std::size_t i) {
    const double E = energies[i];
    const ProblemSpec spec = ProblemSpec::line(gamma, E, Parity::even);
    ShootConfig c = cfg;
    c.amplitude = 1.0;
    c.max_extent = xmax_extent(gamma, E);
    c.samples.reset();
    try {
      const WaveFunction wf = solve_stationary_1d(spec, c);
      return XmaxPoint{E, locate_xmax(wf, spec), c.max_extent};
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("xmax_scan failed at E = ") + std::to_string(E) + ": " + e.what(), e.where());
    }
  });
  ScanResult out;
  out.points = points;
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    const double lx = std::log(-p.energy), ly = std::log(p.x_max);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.intercept = (sy - out.slope * sx) / n;
  for (const auto& p : points) out.residuals.push_back(std::log(p.x_max) - out.intercept - out.slope * std::log(-p.energy));
  return out;
}

}  // namespace xbound
