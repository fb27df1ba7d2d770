#pragma once

// Radial states with vorticity S. The centrifugal singularity at r = 0 is
// bridged by a Frobenius series r^S sum_p a_p r^p evaluated up to a handoff
// radius epsilon, after which the ODE is integrated outward.
//
// Substituting the series into
//   phi'' + phi'/r - S^2 phi / r^2 = (-2E - r^{2 gamma}) phi + 2 g phi^3
// and collecting r^{S+p-2} gives
//   p (2S + p) a_p = -2E a_{p-2} - a_{p-2-2gamma} + 2g [phi^3]_{p-2S-2},
// where [phi^3]_q is the coefficient of r^{3S+q} in the cube. The lowest
// correction is a_2 = -E a_0 / (2(S+1)) (plus g a_0^3 / 2 when S = 0); the
// potential first appears at p = 2 gamma + 2.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "xbound/closedform.hpp"
#include "xbound/solver1d.hpp"

namespace xbound {

struct RadialStart {
  std::optional<double> epsilon;  // default: four grid cells
  double a0 = 1.0;
  std::optional<double> a2;  // if given, must agree with the series matching
  double max_truncation = 1e-6;
};

inline double frobenius_a2(const ProblemSpec& spec, double a0) {
  const int S = spec.S();
  double a2 = -spec.energy * a0 / (2.0 * (S + 1));
  if (S == 0) a2 += spec.g * a0 * a0 * a0 / 2.0;
  return a2;
}

class FrobeniusSeries {
 public:
  FrobeniusSeries(const ProblemSpec& spec, double a0, double max_offset = 24.0) : S_(spec.S()) {
    const double step_pot = 2.0 * spec.gamma + 2.0;
    const double step_nl = 2.0 * S_ + 2.0;
    std::vector<double> offsets;
    for (int j = 0; j * step_pot <= max_offset; ++j)
      for (int m = 0; j * step_pot + m * step_nl <= max_offset; ++m) {
        if (m > 0 && spec.g == 0) break;
        for (int i = 0; j * step_pot + m * step_nl + 2 * i <= max_offset; ++i)
          offsets.push_back(j * step_pot + m * step_nl + 2.0 * i);
      }
    std::sort(offsets.begin(), offsets.end());
    for (double p : offsets)
      if (terms_.empty() || p - terms_.back().first > 1e-9) terms_.push_back({p, 0.0});

    terms_[0].second = a0;
    for (std::size_t k = 1; k < terms_.size(); ++k) {
      const double p = terms_[k].first;
      double rhs = -2.0 * spec.energy * coefficient(p - 2.0) - coefficient(p - step_pot);
      if (spec.g != 0) rhs += 2.0 * spec.g * cube_coefficient(p - step_nl, k);
      terms_[k].second = rhs / (p * (2.0 * S_ + p));
    }
  }

  double coefficient(double p) const {
    for (const auto& [q, a] : terms_)
      if (std::abs(q - p) <= 1e-9) return a;
    return 0.0;
  }

  double value(double r) const {
    double s = 0.0;
    for (const auto& [p, a] : terms_) s += a * std::pow(r, p);
    return s * std::pow(r, S_);
  }

  double derivative(double r) const {
    double s = 0.0;
    for (const auto& [p, a] : terms_) s += a * (S_ + p) * std::pow(r, S_ + p - 1.0);
    return s;
  }

  // Relative size of the highest retained band of terms at radius r; the
  // omitted remainder is of the same order or smaller.
  double truncation_estimate(double r) const {
    const double a0 = std::abs(terms_[0].second);
    const double top = terms_.back().first;
    double est = 0.0;
    for (const auto& [p, a] : terms_)
      if (p > 0.5 * top) est = std::max(est, std::abs(a) * std::pow(r, p));
    return est / a0;
  }

  const std::vector<std::pair<double, double>>& terms() const { return terms_; }

 private:
  // Coefficient of r^{3S + q} in (sum a_p r^p)^3 using the first `known` terms.
  double cube_coefficient(double q, std::size_t known) const {
    if (q < -1e-9) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < known; ++i)
      for (std::size_t j = 0; j < known; ++j) {
        const double rest = q - terms_[i].first - terms_[j].first;
        if (rest < -1e-9) continue;
        for (std::size_t k = 0; k < known; ++k)
          if (std::abs(terms_[k].first - rest) <= 1e-9) s += terms_[i].second * terms_[j].second * terms_[k].second;
      }
    return s;
  }

  int S_;
  std::vector<std::pair<double, double>> terms_;
};

inline double radial_rhs(const ProblemSpec& spec, double r, double phi, double dphi) {
  const double S = spec.S();
  double out = -dphi / r + (S * S / (r * r) - 2.0 * spec.energy - steep_power(r, spec.gamma)) * phi;
  if (spec.g != 0) out += 2.0 * spec.g * phi * phi * phi;
  return out;
}

inline WaveFunction solve_stationary_2d(const ProblemSpec& spec, const ShootConfig& cfg,
                                        const RadialStart& start = {}) {
  spec.validate();
  if (spec.dimension != Dimension::radial) throw ConfigError("solve_stationary_2d needs a 2D-radial problem");
  if (!(start.a0 != 0.0) || !std::isfinite(start.a0)) throw ConfigError("leading coefficient a0 must be non-zero");
  const Grid grid = shoot_grid(spec, cfg);
  const double h = grid.spacing();
  const double eps = start.epsilon.value_or(4.0 * h);
  if (!(eps > 0.0) || eps >= 0.5 * grid.extent) throw ConfigError("handoff radius epsilon out of range");

  const FrobeniusSeries series(spec, start.a0);
  if (start.a2) {
    const double expect = frobenius_a2(spec, start.a0);
    if (std::abs(*start.a2 - expect) > 1e-10 * std::max(1.0, std::abs(expect)))
      throw ConfigError("a2 is inconsistent with the Frobenius matching (expected " + std::to_string(expect) + ")");
  }
  const double trunc = series.truncation_estimate(eps);
  if (trunc > start.max_truncation)
    throw ConfigError("epsilon too large: series truncation estimate " + std::to_string(trunc) + " exceeds " +
                      std::to_string(start.max_truncation));

  WaveFunction wf;
  wf.grid = grid;
  wf.dimension = Dimension::radial;
  wf.convention = (spec.linear() && start.a0 == 1.0) ? AmplitudeConvention::unit_leading_term
                                                     : AmplitudeConvention::explicit_amplitude;
  wf.values.assign(grid.samples, 0.0);
  wf.slopes.assign(grid.samples, 0.0);

  std::size_t first = 0;
  while (first < grid.samples && grid.at(first) <= eps * (1.0 + 1e-12)) {
    wf.values[first] = series.value(grid.at(first));
    wf.slopes[first] = series.derivative(grid.at(first));
    ++first;
  }
  if (first >= grid.samples) throw ConfigError("epsilon covers the whole grid");

  const auto rhs = [&spec](double r, double y, double dy) { return radial_rhs(spec, r, y, dy); };
  const auto weight = [&spec](double r) { return detail::error_weight(spec, r); };
  detail::Stepper<decltype(rhs), decltype(weight)> bridge(rhs, weight, detail::integrator_options(cfg));
  detail::State s{series.value(eps), series.derivative(eps)};
  if (grid.at(first) > eps) s = bridge.advance(eps, grid.at(first), s);
  ShootConfig tail_cfg = cfg;
  tail_cfg.amplitude = std::abs(start.a0) * std::max(1.0, std::pow(eps, spec.S()));
  detail::integrate_tail(spec, tail_cfg, rhs, first, s, wf);
  return wf;
}

struct VortexComparison {
  double max_relative_deviation = 0.0;
  double scale = 0.0;  // least-squares factor applied to the numeric profile
  double window_inner = 0.0;
  double window_outer = 0.0;
};

// Amplitude-matched comparison of a numeric S-vortex with the closed form over
// [epsilon, 0.9 L]; deviation is max |c phi - exact| / max |exact|.
inline VortexComparison compare_exact_vortex(int S, const WaveFunction& wf, double epsilon) {
  const double outer = 0.9 * wf.grid.end();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < wf.size(); ++i) {
    const double r = wf.x(i);
    if (r < epsilon || r > outer) continue;
    const double ex = exact_vortex(S, 1.0, r);
    num += wf.values[i] * ex;
    den += wf.values[i] * wf.values[i];
  }
  if (!(den > 0.0)) throw NumericalError("empty comparison window");
  VortexComparison out;
  out.scale = num / den;
  out.window_inner = epsilon;
  out.window_outer = outer;
  double worst = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < wf.size(); ++i) {
    const double r = wf.x(i);
    if (r < epsilon || r > outer) continue;
    const double ex = exact_vortex(S, 1.0, r);
    worst = std::max(worst, std::abs(out.scale * wf.values[i] - ex));
    peak = std::max(peak, std::abs(ex));
  }
  out.max_relative_deviation = worst / peak;
  return out;
}

inline double verify_exact_vortex(int S, const ShootConfig& cfg, const RadialStart& start = {}) {
  if (S < 1) throw ConfigError("verify_exact_vortex needs S >= 1");
  const ProblemSpec spec = ProblemSpec::radial(vortex_gamma(S), 0.0, S);
  const WaveFunction wf = solve_stationary_2d(spec, cfg, start);
  const double eps = start.epsilon.value_or(4.0 * wf.grid.spacing());
  return compare_exact_vortex(S, wf, eps).max_relative_deviation;
}

}  // namespace xbound
