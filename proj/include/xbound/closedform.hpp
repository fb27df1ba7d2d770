#pragma once

// Closed-form tails and exact states, with pointwise residual checks.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "xbound/model.hpp"

namespace xbound {

struct AsymptoteParams {
  double phi0 = 1.0;
  double chi0 = 0.0;
  std::optional<double> core_scale;  // l, only for gamma = 1 with E != 0
  int order = 1;

  void validate(const ProblemSpec& spec) const {
    if (order < 1 || order > 3) throw ConfigError("asymptote order must be 1, 2 or 3");
    if (!(phi0 > 0.0)) throw ConfigError("asymptote amplitude phi0 must be positive");
    if (core_scale && !(*core_scale > 0.0)) throw ConfigError("core scale l must be positive");
    if (spec.gamma == 1.0 && spec.energy != 0.0 && !core_scale)
      throw ConfigError("gamma = 1 with E != 0 needs the core scale l");
  }
};

// The tail is phi0 * (cos_amp * cos(phase - chi0) + sin_amp * sin(phase - chi0)).
// Every tail model in the family has this shape, which makes fitting linear.
struct TailTerms {
  double cos_amp = 0.0;
  double sin_amp = 0.0;
  double phase = 0.0;
};

namespace detail {

inline double reduced(double phase) { return std::fmod(phase, 2.0 * std::numbers::pi); }

// Coefficient of the third-order tail term in the radial problem. The Bessel
// expansion of the E = 0 solution J_{S/(gamma+1)}(r^{gamma+1}/(gamma+1)) gives
// ((gamma+1)^2 - 4 S^2) / (8 (gamma+1)); setting 4 S^2 = 1 recovers the 1D value.
inline double radial_third_order(double gamma, int S) {
  return ((gamma + 1.0) * (gamma + 1.0) - 4.0 * S * S) / (8.0 * (gamma + 1.0));
}

}  // namespace detail

inline TailTerms power_tail_terms(const ProblemSpec& spec, double x, int order) {
  const double gamma = spec.gamma;
  const double E = spec.energy;
  TailTerms t;
  t.phase = detail::reduced(std::pow(x, gamma + 1.0) / (gamma + 1.0));
  if (spec.dimension == Dimension::line) {
    t.cos_amp = std::pow(x, -gamma / 2.0);
    if (order >= 2) t.sin_amp += E / (gamma - 1.0) * std::pow(x, 1.0 - 1.5 * gamma);
    if (order >= 3) t.sin_amp += gamma * (gamma + 2.0) / (8.0 * (gamma + 1.0)) * std::pow(x, -1.5 * gamma - 1.0);
  } else {
    t.cos_amp = std::pow(x, -(gamma + 1.0) / 2.0);
    if (order >= 2) t.sin_amp += E / (gamma - 1.0) * std::pow(x, -(3.0 * gamma - 1.0) / 2.0);
    if (order >= 3)
      t.sin_amp += detail::radial_third_order(gamma, spec.S()) * std::pow(x, -1.5 * (gamma + 1.0));
  }
  return t;
}

inline TailTerms antiho_tail_terms(const ProblemSpec& spec, double x, double core_scale) {
  TailTerms t;
  t.cos_amp = spec.dimension == Dimension::line ? 1.0 / std::sqrt(x) : 1.0 / x;
  const double log_term = spec.energy == 0.0 ? 0.0 : spec.energy * std::log(x / core_scale);
  t.phase = detail::reduced(0.5 * x * x) + log_term;
  return t;
}

inline double evaluate(const TailTerms& t, double phi0, double chi0) {
  const double arg = t.phase - chi0;
  return phi0 * (t.cos_amp * std::cos(arg) + t.sin_amp * std::sin(arg));
}

inline double asymptotic_tail(const ProblemSpec& spec, const AsymptoteParams& params, double coordinate) {
  if (!(spec.gamma > 1.0)) throw ConfigError("asymptotic_tail needs gamma > 1; use antiho_tail for gamma = 1");
  if (!(coordinate > 0.0)) throw ConfigError("asymptotic_tail needs a positive coordinate");
  params.validate(spec);
  return evaluate(power_tail_terms(spec, coordinate, params.order), params.phi0, params.chi0);
}

inline double antiho_tail(const ProblemSpec& spec, const AsymptoteParams& params, double coordinate) {
  if (spec.gamma != 1.0) throw ConfigError("antiho_tail is the gamma = 1 form");
  if (!(coordinate > 0.0)) throw ConfigError("antiho_tail needs a positive coordinate");
  params.validate(spec);
  if (params.order != 1) throw ConfigError("the gamma = 1 tail has no higher-order terms (E/(gamma-1) diverges)");
  return evaluate(antiho_tail_terms(spec, coordinate, params.core_scale.value_or(1.0)), params.phi0, params.chi0);
}

inline TailTerms tail_terms(const ProblemSpec& spec, double x, int order, double core_scale = 1.0) {
  if (spec.gamma > 1.0) return power_tail_terms(spec, x, order);
  if (order != 1) throw ConfigError("the gamma = 1 tail has no higher-order terms (E/(gamma-1) diverges)");
  return antiho_tail_terms(spec, x, core_scale);
}

inline double tail_model(const ProblemSpec& spec, const AsymptoteParams& params, double coordinate) {
  return spec.gamma > 1.0 ? asymptotic_tail(spec, params, coordinate) : antiho_tail(spec, params, coordinate);
}

// Leading-order envelope phi0 * x^{-gamma/2} (1D) or phi0 * r^{-(gamma+1)/2} (2D).
inline double tail_envelope(const ProblemSpec& spec, double phi0, double x) {
  const double p = spec.dimension == Dimension::line ? spec.gamma / 2.0 : (spec.gamma + 1.0) / 2.0;
  return phi0 * std::pow(x, -p);
}

// ---------------------------------------------------------------------------
// Exact vortices: phi0 r^{-S} sin(r^{2S} / 2S) solves the linear E = 0 radial
// problem with gamma = 2S - 1.

inline double vortex_gamma(int S) { return 2.0 * S - 1.0; }

template <class T = double>
T exact_vortex(int S, T phi0, T r) {
  if (S < 1) throw ConfigError("exact vortices need S >= 1");
  using std::pow;
  using std::sin;
  using std::fmod;
  if (r == T(0)) return T(0);
  const T two_pi = 2 * std::numbers::pi_v<T>;
  const T u = pow(r, T(2 * S)) / T(2 * S);
  return phi0 / pow(r, T(S)) * sin(fmod(u, two_pi));
}

struct Divergent {
  bool operator==(const Divergent&) const = default;
};
using NormValue = std::variant<double, Divergent>;

inline bool is_divergent(const NormValue& v) { return std::holds_alternative<Divergent>(v); }

inline NormValue exact_vortex_norm(int S, double phi0) {
  if (S < 1) throw ConfigError("exact vortices need S >= 1");
  if (S == 1) return Divergent{};
  const double s = S;
  const double pi = std::numbers::pi;
  return phi0 * phi0 * pi * std::tgamma(1.0 / s) / (2.0 * std::pow(s, 1.0 - 1.0 / s) * (s - 1.0)) *
         std::cos(pi / 2.0 * (1.0 - 1.0 / s));
}

// ---------------------------------------------------------------------------
// von Neumann-Wigner: U(r) = 1/r^2 - 9 r^4 / 2 carries sin(r^3)/r^2 at zero energy
// in the 3D radial equation.

template <class T = double>
struct VnwPoint {
  T potential;
  T wavefunction;
};

template <class T = double>
VnwPoint<T> vnw_state(T r) {
  if (!(r > 0)) throw ConfigError("vnw_state needs r > 0");
  using std::sin;
  return {T(1) / (r * r) - T(4.5) * r * r * r * r, sin(r * r * r) / (r * r)};
}

// ---------------------------------------------------------------------------
// Coupled trapped (u) / expulsive (v) pair with linear coupling lambda.

struct CoupledSystemSpec {
  double lambda = 1.0;
  double kappa = 0.0;
  double omega = 0.0;
  int S = 0;
  double E = 0.0;
  double U0 = 1.0;

  // Parameters on the solvability constraint omega = (5 + S - lambda^2) / 2,
  // with E set to the exact eigenvalue.
  static CoupledSystemSpec on_constraint(int S, double lambda, double kappa = 0.0, double U0 = 1.0) {
    CoupledSystemSpec c;
    c.S = S;
    c.lambda = lambda;
    c.kappa = kappa;
    c.U0 = U0;
    c.omega = 0.5 * (5.0 + S - lambda * lambda);
    c.E = c.exact_energy();
    return c;
  }

  double exact_energy() const { return 0.5 * (lambda * lambda + 1.0 + S); }

  bool constraint_satisfied(double tol = 1e-12) const {
    return std::abs(omega - 0.5 * (5.0 + S - lambda * lambda)) <= tol * std::max(1.0, std::abs(omega));
  }
};

struct CoupledFields {
  Grid grid;
  std::vector<double> U;
  std::vector<double> V;
  double exact_energy = 0.0;
};

inline CoupledFields coupled_exact_fields(const CoupledSystemSpec& spec, const Grid& grid) {
  if (!spec.constraint_satisfied()) throw ConfigError("coupled exact solution requires omega = (5 + S - lambda^2)/2");
  if (!std::isfinite(spec.U0)) throw ConfigError("U0 must be finite");
  if (spec.S < 0) throw ConfigError("vorticity must be non-negative");
  grid.validate();
  CoupledFields f;
  f.grid = grid;
  f.exact_energy = spec.exact_energy();
  f.U.resize(grid.samples);
  f.V.resize(grid.samples);
  const double c = spec.lambda * spec.lambda - 1.0 - spec.S;
  for (std::size_t i = 0; i < grid.samples; ++i) {
    const double r = grid.at(i);
    const double base = spec.U0 * std::pow(r, spec.S) * std::exp(-0.5 * r * r);
    f.U[i] = (c + r * r) * base;
    f.V[i] = -2.0 * spec.lambda * base;
  }
  return f;
}

struct CoupledResidual {
  std::vector<double> r;
  std::vector<double> res_u;
  std::vector<double> res_v;
  double error_estimate = 0.0;  // discretization error bound on the residual samples

  double max_abs_u(double r_min, double r_max) const { return max_abs(res_u, r_min, r_max); }
  double max_abs_v(double r_min, double r_max) const { return max_abs(res_v, r_min, r_max); }

 private:
  double max_abs(const std::vector<double>& v, double lo, double hi) const {
    double m = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
      if (r[i] >= lo && r[i] <= hi) m = std::max(m, std::abs(v[i]));
    return m;
  }
};

namespace detail {

// Radial operator d2 + d1/r - S^2/r^2 on grid samples, Richardson-refined from
// centered differences at spacings m*h and 2*m*h.
struct RadialStencil {
  const std::vector<double>& f;
  double h;
  int S;

  double d2(std::size_t i, std::size_t m) const {
    const double s = static_cast<double>(m) * h;
    return (f[i + m] - 2.0 * f[i] + f[i - m]) / (s * s);
  }
  double d1(std::size_t i, std::size_t m) const {
    return (f[i + m] - f[i - m]) / (2.0 * static_cast<double>(m) * h);
  }
  double laplacian(std::size_t i, std::size_t m, double r) const {
    const double D2 = (4.0 * d2(i, m) - d2(i, 2 * m)) / 3.0;
    const double D1 = (4.0 * d1(i, m) - d1(i, 2 * m)) / 3.0;
    return D2 + D1 / r - static_cast<double>(S * S) * f[i] / (r * r);
  }
};

}  // namespace detail

// Stationary left-hand sides of the coupled pair with u, v ~ exp(-iEt + iS theta):
//   u: (E + omega) U + (1/2) Lap_S U + lambda V - (1/2) r^2 U
//   v:  E V + (1/2) Lap_S V + lambda U + (1/2) kappa r^2 V
// Lap_S is the standard polar Laplacian (centrifugal term -S^2/r^2).
inline CoupledResidual coupled_residual(const CoupledSystemSpec& spec, const CoupledFields& fields,
                                        double tolerance = 1e-8) {
  const std::size_t n = fields.grid.samples;
  if (fields.U.size() != n || fields.V.size() != n) throw ConfigError("coupled fields do not match their grid");
  if (n < 12) throw ConfigError("coupled_residual needs at least 12 samples");
  const double h = fields.grid.spacing();
  detail::RadialStencil su{fields.U, h, spec.S};
  detail::RadialStencil sv{fields.V, h, spec.S};

  auto eval = [&](std::size_t i, std::size_t m) {
    const double r = fields.grid.at(i);
    const double ru = (spec.E + spec.omega) * fields.U[i] + 0.5 * su.laplacian(i, m, r) + spec.lambda * fields.V[i] -
                      0.5 * r * r * fields.U[i];
    const double rv = spec.E * fields.V[i] + 0.5 * sv.laplacian(i, m, r) + spec.lambda * fields.U[i] +
                      0.5 * spec.kappa * r * r * fields.V[i];
    return std::pair{ru, rv};
  };

  CoupledResidual out;
  for (std::size_t i = 4; i + 4 < n; ++i) {
    const double r = fields.grid.at(i);
    if (!(r > 0.0)) continue;
    const auto [ru, rv] = eval(i, 1);
    const auto [ru2, rv2] = eval(i, 2);
    out.error_estimate = std::max({out.error_estimate, std::abs(ru - ru2) / 15.0, std::abs(rv - rv2) / 15.0});
    out.r.push_back(r);
    out.res_u.push_back(ru);
    out.res_v.push_back(rv);
  }
  if (out.error_estimate > tolerance)
    throw ConfigError("grid too coarse for coupled_residual: discretization error estimate " +
                      std::to_string(out.error_estimate) + " exceeds tolerance " + std::to_string(tolerance));
  return out;
}

// v-equation residual of the exact pair, by hand: Lap_S(r^S e^{-r^2/2}) =
// (r^2 - 2S - 2) r^S e^{-r^2/2}, so every term cancels except the expulsive one,
// leaving -lambda kappa U0 r^{S+2} e^{-r^2/2}. It vanishes only for kappa = 0.
inline double coupled_v_residual_closed_form(const CoupledSystemSpec& spec, double r) {
  return -spec.lambda * spec.kappa * spec.U0 * std::pow(r, spec.S + 2) * std::exp(-0.5 * r * r);
}

// ---------------------------------------------------------------------------
// Nonlinear vortex amplitude: balancing the first harmonic of g phi^3 against
// the centrifugal mismatch gives phi0^2 = -2 (S^2 - 1) / (3 g).

inline std::optional<double> nonlinear_vortex_amplitude(int S, int g) {
  if (g != -1 && g != 1) throw ConfigError("nonlinear_vortex_amplitude needs g = +1 or -1");
  if (S < 0) throw ConfigError("vorticity must be non-negative");
  const double sq = -2.0 * (static_cast<double>(S) * S - 1.0) / (3.0 * g);
  if (!(sq > 0.0)) return std::nullopt;
  return sq;
}

// Approximate nonlinear state phi0 sin(r^2/2) / r for gamma = 1, E = 0.
inline double approx_nonlinear_vortex(double phi0, double r) { return phi0 * std::sin(0.5 * r * r) / r; }

// ---------------------------------------------------------------------------
// Residual checks evaluated pointwise on closed forms, in extended precision.

namespace detail {

template <class F>
long double d2_level(const F& f, long double x, long double h) {
  return (f(x + h) - 2.0L * f(x) + f(x - h)) / (h * h);
}

template <class F>
long double d1_level(const F& f, long double x, long double h) {
  return (f(x + h) - f(x - h)) / (2.0L * h);
}

// Two Richardson levels on top of centered differences: O(h^6).
template <class F, class Level>
long double richardson(const F& f, long double x, long double h, Level level) {
  const long double a = level(f, x, h);
  const long double b = level(f, x, h / 2);
  const long double c = level(f, x, h / 4);
  const long double ab = (4.0L * b - a) / 3.0L;
  const long double bc = (4.0L * c - b) / 3.0L;
  return (16.0L * bc - ab) / 15.0L;
}

template <class F>
long double second_derivative(const F& f, long double x, long double h) {
  return richardson(f, x, h, [](const F& g, long double y, long double s) { return d2_level(g, y, s); });
}

template <class F>
long double first_derivative(const F& f, long double x, long double h) {
  return richardson(f, x, h, [](const F& g, long double y, long double s) { return d1_level(g, y, s); });
}

}  // namespace detail

struct ResidualReport {
  double max_relative = 0.0;  // |residual| / magnitude of the individual terms
  double worst_coordinate = 0.0;
  std::size_t points = 0;
};

// Relative residual of the radial equation
//   E phi = -(1/2)(phi'' + (d-1) phi'/r - S^2 phi / r^2) + U(r) phi
// sampled on `points` uniform coordinates in [r_min, r_max]. `wavenumber`
// bounds the local oscillation rate and sets the difference step.
template <class Profile, class Potential, class Wavenumber>
ResidualReport radial_residual(const Profile& phi, const Potential& potential, const Wavenumber& wavenumber,
                               int space_dim, int S, double energy, double r_min, double r_max,
                               std::size_t points) {
  ResidualReport rep;
  rep.points = points;
  for (std::size_t i = 0; i < points; ++i) {
    const long double r = r_min + (r_max - r_min) * static_cast<long double>(i) / static_cast<long double>(points - 1);
    const long double k = std::max<long double>({1.0L / r, wavenumber(r), 1.0L});
    const long double h = 0.03L / k;
    const long double f = phi(r);
    const long double d2 = detail::second_derivative(phi, r, h);
    const long double d1 = detail::first_derivative(phi, r, h);
    const long double cent = static_cast<long double>(S) * S * f / (r * r);
    const long double pot = potential(r) * f;
    const long double kin = -0.5L * (d2 + (space_dim - 1) * d1 / r - cent);
    const long double res = kin + pot - energy * f;
    // Near nodes the pointwise terms all vanish; the local oscillation
    // amplitude sqrt(f^2 + (f'/k)^2) keeps the normalisation finite there.
    const long double amplitude = std::sqrt(f * f + (d1 / k) * (d1 / k));
    const long double scale = std::max(
        0.5L * (std::abs(d2) + (space_dim - 1) * std::abs(d1 / r) + std::abs(cent)) + std::abs(pot) +
            std::abs(energy * f),
        0.5L * k * k * amplitude);
    const double rel = scale > 0 ? static_cast<double>(std::abs(res) / scale) : 0.0;
    if (rel > rep.max_relative) {
      rep.max_relative = rel;
      rep.worst_coordinate = static_cast<double>(r);
    }
  }
  return rep;
}

inline ResidualReport exact_vortex_residual(int S, double r_min, double r_max, std::size_t points = 20001) {
  const long double gamma = vortex_gamma(S);
  auto phi = [S](long double r) { return exact_vortex<long double>(S, 1.0L, r); };
  auto pot = [gamma](long double r) { return -0.5L * std::pow(r, 2.0L * gamma); };
  auto k = [gamma](long double r) { return std::pow(r, gamma); };
  return radial_residual(phi, pot, k, 2, S, 0.0, r_min, r_max, points);
}

inline ResidualReport vnw_residual(double r_min, double r_max, std::size_t points = 20001) {
  auto phi = [](long double r) { return vnw_state<long double>(r).wavefunction; };
  auto pot = [](long double r) { return vnw_state<long double>(r).potential; };
  auto k = [](long double r) { return 3.0L * r * r; };
  return radial_residual(phi, pot, k, 3, 0, 0.0, r_min, r_max, points);
}

}  // namespace xbound
