#pragma once

// Problem definitions shared by every solver, with sampling grids and sampled
// fields. The potential is -x^{2 gamma}/2.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xbound {

class Error : public std::runtime_error {
 public:
  enum class Kind { config, numerical };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Invalid input or an unresolved grid.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Kind::config, what) {}
};

// Numerical breakdown such as runaway growth or a failed fit.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, std::optional<double> where = {})
      : Error(Kind::numerical, what), where_(where) {}
  std::optional<double> where() const noexcept { return where_; }

 private:
  std::optional<double> where_;
};

enum class Dimension { line, radial };
enum class Parity { even, odd };

inline const char* to_string(Dimension d) { return d == Dimension::line ? "1D" : "2D-radial"; }
inline const char* to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

struct ProblemSpec {
  Dimension dimension = Dimension::line;
  double gamma = 1.0;
  int g = 0;
  int sigma = 1;
  double energy = 0.0;
  std::optional<Parity> parity = Parity::even;
  std::optional<int> vorticity;

  static ProblemSpec line(double gamma, double energy, Parity parity, int g = 0, int sigma = 1) {
    ProblemSpec s;
    s.dimension = Dimension::line;
    s.gamma = gamma;
    s.energy = energy;
    s.parity = parity;
    s.g = g;
    s.sigma = sigma;
    s.validate();
    return s;
  }

  static ProblemSpec radial(double gamma, double energy, int vorticity, int g = 0) {
    ProblemSpec s;
    s.dimension = Dimension::radial;
    s.gamma = gamma;
    s.energy = energy;
    s.parity.reset();
    s.vorticity = vorticity;
    s.g = g;
    s.sigma = 1;
    s.validate();
    return s;
  }

  void validate() const {
    if (!std::isfinite(gamma) || gamma < 1.0)
      throw ConfigError("gamma must be >= 1 (got " + std::to_string(gamma) + ")");
    if (sigma != 1 && sigma != 2)
      throw ConfigError("sigma must be 1 (cubic) or 2 (quintic)");
    if (g < -1 || g > 1) throw ConfigError("g must be -1, 0 or +1");
    if (!std::isfinite(energy)) throw ConfigError("energy must be finite");
    if (dimension == Dimension::line) {
      if (!parity) throw ConfigError("1D problems need a parity");
      if (vorticity) throw ConfigError("vorticity is only meaningful for 2D-radial problems");
    } else {
      if (parity) throw ConfigError("parity is only meaningful for 1D problems");
      if (!vorticity || *vorticity < 0) throw ConfigError("2D-radial problems need a vorticity S >= 0");
      if (sigma != 1) throw ConfigError("2D-radial problems carry the cubic term only");
    }
  }

  bool linear() const noexcept { return g == 0; }
  int S() const noexcept { return vorticity.value_or(0); }
};

// x^{2 gamma} with an exact integer-power path for the common cases.
inline double steep_power(double x, double gamma) {
  const double two_gamma = 2.0 * gamma;
  if (two_gamma == std::floor(two_gamma) && two_gamma <= 16.0) {
    double out = 1.0;
    for (int k = 0; k < static_cast<int>(two_gamma); ++k) out *= x;
    return out;
  }
  return std::pow(x, two_gamma);
}

inline double potential_value(const ProblemSpec& spec, double coordinate) {
  if (!std::isfinite(coordinate) || coordinate < 0.0)
    throw ConfigError("potential_value needs a finite non-negative coordinate");
  return -0.5 * steep_power(coordinate, spec.gamma);
}

inline double nonlinear_term(const ProblemSpec& spec, double amplitude) {
  if (spec.sigma != 1 && spec.sigma != 2) throw ConfigError("sigma must be 1 or 2");
  if (amplitude < 0.0) throw ConfigError("nonlinear_term needs a non-negative amplitude");
  const int power = 2 * spec.sigma + 1;
  double out = 1.0;
  for (int k = 0; k < power; ++k) out *= amplitude;
  return spec.g * out;
}

// Upper bound on the local wavenumber up to coordinate x.
inline double local_wavenumber(const ProblemSpec& spec, double x) {
  return std::sqrt(steep_power(x, spec.gamma) + 2.0 * std::max(spec.energy, 0.0));
}

struct Grid {
  double start = 0.0;
  double extent = 1.0;
  std::size_t samples = 2;

  static Grid half_line(double extent, std::size_t samples) {
    Grid g{0.0, extent, samples};
    g.validate();
    return g;
  }

  void validate() const {
    if (!(extent > 0.0) || !std::isfinite(extent)) throw ConfigError("grid extent must be positive");
    if (samples < 2) throw ConfigError("grid needs at least two samples");
  }

  double spacing() const noexcept { return extent / static_cast<double>(samples - 1); }
  double at(std::size_t i) const noexcept { return start + spacing() * static_cast<double>(i); }
  double end() const noexcept { return start + extent; }
};

// Smallest sample count on [0, L] whose spacing keeps `ppw` points per local
// wavelength at the edge of the domain.
inline std::size_t resolved_samples(const ProblemSpec& spec, double extent, int ppw) {
  const double k = std::max(local_wavenumber(spec, extent), 1.0);
  const double h = 2.0 * std::numbers::pi / (k * ppw);
  return static_cast<std::size_t>(std::ceil(extent / h)) + 1;
}

inline void check_resolution(const ProblemSpec& spec, const Grid& grid, int ppw) {
  const double edge = std::max(std::abs(grid.start), std::abs(grid.end()));
  const double k = std::max(local_wavenumber(spec, edge), 1.0);
  const double bound = 2.0 * std::numbers::pi / (k * ppw);
  if (grid.spacing() > bound * (1.0 + 1e-12))
    throw ConfigError("grid spacing " + std::to_string(grid.spacing()) + " exceeds the resolution bound " +
                      std::to_string(bound) + " for " + std::to_string(ppw) + " points per wavelength");
}

enum class AmplitudeConvention {
  unit_origin_value,   // phi(0) = 1, even 1D
  unit_origin_slope,   // phi'(0) = 1, odd 1D
  unit_leading_term,   // phi ~ r^S near the origin, 2D
  explicit_amplitude,  // nonlinear solves: caller chose the origin amplitude
};

// Real stationary field sampled on a half-line or radial grid. For linear
// problems the true field is values * exp(log_scale); the solver rescales on
// the fly so that exponentially growing cores do not overflow.
struct WaveFunction {
  Grid grid;
  Dimension dimension = Dimension::line;
  AmplitudeConvention convention = AmplitudeConvention::unit_origin_value;
  std::vector<double> values;
  std::vector<double> slopes;  // d(values)/dx, empty if unknown
  double log_scale = 0.0;

  std::size_t size() const noexcept { return values.size(); }
  double x(std::size_t i) const noexcept { return grid.at(i); }
  double scale() const { return std::exp(log_scale); }

  void validate() const {
    if (values.size() != grid.samples) throw ConfigError("wave function length does not match its grid");
    if (!slopes.empty() && slopes.size() != values.size())
      throw ConfigError("slope samples do not match the value samples");
    for (double v : values)
      if (!std::isfinite(v)) throw NumericalError("wave function holds non-finite values");
  }
};

}  // namespace xbound
