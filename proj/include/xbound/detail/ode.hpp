#pragma once

// Outward integration of y'' = f(x, y, y') sampled on a uniform grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "xbound/model.hpp"

namespace xbound {

enum class Stepping { adaptive, fixed_rk4 };

namespace detail {

struct State {
  double y = 0.0;
  double dy = 0.0;
};

struct IntegratorOptions {
  Stepping stepping = Stepping::adaptive;
  double rtol = 1e-10;
  double atol = 1e-200;
  int rk4_substeps = 1;
  std::size_t max_steps_per_cell = 200000;
};

// Dormand-Prince 5(4) coefficients.
struct DP45 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

template <class Rhs>
State derivative(const Rhs& rhs, double x, const State& s) {
  return {s.dy, rhs(x, s.y, s.dy)};
}

inline State axpy(const State& s, double h, std::initializer_list<std::pair<double, State>> terms) {
  State out = s;
  for (const auto& [c, k] : terms) {
    out.y += h * c * k.y;
    out.dy += h * c * k.dy;
  }
  return out;
}

template <class Rhs>
State rk4_step(const Rhs& rhs, double x, const State& s, double h) {
  const State k1 = derivative(rhs, x, s);
  const State k2 = derivative(rhs, x + h / 2, axpy(s, h, {{0.5, k1}}));
  const State k3 = derivative(rhs, x + h / 2, axpy(s, h, {{0.5, k2}}));
  const State k4 = derivative(rhs, x + h, axpy(s, h, {{1.0, k3}}));
  return axpy(s, h, {{1.0 / 6, k1}, {1.0 / 3, k2}, {1.0 / 3, k3}, {1.0 / 6, k4}});
}

// Adaptive integrator that carries its step-size guess across cells.
// `weight(x)` converts y into the units of y' for the error norm.
template <class Rhs, class Weight>
class Stepper {
 public:
  Stepper(const Rhs& rhs, const Weight& weight, IntegratorOptions opt) : rhs_(rhs), weight_(weight), opt_(opt) {}

  State advance(double x0, double x1, State s) {
    if (opt_.stepping == Stepping::fixed_rk4) {
      const double h = (x1 - x0) / opt_.rk4_substeps;
      for (int k = 0; k < opt_.rk4_substeps; ++k) s = rk4_step(rhs_, x0 + k * h, s, h);
      return s;
    }
    double x = x0;
    if (!(h_ > 0.0)) h_ = (x1 - x0);
    State k1 = derivative(rhs_, x, s);
    std::size_t steps = 0;
    while (x < x1) {
      if (++steps > opt_.max_steps_per_cell)
        throw NumericalError("step-size control stalled", x);
      bool last = false;
      double h = h_;
      if (x + h >= x1 - 1e-14 * std::abs(x1)) {
        h = x1 - x;
        last = true;
      }
      using C = DP45;
      const State k2 = derivative(rhs_, x + C::c2 * h, axpy(s, h, {{C::a21, k1}}));
      const State k3 = derivative(rhs_, x + C::c3 * h, axpy(s, h, {{C::a31, k1}, {C::a32, k2}}));
      const State k4 = derivative(rhs_, x + C::c4 * h, axpy(s, h, {{C::a41, k1}, {C::a42, k2}, {C::a43, k3}}));
      const State k5 = derivative(rhs_, x + C::c5 * h,
                                  axpy(s, h, {{C::a51, k1}, {C::a52, k2}, {C::a53, k3}, {C::a54, k4}}));
      const State k6 = derivative(
          rhs_, x + h, axpy(s, h, {{C::a61, k1}, {C::a62, k2}, {C::a63, k3}, {C::a64, k4}, {C::a65, k5}}));
      const State next = axpy(s, h, {{C::b1, k1}, {C::b3, k3}, {C::b4, k4}, {C::b5, k5}, {C::b6, k6}});
      const State k7 = derivative(rhs_, x + h, next);
      const State err = axpy(State{}, h, {{C::e1, k1}, {C::e3, k3}, {C::e4, k4}, {C::e5, k5}, {C::e6, k6}, {C::e7, k7}});

      const double w = weight_(x + h);
      const double size = std::hypot(w * std::max(std::abs(s.y), std::abs(next.y)),
                                     std::max(std::abs(s.dy), std::abs(next.dy)));
      const double ratio = std::hypot(w * err.y, err.dy) / (opt_.atol + opt_.rtol * size);
      if (!std::isfinite(ratio)) throw NumericalError("non-finite integrator state", x);
      const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
      if (ratio <= 1.0) {
        x = last ? x1 : x + h;
        s = next;
        k1 = k7;
        if (!last || factor < 1.0) h_ = h * factor;
        if (last) break;
      } else {
        h_ = h * factor;
      }
    }
    h_ = std::min(h_, x1 - x0);
    return s;
  }

 private:
  const Rhs& rhs_;
  const Weight& weight_;
  IntegratorOptions opt_;
  double h_ = 0.0;
};

}  // namespace detail
}  // namespace xbound
