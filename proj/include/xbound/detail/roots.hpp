#pragma once

#include <cmath>
#include <vector>

namespace xbound::detail {

// Cubic Hermite interpolant on [x0, x1] from end values and slopes.
struct Hermite {
  double x0, x1, f0, f1, d0, d1;

  double operator()(double x) const {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * d1;
  }
};

// Root of a sign-changing interpolant by bisection.
template <class F>
double bisect(const F& f, double a, double b, double tol) {
  double fa = f(a);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

inline bool sign_change(double a, double b) { return (a < 0 && b > 0) || (a > 0 && b < 0); }

inline double linear_crossing(double x0, double x1, double f0, double f1) {
  return x0 + (x1 - x0) * f0 / (f0 - f1);
}

// Zeros of sampled values with slopes, refined on the Hermite cubic.
inline std::vector<double> hermite_zeros(const std::vector<double>& x, const std::vector<double>& f,
                                         const std::vector<double>& df, std::size_t first = 0) {
  std::vector<double> out;
  for (std::size_t i = first; i + 1 < f.size(); ++i) {
    if (f[i] == 0.0 && i > first) {
      out.push_back(x[i]);
      continue;
    }
    if (!sign_change(f[i], f[i + 1])) continue;
    const Hermite p{x[i], x[i + 1], f[i], f[i + 1], df[i], df[i + 1]};
    out.push_back(bisect(p, x[i], x[i + 1], 1e-14 * std::max(1.0, std::abs(x[i]))));
  }
  return out;
}

}  // namespace xbound::detail
