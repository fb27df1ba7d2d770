#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <numbers>

#include "xbound/analysis.hpp"
#include "xbound/closedform.hpp"

using namespace xbound;
using Catch::Approx;
constexpr double pi = std::numbers::pi;

TEST_CASE("asymptotic_tail examples") {
  const auto spec = ProblemSpec::line(2, 0, Parity::even);
  const double x = std::cbrt(3 * pi);
  CHECK(asymptotic_tail(spec, {1.0, 0.0, {}, 2}, x) == Approx(-std::pow(3 * pi, -1.0 / 3)).epsilon(1e-12));
  CHECK(asymptotic_tail(spec, {1.0, 0.0, {}, 2}, x) == Approx(-0.4736).margin(5e-4));

  const auto a = ProblemSpec::line(2, -3, Parity::even);
  const auto b = ProblemSpec::line(2, 7, Parity::even);
  CHECK(asymptotic_tail(a, {0.8, 0.3, {}, 1}, 4.2) == asymptotic_tail(b, {0.8, 0.3, {}, 1}, 4.2));

  CHECK_THROWS_AS(asymptotic_tail(ProblemSpec::line(1, 0, Parity::even), {}, 2.0), ConfigError);
  CHECK_THROWS_AS(asymptotic_tail(spec, {1.0, 0.0, {}, 4}, 2.0), ConfigError);
  CHECK_THROWS_AS(asymptotic_tail(spec, {1.0, 0.0, {}, 1}, 0.0), ConfigError);
}

TEST_CASE("order-3 radial coefficient vanishes at gamma = 3, S = 2") {
  const auto spec = ProblemSpec::radial(3, 0.4, 2);
  for (double r : {2.0, 3.3, 5.1})
    CHECK(asymptotic_tail(spec, {1.0, 0.2, {}, 3}, r) == asymptotic_tail(spec, {1.0, 0.2, {}, 2}, r));
  const auto other = ProblemSpec::radial(3, 0.4, 1);
  CHECK(asymptotic_tail(other, {1.0, 0.2, {}, 3}, 2.0) != asymptotic_tail(other, {1.0, 0.2, {}, 2}, 2.0));
}

TEST_CASE("successive orders add exactly one term and terms shrink with x") {
  const auto spec = ProblemSpec::line(2, 1, Parity::even);
  for (double x : {5.0, 8.0, 13.0}) {
    const double t1 = asymptotic_tail(spec, {1, 0.5, {}, 1}, x);
    const double t2 = asymptotic_tail(spec, {1, 0.5, {}, 2}, x);
    const double t3 = asymptotic_tail(spec, {1, 0.5, {}, 3}, x);
    const double phase = std::pow(x, 3) / 3 - 0.5;
    CHECK(t2 - t1 == Approx(std::pow(x, -2.0) * std::sin(phase)).margin(1e-12));
    CHECK(t3 - t2 == Approx(8.0 / 24.0 * std::pow(x, -4.0) * std::sin(phase)).margin(1e-12));
    CHECK(std::pow(x, -1.0) > std::pow(x, -2.0));
    CHECK(std::pow(x, -2.0) > 8.0 / 24.0 * std::pow(x, -4.0));
  }
}

TEST_CASE("third-order 1D term improves agreement with the Bessel solution") {
  // At E = 0 the even gamma = 2 solution is sqrt(x) J_{-1/6}(x^3/3).
  const auto spec = ProblemSpec::line(2, 0, Parity::even);
  const double nu = 1.0 / 6.0;
  const double phi0 = std::sqrt(6.0 / pi), chi0 = pi / 6.0;
  double e1 = 0, e3 = 0;
  for (double x = 3.0; x < 4.0; x += 0.001) {
    const double u = x * x * x / 3;
    const double j = std::cos(nu * pi) * std::cyl_bessel_j(nu, u) - std::sin(nu * pi) * std::cyl_neumann(nu, u);
    const double exact = std::sqrt(x) * j;
    e1 = std::max(e1, std::abs(exact - asymptotic_tail(spec, {phi0, chi0, {}, 1}, x)));
    e3 = std::max(e3, std::abs(exact - asymptotic_tail(spec, {phi0, chi0, {}, 3}, x)));
  }
  CHECK(e3 < 0.2 * e1);
}

TEST_CASE("third-order radial term improves agreement with the Bessel solution") {
  // gamma = 3, S = 1, E = 0: phi = J_{1/4}(r^4/4).
  const auto spec = ProblemSpec::radial(3, 0, 1);
  const double nu = 0.25;
  const double phi0 = std::sqrt(2.0 * 4.0 / pi);
  const double chi0 = pi / 2 * nu + pi / 4;
  double e2 = 0, e3 = 0;
  for (double r = 2.0; r < 2.6; r += 0.002) {
    const double exact = std::cyl_bessel_j(nu, std::pow(r, 4) / 4);
    e2 = std::max(e2, std::abs(exact - asymptotic_tail(spec, {phi0, chi0, {}, 2}, r)));
    e3 = std::max(e3, std::abs(exact - asymptotic_tail(spec, {phi0, chi0, {}, 3}, r)));
  }
  CHECK(e3 < 0.2 * e2);
}

TEST_CASE("antiho_tail examples") {
  const auto spec = ProblemSpec::line(1, 0, Parity::even);
  const double x = std::sqrt(4 * pi);
  CHECK(antiho_tail(spec, {0.7, 0.0, {}, 1}, x) == Approx(0.7 / std::sqrt(x)).epsilon(1e-12));

  const auto e = ProblemSpec::line(1, 0.8, Parity::even);
  const double x2 = 3.7;
  const double v1 = antiho_tail(e, {1.0, 0.0, 1.5, 1}, x2);
  const double v2 = antiho_tail(e, {1.0, 0.0, 3.0, 1}, x2);
  CHECK(v1 == Approx(std::cos(x2 * x2 / 2 + 0.8 * std::log(x2 / 1.5)) / std::sqrt(x2)));
  CHECK(v2 == Approx(std::cos(x2 * x2 / 2 + 0.8 * std::log(x2 / 1.5) - 0.8 * std::log(2.0)) / std::sqrt(x2)));

  CHECK(antiho_tail(ProblemSpec::radial(1, 0, 0), {1.0, 0.0, {}, 1}, 1.0) == Approx(0.8776).margin(1e-4));
  CHECK_THROWS_AS(antiho_tail(ProblemSpec::line(2, 0, Parity::even), {}, 1.0), ConfigError);
  CHECK_THROWS_AS(antiho_tail(e, {1.0, 0.0, {}, 1}, 1.0), ConfigError);
  CHECK_THROWS_AS(antiho_tail(spec, {1.0, 0.0, {}, 2}, 1.0), ConfigError);
}

TEST_CASE("exact vortex shape") {
  CHECK(exact_vortex(1, 1.3, 1e-4) / 1e-4 == Approx(1.3 / 2).epsilon(1e-6));
  CHECK(exact_vortex(2, 1.0, 0.0) == 0.0);
  for (int k = 1; k <= 5; ++k) CHECK(std::abs(exact_vortex(1, 1.0, std::sqrt(2 * pi * k))) < 1e-12);
  CHECK(vortex_gamma(3) == 5.0);
  CHECK_THROWS_AS(exact_vortex(0, 1.0, 1.0), ConfigError);
}

TEST_CASE("exact vortex solves the radial equation") {
  CHECK(exact_vortex_residual(2, 0.1, 10.0).max_relative < 1e-10);
  for (int S = 1; S <= 3; ++S) CHECK(exact_vortex_residual(S, 0.1, 10.0).max_relative < 1e-8);
}

namespace {

// 2 pi int r phi^2 dr with u = r^{2S}/(2S): 2 pi (2S)^{1/S - 2} int_0^inf u^{1/S - 2} sin^2 u du.
// On [0, 1] the substitution u = t^S removes the endpoint singularity.
double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3;
}

double vortex_norm_oracle(int S) {
  const double a = 2.0 - 1.0 / S;
  const double U = 4000.0 * pi;
  const double head = simpson([S](double t) { return t == 0.0 ? 0.0 : S * std::pow(t, -S) * std::pow(std::sin(std::pow(t, S)), 2); },
                              0.0, 1.0, 2000);
  const double body = simpson([a](double u) { return std::pow(u, -a) * std::sin(u) * std::sin(u); }, 1.0, U, 4000000);
  const double tail = std::pow(U, 1 - a) / (2 * (a - 1));
  return 2 * pi * std::pow(2.0 * S, 1.0 / S - 2) * (head + body + tail);
}

}  // namespace

TEST_CASE("exact vortex norm") {
  CHECK(is_divergent(exact_vortex_norm(1, 1.0)));
  const double n2 = std::get<double>(exact_vortex_norm(2, 1.0));
  CHECK(n2 == Approx(1.392).margin(5e-4));
  CHECK(n2 == Approx(std::pow(pi, 1.5) / 4).epsilon(1e-12));
  CHECK(std::get<double>(exact_vortex_norm(3, 2.0)) == Approx(4 * std::get<double>(exact_vortex_norm(3, 1.0))));
  for (int S = 2; S <= 4; ++S) CHECK(std::get<double>(exact_vortex_norm(S, 1.0)) == Approx(vortex_norm_oracle(S)).epsilon(1e-3));
}

TEST_CASE("vnw state") {
  CHECK(vnw_state(1.0).potential == -3.5);
  for (int k = 1; k <= 4; ++k) CHECK(std::abs(vnw_state(std::cbrt(k * pi)).wavefunction) < 1e-12);
  CHECK(vnw_residual(0.2, 3.0).max_relative < 1e-8);
  CHECK_THROWS_AS(vnw_state(0.0), ConfigError);
}

TEST_CASE("coupled exact fields") {
  const auto c = CoupledSystemSpec::on_constraint(0, 1.0);
  CHECK(c.exact_energy() == 1.0);
  const Grid grid{0.0, 5.0, 101};
  const auto f = coupled_exact_fields(c, grid);
  for (std::size_t i = 0; i < grid.samples; ++i) {
    const double r = grid.at(i);
    CHECK(f.U[i] == Approx(r * r * std::exp(-r * r / 2)).margin(1e-15));
    CHECK(f.V[i] == Approx(-2 * std::exp(-r * r / 2)).margin(1e-15));
  }
  CHECK(CoupledSystemSpec::on_constraint(1, 2.0).exact_energy() == 3.0);
  const auto f3 = coupled_exact_fields(CoupledSystemSpec::on_constraint(1, 2.0, 0.0, 3.0), grid);
  const auto f1 = coupled_exact_fields(CoupledSystemSpec::on_constraint(1, 2.0, 0.0, 1.0), grid);
  for (std::size_t i = 0; i < grid.samples; ++i) {
    CHECK(f3.U[i] == Approx(3 * f1.U[i]).margin(1e-15));
    CHECK(f3.V[i] == Approx(3 * f1.V[i]).margin(1e-15));
  }
  CoupledSystemSpec off = c;
  off.omega += 0.1;
  CHECK_FALSE(off.constraint_satisfied());
  CHECK_THROWS_AS(coupled_exact_fields(off, grid), ConfigError);
}

TEST_CASE("coupled residuals") {
  const Grid grid{0.0, 6.5, 13001};
  auto zero_spec = CoupledSystemSpec::on_constraint(1, 1.0);
  CoupledFields zero{grid, std::vector<double>(grid.samples, 0.0), std::vector<double>(grid.samples, 0.0), 0.0};
  const auto rz = coupled_residual(zero_spec, zero);
  CHECK(rz.max_abs_u(0, 10) == 0.0);
  CHECK(rz.max_abs_v(0, 10) == 0.0);

  for (const auto& [S, lam] : std::vector<std::pair<int, double>>{{0, 1.0}, {1, 2.0}, {2, 1.5}}) {
    for (double kappa : {0.0, 0.5, 2.0}) {
      const auto cs = CoupledSystemSpec::on_constraint(S, lam, kappa);
      const auto res = coupled_residual(cs, coupled_exact_fields(cs, grid));
      CHECK(res.max_abs_u(0.1, 6.0) < 1e-8);
      double worst = 0.0;
      for (std::size_t i = 0; i < res.r.size(); ++i)
        worst = std::max(worst, std::abs(res.res_v[i] - coupled_v_residual_closed_form(cs, res.r[i])));
      CHECK(worst < 1e-8);
      if (kappa == 0.0) CHECK(res.max_abs_v(0.1, 6.0) < 1e-8);
      if (kappa > 0.0) CHECK(res.max_abs_v(0.1, 6.0) > 1e-3);
    }
  }
  const auto cs = CoupledSystemSpec::on_constraint(2, 1.5);
  CHECK_THROWS_AS(coupled_residual(cs, coupled_exact_fields(cs, Grid{0.0, 6.5, 131})), ConfigError);
}

TEST_CASE("nonlinear vortex amplitude") {
  CHECK_FALSE(nonlinear_vortex_amplitude(1, 1).has_value());
  CHECK_FALSE(nonlinear_vortex_amplitude(1, -1).has_value());
  CHECK(*nonlinear_vortex_amplitude(2, -1) == Approx(2.0));
  CHECK(*nonlinear_vortex_amplitude(0, 1) == Approx(2.0 / 3.0));
  CHECK_FALSE(nonlinear_vortex_amplitude(0, -1).has_value());
  CHECK_THROWS_AS(nonlinear_vortex_amplitude(2, 0), ConfigError);
}

TEST_CASE("approximate nonlinear vortex leaves a third-harmonic residual") {
  // phi'' + phi'/r - S^2 phi/r^2 + r^2 phi - 2 g phi^3 at gamma = 1, E = 0.
  const int S = 0, g = 1;
  const double phi0 = std::sqrt(*nonlinear_vortex_amplitude(S, g));
  auto residual = [&](auto f) {
    double worst = 0.0;
    for (double r = 6.0; r < 9.0; r += 0.001) {
      const double h = 1e-4;
      const double d2 = (f(r + h) - 2 * f(r) + f(r - h)) / (h * h);
      const double d1 = (f(r + h) - f(r - h)) / (2 * h);
      const double v = f(r);
      worst = std::max(worst, std::abs(d2 + d1 / r - S * S * v / (r * r) + r * r * v - 2 * g * v * v * v));
    }
    return worst;
  };
  const double base = residual([&](double r) { return approx_nonlinear_vortex(phi0, r); });
  const double corrected = residual([&](double r) {
    return approx_nonlinear_vortex(phi0, r) + g * std::pow(phi0, 3) / 16 * std::sin(1.5 * r * r) / std::pow(r, 5);
  });
  const double third = g * std::pow(phi0, 3) / 2 / std::pow(6.0, 3);
  CHECK(base == Approx(third).epsilon(0.2));
  CHECK(corrected < 0.3 * base);
}
