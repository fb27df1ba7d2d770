#pragma once

// Command-line front end. Every run writes its data files, a JSON summary
// embedding the resolved problem, and a manifest, all into --out.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xbound/io.hpp"
#include "xbound/xbound.hpp"

namespace xbound::cli {

using io::json;
namespace fs = std::filesystem;

struct Options {
  // problem
  double gamma = 1.0;
  double energy = 0.0;
  int g = 0;
  int sigma = 1;
  std::string parity = "even";
  int S = 0;
  std::string dimension = "1D";
  // shooting
  double L = 30.0;
  int ppw = 16;
  double tolerance = 1e-10;
  double amplitude = 1.0;
  std::string stepping = "adaptive";
  std::size_t samples = 0;
  double epsilon_r = 0.0;
  double a0 = 1.0;
  // analysis
  double inner = 0.0;
  double outer = 0.0;
  int order = 0;
  std::size_t truncations = 16;
  // evolution
  double t_end = 10.0;
  double dt = 1e-3;
  double absorber_width = -1.0;
  double absorber_strength = 20.0;
  std::size_t stride = 100;
  double core_radius = 0.0;
  bool no_reference = false;
  bool no_potential = false;
  bool profiles = false;
  std::string state;
  double box = 0.0;  // 0: 6 for evolve and stability, 5 for collapse-scan
  double epsilon = 0.01;
  std::uint64_t seed = 20240601;
  double target_norm = 0.0;
  double amp_lo = 0.0;
  double amp_hi = 0.0;
  // scans
  std::string energies = "-100:-10000:log:5";
  std::string amplitudes = "0.2,0.3,0.4,0.45,0.5,0.55";
  double norm_extent = 12.0;
  int refine = 6;
  double ratio = 1.2;
  // closed forms
  std::string object = "vortex";
  double phi0 = 1.0;
  double chi0 = 0.0;
  double core_scale = 0.0;
  double lambda = 1.0;
  double kappa = 0.0;
  double U0 = 1.0;
  double rmin = 0.1;
  double rmax = 10.0;
  std::size_t points = 1001;
  double residual_tolerance = 1e-8;
  // output
  std::string out = ".";
  std::string tag;
};

inline unsigned worker_count() {
  if (const char* env = std::getenv("XBOUND_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("XBOUND_WORKERS must be a positive integer (got '") + env + "')");
  }
  return default_workers();
}

inline Parity parse_parity(const std::string& p) {
  if (p == "even") return Parity::even;
  if (p == "odd") return Parity::odd;
  throw ConfigError("parity must be 'even' or 'odd'");
}

inline Stepping parse_stepping(const std::string& s) {
  if (s == "adaptive") return Stepping::adaptive;
  if (s == "rk4") return Stepping::fixed_rk4;
  throw ConfigError("stepping must be 'adaptive' or 'rk4'");
}

inline ProblemSpec line_spec(const Options& o) { return ProblemSpec::line(o.gamma, o.energy, parse_parity(o.parity), o.g, o.sigma); }
inline ProblemSpec radial_spec(const Options& o) { return ProblemSpec::radial(o.gamma, o.energy, o.S, o.g); }

inline ShootConfig shoot_config(const Options& o) {
  ShootConfig c;
  c.amplitude = o.amplitude;
  c.points_per_wavelength = o.ppw;
  c.max_extent = o.L;
  c.tolerance = o.tolerance;
  c.stepping = parse_stepping(o.stepping);
  if (o.samples > 0) c.samples = o.samples;
  c.validate();
  return c;
}

inline EvolveConfig evolve_config(const Options& o) {
  EvolveConfig c;
  c.t_end = o.t_end;
  c.dt = o.dt;
  if (o.absorber_width >= 0.0) c.absorber_width = o.absorber_width;
  c.absorber_strength = o.absorber_strength;
  c.snapshot_stride = o.stride;
  if (o.core_radius > 0.0) c.core_radius = o.core_radius;
  c.potential_enabled = !o.no_potential;
  return c;
}

class Run {
 public:
  Run(const Options& o, std::string sub) : opt_(o), sub_(std::move(sub)) {
    tag_ = o.tag.empty() ? sub_ : o.tag;
    dir_ = o.out;
  }

  fs::path path(const std::string& suffix) const { return dir_ / (tag_ + suffix); }

  void csv(const std::string& suffix, const io::Table& t) {
    const fs::path p = path(suffix);
    t.write(p);
    manifest.outputs.push_back(p.string());
  }

  void finish(json summary) {
    const fs::path p = path(".json");
    summary["subcommand"] = sub_;
    io::write_json(p, summary);
    manifest.outputs.push_back(p.string());
    write_manifest();
  }

  void write_manifest() {
    manifest.subcommand = sub_;
    manifest.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    io::write_json(path(".manifest.json"), manifest.to_json());
  }

  io::RunManifest manifest;

 private:
  const Options& opt_;
  std::string sub_;
  std::string tag_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline io::Table state_table(const WaveFunction& wf, const char* coord) {
  io::Table t({coord, "phi"});
  for (std::size_t i = 0; i < wf.size(); ++i) t.add({wf.x(i), wf.values[i]});
  return t;
}

// Tail fit and norm curve errors are recorded in the summary.
inline void add_tail_analysis(json& j, Run& run, const Options& o, const WaveFunction& wf, const ProblemSpec& spec) {
  try {
    const FitWindow w = (o.inner > 0 && o.outer > 0) ? FitWindow{o.inner, o.outer} : default_window(wf, spec);
    const TailFit fit = fit_tail(wf, spec, w, o.order > 0 ? std::optional<int>(o.order) : std::nullopt);
    j["tail_fit"] = io::to_json(fit);
    j["asymptotic_deviation"] = asymptotic_deviation(wf, fit, spec);
  } catch (const Error& e) {
    j["tail_fit"] = nullptr;
    j["tail_fit_error"] = e.what();
  }
  try {
    const NormCurve nc = norm_curve(wf, spec, default_truncations(wf, o.truncations));
    j["norm_curve"] = io::to_json(nc);
    io::Table t({"L", "N"});
    for (std::size_t k = 0; k < nc.norms.size(); ++k) t.add({nc.truncations[k], nc.norms[k]});
    run.csv("_norm.csv", t);
  } catch (const Error& e) {
    j["norm_curve"] = nullptr;
    j["norm_curve_error"] = e.what();
  }
}

inline void cmd_solve1d(const Options& o, Run& run) {
  const ProblemSpec spec = line_spec(o);
  const ShootConfig cfg = shoot_config(o);
  const WaveFunction wf = solve_stationary_1d(spec, cfg);
  run.csv(".csv", state_table(wf, "x"));
  json j{{"spec", io::to_json(spec)}, {"grid", io::to_json(wf.grid)}, {"log_scale", wf.log_scale}};
  if (spec.linear()) j["structure"] = io::to_json(classify_structure(wf, spec));
  if (spec.linear() && spec.energy >= 10.0) {
    try {
      j["core_wave_deviation"] = core_wave_check(wf, spec);
    } catch (const Error& e) {
      j["core_wave_error"] = e.what();
    }
  }
  add_tail_analysis(j, run, o, wf, spec);
  if (spec.gamma > 1.0 && j.contains("tail_fit") && !j["tail_fit"].is_null()) j["norm"] = state_norm(wf, spec);
  run.finish(j);
}

inline void cmd_solve2d(const Options& o, Run& run) {
  const ProblemSpec spec = radial_spec(o);
  const ShootConfig cfg = shoot_config(o);
  RadialStart start;
  start.a0 = o.a0;
  if (o.epsilon_r > 0.0) start.epsilon = o.epsilon_r;
  const WaveFunction wf = solve_stationary_2d(spec, cfg, start);
  run.csv(".csv", state_table(wf, "r"));
  json j{{"spec", io::to_json(spec)}, {"grid", io::to_json(wf.grid)}, {"log_scale", wf.log_scale},
         {"a2", frobenius_a2(spec, o.a0)}};
  try {
    j["zeros"] = find_zeros(wf);
  } catch (const Error&) {
  }
  if (spec.linear() && spec.energy == 0.0 && spec.S() >= 1 && spec.gamma == vortex_gamma(spec.S())) {
    const double eps = start.epsilon.value_or(4.0 * wf.grid.spacing());
    j["exact_vortex_deviation"] = compare_exact_vortex(spec.S(), wf, eps).max_relative_deviation;
  }
  add_tail_analysis(j, run, o, wf, spec);
  run.finish(j);
}

inline WaveFunction stationary_for_evolution(const Options& o, const ProblemSpec& spec, Run& run) {
  if (!o.state.empty()) {
    run.manifest.inputs.push_back(o.state);
    WaveFunction wf = io::read_state(o.state, Dimension::line);
    wf.values.back() = 0.0;
    return wf;
  }
  ShootConfig cfg = shoot_config(o);
  return box_state(spec, cfg, o.box > 0.0 ? o.box : 6.0);
}

inline void cmd_evolve(const Options& o, Run& run) {
  const ProblemSpec spec = line_spec(o);
  const WaveFunction wf = stationary_for_evolution(o, spec, run);
  const ComplexWave init = extend_to_full_line(wf, spec);
  EvolveConfig cfg = evolve_config(o);
  cfg.keep_profiles = o.profiles;
  Reference ref;
  ref.energy = spec.energy;
  for (const auto& v : init.values) ref.phi.push_back(v.real());
  const Trajectory tr = propagate(init, spec, cfg, o.no_reference ? nullptr : &ref);
  run.csv("_trajectory.csv", io::trajectory_table(tr));
  for (std::size_t k = 0; k < tr.profiles.size(); ++k) {
    io::Table t({"x", "re", "im"});
    const auto& p = tr.profiles[k];
    for (std::size_t i = 0; i < p.size(); ++i) t.add({p.x(i), p.values[i].real(), p.values[i].imag()});
    run.csv("_profile_" + std::to_string(k) + ".csv", t);
  }
  json j{{"spec", io::to_json(spec)}, {"box_half_width", init.half_width}, {"samples", init.size()},
         {"core_radius", tr.core_radius}, {"steps_recorded", tr.times.size()}};
  j["blowup"] = tr.blowup ? json{{"time", tr.blowup->time}, {"reason", tr.blowup->reason}} : json(nullptr);
  run.finish(j);
}

inline void cmd_stability(const Options& o, Run& run) {
  const ProblemSpec spec = line_spec(o);
  json j{{"spec", io::to_json(spec)}};
  Options oo = o;
  if (o.target_norm > 0.0) {
    if (!(o.amp_lo > 0.0 && o.amp_hi > o.amp_lo)) throw ConfigError("--target-norm needs --amp-lo < --amp-hi");
    ShootConfig c = shoot_config(o);
    c.max_extent = o.norm_extent;
    const TunedState t = tune_amplitude_to_norm(spec, o.target_norm, o.amp_lo, o.amp_hi, c);
    oo.amplitude = t.amplitude;
    j["tuned_amplitude"] = t.amplitude;
  }
  {
    ShootConfig c = shoot_config(oo);
    c.max_extent = o.norm_extent;
    const WaveFunction wide = solve_stationary_1d(spec, c);
    if (spec.gamma > 1.0) j["norm"] = state_norm(wide, spec);
    try {
      j["tail_fit"] = io::to_json(fit_tail(wide, spec));
    } catch (const Error& e) {
      j["tail_fit_error"] = e.what();
    }
  }
  const WaveFunction wf = stationary_for_evolution(oo, spec, run);
  StabilityOptions so;
  so.seed = o.seed;
  const StabilityVerdict v = stability_test(wf, spec, o.epsilon, evolve_config(o), so);
  run.csv("_trajectory.csv", io::trajectory_table(v.trajectory));
  j["amplitude"] = oo.amplitude;
  j["box_half_width"] = wf.grid.end();
  j["epsilon"] = o.epsilon;
  j["seed"] = o.seed;
  j["stability"] = io::to_json(v);
  run.finish(j);
}

inline void cmd_scan_xmax(const Options& o, Run& run) {
  const std::vector<double> energies = io::parse_ladder(o.energies);
  const ScanResult r = xmax_scan(o.gamma, energies, shoot_config(o), worker_count());
  io::Table t({"energy", "x_max"});
  for (const auto& p : r.points) t.add({p.energy, p.x_max});
  run.csv(".csv", t);
  run.finish({{"gamma", o.gamma}, {"scan", io::to_json(r)}, {"reference_slope", 1.0 / (2.0 * o.gamma)}});
}

inline void cmd_collapse_scan(const Options& o, Run& run) {
  const ProblemSpec spec = ProblemSpec::line(o.gamma, o.energy, parse_parity(o.parity), -1, 2);
  CollapseScanConfig sc;
  if (o.box > 0.0) sc.box_extent = o.box;
  sc.norm_extent = o.norm_extent;
  sc.epsilon = o.epsilon;
  sc.refine_steps = o.refine;
  sc.target_ratio = o.ratio;
  sc.stability.seed = o.seed;
  sc.workers = worker_count();
  json j{{"spec", io::to_json(spec)}, {"townes_norm", townes_quintic_norm()}};
  auto ladder_table = [&](const std::vector<LadderEntry>& lad) {
    io::Table t({"amplitude", "norm", "verdict_rank", "max_profile_deviation", "blowup_time"});
    json arr = json::array();
    for (const auto& e : lad) {
      t.add({e.amplitude, e.norm, static_cast<double>(verdict_rank(e.verdict)), e.max_profile_deviation,
             e.blowup_time.value_or(std::nan(""))});
      arr.push_back(io::to_json(e));
    }
    run.csv("_ladder.csv", t);
    return arr;
  };
  try {
    const CollapseBracket b = collapse_scan(spec, io::parse_ladder(o.amplitudes), shoot_config(o), evolve_config(o), sc);
    j["n_low"] = b.n_low;
    j["n_high"] = b.n_high;
    j["a_low"] = b.a_low;
    j["a_high"] = b.a_high;
    j["ratio"] = b.n_high / b.n_low;
    j["ladder"] = ladder_table(b.ladder);
  } catch (const LadderError& e) {
    j["ladder"] = ladder_table(e.table());
    j["status"] = "numerical_failure";
    j["error"] = e.what();
    run.finish(j);
    throw;
  }
  run.finish(j);
}

inline void cmd_exact(const Options& o, Run& run) {
  if (!(o.rmax > o.rmin) || o.points < 2) throw ConfigError("need rmin < rmax and at least 2 points");
  const auto coord = [&](std::size_t i) { return o.rmin + (o.rmax - o.rmin) * i / (o.points - 1.0); };
  json j{{"object", o.object}};
  if (o.object == "asymptote" || o.object == "antiho") {
    const ProblemSpec spec = o.dimension == "2D" ? radial_spec(o) : line_spec(o);
    AsymptoteParams p{o.phi0, o.chi0, o.core_scale > 0 ? std::optional<double>(o.core_scale) : std::nullopt,
                      std::max(1, o.order)};
    io::Table t({"x", "value"});
    for (std::size_t i = 0; i < o.points; ++i)
      t.add({coord(i), o.object == "asymptote" ? asymptotic_tail(spec, p, coord(i)) : antiho_tail(spec, p, coord(i))});
    run.csv(".csv", t);
    j["spec"] = io::to_json(spec);
  } else if (o.object == "vortex") {
    if (o.S < 1) throw ConfigError("exact vortex needs --S >= 1");
    io::Table t({"r", "phi"});
    for (std::size_t i = 0; i < o.points; ++i) t.add({coord(i), exact_vortex(o.S, o.phi0, coord(i))});
    run.csv(".csv", t);
    const NormValue n = exact_vortex_norm(o.S, o.phi0);
    j["gamma"] = vortex_gamma(o.S);
    j["norm"] = is_divergent(n) ? json("divergent") : json(std::get<double>(n));
  } else if (o.object == "vnw") {
    io::Table t({"r", "potential", "phi"});
    for (std::size_t i = 0; i < o.points; ++i) {
      const auto v = vnw_state(coord(i));
      t.add({coord(i), v.potential, v.wavefunction});
    }
    run.csv(".csv", t);
  } else if (o.object == "coupled") {
    const auto cs = CoupledSystemSpec::on_constraint(o.S, o.lambda, o.kappa, o.U0);
    const Grid grid{0.0, o.rmax, o.points};
    const CoupledFields f = coupled_exact_fields(cs, grid);
    const CoupledResidual res = coupled_residual(cs, f, o.residual_tolerance);
    io::Table t({"r", "U", "V"});
    for (std::size_t i = 0; i < grid.samples; ++i) t.add({grid.at(i), f.U[i], f.V[i]});
    run.csv(".csv", t);
    io::Table rt({"r", "res_u", "res_v"});
    for (std::size_t i = 0; i < res.r.size(); ++i) rt.add({res.r[i], res.res_u[i], res.res_v[i]});
    run.csv("_residual.csv", rt);
    j["exact_energy"] = f.exact_energy;
    j["omega"] = cs.omega;
    j["max_abs_res_u"] = res.max_abs_u(o.rmin, o.rmax);
    j["max_abs_res_v"] = res.max_abs_v(o.rmin, o.rmax);
    j["discretization_error"] = res.error_estimate;
  } else if (o.object == "nonlinear-vortex") {
    const auto a = nonlinear_vortex_amplitude(o.S, o.g);
    j["phi0_squared"] = a ? json(*a) : json("no-solution");
  } else {
    throw ConfigError("unknown --object '" + o.object + "'");
  }
  run.finish(j);
}

inline void cmd_fit_tail(const Options& o, Run& run) {
  if (o.state.empty()) throw ConfigError("fit-tail needs --state");
  const bool radial = o.dimension == "2D";
  const ProblemSpec spec = radial ? radial_spec(o) : line_spec(o);
  run.manifest.inputs.push_back(o.state);
  const WaveFunction wf = io::read_state(o.state, radial ? Dimension::radial : Dimension::line);
  const FitWindow w = (o.inner > 0 && o.outer > 0) ? FitWindow{o.inner, o.outer} : default_window(wf, spec);
  const TailFit fit = fit_tail(wf, spec, w, o.order > 0 ? std::optional<int>(o.order) : std::nullopt);
  run.finish({{"spec", io::to_json(spec)}, {"tail_fit", io::to_json(fit)},
              {"asymptotic_deviation", asymptotic_deviation(wf, fit, spec)}});
}

inline void cmd_verify(const Options& o, Run& run) {
  const double tol = o.residual_tolerance;
  bool ok = true;
  json checks = json::array();
  auto add = [&](const std::string& name, double value, double limit) {
    const bool pass = value < limit;
    ok = ok && pass;
    checks.push_back({{"check", name}, {"value", value}, {"limit", limit}, {"pass", pass}});
  };
  for (int S = 1; S <= 3; ++S)
    add("exact_vortex_residual_S" + std::to_string(S), exact_vortex_residual(S, 0.1, 10.0).max_relative, tol);
  add("vnw_residual", vnw_residual(0.2, 3.0).max_relative, tol);
  json kappa_sweep = json::array();
  for (const auto& [S, lam] : std::vector<std::pair<int, double>>{{0, 1.0}, {1, 2.0}, {2, 1.5}}) {
    const Grid grid{0.0, 6.5, 13001};
    for (double kappa : {0.0, 0.5, 1.0, 2.0}) {
      const auto cs = CoupledSystemSpec::on_constraint(S, lam, kappa);
      const auto res = coupled_residual(cs, coupled_exact_fields(cs, grid), tol);
      if (kappa == 0.0)
        add("coupled_u_residual_S" + std::to_string(S) + "_lambda" + io::format_number(lam), res.max_abs_u(0.1, 6.0), tol);
      kappa_sweep.push_back({{"S", S}, {"lambda", lam}, {"kappa", kappa}, {"max_abs_res_u", res.max_abs_u(0.1, 6.0)},
                             {"max_abs_res_v", res.max_abs_v(0.1, 6.0)}});
    }
  }
  for (int S = 2; S <= 4; ++S) {
    const double exact = std::get<double>(exact_vortex_norm(S, 1.0));
    const double quad = exact_vortex_quadrature(S).limit;
    add("exact_vortex_norm_relative_error_S" + std::to_string(S), std::abs(quad - exact) / exact, 0.005);
  }
  run.finish({{"pass", ok}, {"checks", checks}, {"coupled_kappa_sweep", kappa_sweep}});
  if (!ok) throw NumericalError("residual suite failed");
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

inline bool flag_given(const std::vector<std::string>& args, const std::string& key) {
  const std::string f = "--" + key;
  for (const auto& a : args)
    if (a == f || a.rfind(f + "=", 0) == 0) return true;
  return false;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"Bound states of Schroedinger and Gross-Pitaevskii equations with expulsive potentials"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value configuration file");

  auto problem = [&](CLI::App* s, bool radial) {
    s->add_option("--gamma", o.gamma, "potential exponent (>= 1)");
    s->add_option("--energy", o.energy, "eigenvalue E");
    s->add_option("--g", o.g, "nonlinearity sign (-1, 0, +1)");
    if (!radial) {
      s->add_option("--sigma", o.sigma, "1 cubic, 2 quintic");
      s->add_option("--parity", o.parity, "even or odd");
    }
    if (radial) s->add_option("--S", o.S, "vorticity");
  };
  auto shooting = [&](CLI::App* s) {
    s->add_option("--L", o.L, "domain extent");
    s->add_option("--ppw", o.ppw, "points per wavelength at the domain edge");
    s->add_option("--tolerance", o.tolerance, "integrator relative tolerance");
    s->add_option("--amplitude", o.amplitude, "origin amplitude");
    s->add_option("--stepping", o.stepping, "adaptive or rk4");
    s->add_option("--samples", o.samples, "grid samples (0: from the resolution bound)");
  };
  auto analysis = [&](CLI::App* s) {
    s->add_option("--inner", o.inner, "fit window inner edge (0: default)");
    s->add_option("--outer", o.outer, "fit window outer edge (0: default)");
    s->add_option("--order", o.order, "tail model order (0: default)");
    s->add_option("--truncations", o.truncations, "number of norm truncations");
  };
  auto evolution = [&](CLI::App* s) {
    s->add_option("--t-end", o.t_end, "final time");
    s->add_option("--dt", o.dt, "time step");
    s->add_option("--absorber-width", o.absorber_width, "edge layer width (negative: 0.4 L)");
    s->add_option("--absorber-strength", o.absorber_strength, "edge damping rate");
    s->add_option("--stride", o.stride, "steps between recorded diagnostics");
    s->add_option("--core-radius", o.core_radius, "diagnostic core radius (0: default)");
    s->add_option("--box", o.box, "requested box half width; the box ends at the last node below it");
    s->add_option("--state", o.state, "half-line state CSV (x, phi) instead of solving");
  };
  auto output = [&](CLI::App* s) {
    s->add_option("--out", o.out, "output directory");
    s->add_option("--tag", o.tag, "output file stem (default: subcommand)");
  };

  std::map<std::string, std::function<void(const Options&, Run&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& desc, std::function<void(const Options&, Run&)> fn) {
    handlers[name] = std::move(fn);
    CLI::App* s = app.add_subcommand(name, desc);
    output(s);
    return s;
  };

  auto* s1 = sub("solve1d", "stationary 1D state, structure, tail fit and norm curve", cmd_solve1d);
  problem(s1, false), shooting(s1), analysis(s1);
  auto* s2 = sub("solve2d", "stationary radial state with vorticity S", cmd_solve2d);
  problem(s2, true), shooting(s2), analysis(s2);
  s2->add_option("--epsilon", o.epsilon_r, "series handoff radius (0: four cells)");
  s2->add_option("--a0", o.a0, "leading Frobenius coefficient");
  auto* ev = sub("evolve", "time evolution of a 1D state", cmd_evolve);
  problem(ev, false), shooting(ev), evolution(ev);
  ev->add_flag("--no-reference", o.no_reference, "plain absorber instead of the stationary-reference sponge");
  ev->add_flag("--no-potential", o.no_potential, "free propagation");
  ev->add_flag("--profiles", o.profiles, "write a profile CSV per recorded step");
  auto* st = sub("stability", "perturb-and-evolve stability verdict", cmd_stability);
  problem(st, false), shooting(st), evolution(st);
  st->add_option("--epsilon", o.epsilon, "relative perturbation amplitude");
  st->add_option("--seed", o.seed, "perturbation seed");
  st->add_option("--target-norm", o.target_norm, "tune the amplitude to this norm (0: off)");
  st->add_option("--amp-lo", o.amp_lo, "amplitude bracket, lower end");
  st->add_option("--amp-hi", o.amp_hi, "amplitude bracket, upper end");
  st->add_option("--norm-extent", o.norm_extent, "extent of the solve used for the norm");
  auto* sx = sub("scan-xmax", "x_max against E on a log ladder", cmd_scan_xmax);
  sx->add_option("--gamma", o.gamma, "potential exponent");
  sx->add_option("--energies", o.energies, "a:b:log:n, a:b:lin:n or a comma list");
  sx->add_option("--ppw", o.ppw, "points per wavelength");
  sx->add_option("--tolerance", o.tolerance, "integrator relative tolerance");
  sx->add_option("--stepping", o.stepping, "adaptive or rk4");
  auto* cs = sub("collapse-scan", "quintic collapse bracket over an amplitude ladder", cmd_collapse_scan);
  cs->add_option("--gamma", o.gamma, "potential exponent");
  cs->add_option("--energy", o.energy, "eigenvalue E");
  cs->add_option("--parity", o.parity, "even or odd");
  cs->add_option("--amplitudes", o.amplitudes, "ascending amplitude list or a:b:lin:n");
  cs->add_option("--norm-extent", o.norm_extent, "extent of the solve used for the norm");
  cs->add_option("--epsilon", o.epsilon, "relative perturbation amplitude");
  cs->add_option("--seed", o.seed, "perturbation seed");
  cs->add_option("--refine", o.refine, "bisection steps inside the bracket");
  cs->add_option("--ratio", o.ratio, "stop refining below this N_high / N_low");
  cs->add_option("--ppw", o.ppw, "points per wavelength");
  evolution(cs);
  auto* ex = sub("exact", "tabulate a closed-form object", cmd_exact);
  ex->add_option("--object", o.object, "asymptote, antiho, vortex, vnw, coupled, nonlinear-vortex");
  ex->add_option("--dimension", o.dimension, "1D or 2D (tails)");
  problem(ex, false);
  ex->add_option("--S", o.S, "vorticity");
  ex->add_option("--phi0", o.phi0, "amplitude");
  ex->add_option("--chi0", o.chi0, "phase offset");
  ex->add_option("--order", o.order, "tail order");
  ex->add_option("--core-scale", o.core_scale, "l for the gamma = 1 tail");
  ex->add_option("--lambda", o.lambda, "linear coupling");
  ex->add_option("--kappa", o.kappa, "expulsive strength of the second component");
  ex->add_option("--U0", o.U0, "coupled-solution amplitude");
  ex->add_option("--rmin", o.rmin, "first coordinate");
  ex->add_option("--rmax", o.rmax, "last coordinate");
  ex->add_option("--points", o.points, "number of samples");
  ex->add_option("--residual-tolerance", o.residual_tolerance, "discretisation tolerance for coupled residuals");
  auto* ft = sub("fit-tail", "fit the asymptotic tail of a state file", cmd_fit_tail);
  ft->add_option("--dimension", o.dimension, "1D or 2D");
  problem(ft, false);
  ft->add_option("--S", o.S, "vorticity");
  ft->add_option("--state", o.state, "state CSV");
  analysis(ft);
  auto* vf = sub("verify", "residual suite for the closed forms", cmd_verify);
  vf->add_option("--residual-tolerance", o.residual_tolerance, "pass threshold");

  // --config may appear anywhere in argv.
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) {
      config_path = argv[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    } else {
      args.push_back(a);
    }
  }

  Run* active = nullptr;
  std::optional<Run> run_holder;
  std::string name;
  try {
    if (!config_path.empty()) {
      for (const auto& [k, v] : detail::read_config_file(config_path))
        if (!detail::flag_given(args, k)) args.push_back("--" + k + "=" + v);
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, err, err);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n" << app.help();
    return 2;
  }
  for (auto* s : app.get_subcommands()) name = s->get_name();

  try {
    run_holder.emplace(o, name);
    active = &*run_holder;
    CLI::App* s = app.get_subcommand(name);
    for (const auto* opt : s->get_options()) {
      if (opt->get_name().empty() || opt->get_name() == "--help") continue;
      std::string val = opt->count() ? CLI::detail::join(opt->results()) : opt->get_default_str();
      std::string key = opt->get_name();
      while (!key.empty() && key.front() == '-') key.erase(key.begin());
      active->manifest.configuration[key] = val;
    }
    if (!config_path.empty()) active->manifest.inputs.push_back(config_path);
    handlers.at(name)(o, *active);
    return 0;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    try {
      const fs::path p = active->path(".json");
      if (!fs::exists(p)) {
        json j{{"subcommand", name}, {"status", "numerical_failure"}, {"error", e.what()}};
        j["where"] = e.where() ? json(*e.where()) : json(nullptr);
        io::write_json(p, j);
      }
      active->write_manifest();
    } catch (const std::exception&) {
    }
    return 1;
  }
}

}  // namespace xbound::cli
