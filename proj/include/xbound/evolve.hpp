#pragma once

// Time evolution of the 1D equation
//   i psi_t = -(1/2) psi_xx - (1/2)|x|^{2 gamma} psi + g |psi|^{2 sigma} psi
// by Strang splitting on a Dirichlet box [-L, L]. The kinetic step is exact in
// the sine basis (DST-I via FFTW); the local step is an exact phase rotation.
//
// Edge handling: a sponge relaxes psi towards a reference field r(t) inside
// the layer |x| > L - width, psi <- r + (psi - r) exp(-W dt / 2), applied at
// both ends of each step. With the stationary state as reference, r(t) =
// exp(-iEt) phi, the sponge absorbs only the departure from the stationary
// tail; without a reference it is an ordinary absorber (r = 0).

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "xbound/analysis.hpp"
#include "xbound/detail/parallel.hpp"
#include "xbound/model.hpp"
#include "xbound/solver1d.hpp"

namespace xbound {

using cplx = std::complex<double>;

// Full-line field on x_j = -L + j h, j = 0 .. 2M, with psi = 0 at both ends.
struct ComplexWave {
  double half_width = 1.0;
  std::vector<cplx> values;

  std::size_t size() const noexcept { return values.size(); }
  double spacing() const noexcept { return 2.0 * half_width / static_cast<double>(values.size() - 1); }
  double x(std::size_t j) const noexcept { return -half_width + spacing() * static_cast<double>(j); }

  void validate() const {
    if (values.size() < 5 || values.size() % 2 == 0) throw ConfigError("full-line field needs an odd sample count >= 5");
    if (!(half_width > 0.0)) throw ConfigError("full-line half width must be positive");
    for (const auto& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError("field holds non-finite values");
  }
};

// Parity extension of a half-line state to [-L, L].
inline ComplexWave extend_to_full_line(const WaveFunction& wf, const ProblemSpec& spec) {
  if (spec.dimension != Dimension::line) throw ConfigError("only 1D states can be evolved");
  wf.validate();
  const double sign = *spec.parity == Parity::even ? 1.0 : -1.0;
  const std::size_t M = wf.size() - 1;
  ComplexWave out;
  out.half_width = wf.grid.end();
  out.values.resize(2 * M + 1);
  const double s = wf.scale();
  for (std::size_t i = 0; i <= M; ++i) {
    out.values[M + i] = wf.values[i] * s;
    out.values[M - i] = sign * wf.values[i] * s;
  }
  return out;
}

// Stationary state re-solved on [0, z] where z is the last node of phi not
// beyond `extent`, so that the Dirichlet box matches the state.
inline WaveFunction box_state(const ProblemSpec& spec, ShootConfig cfg, double extent) {
  cfg.max_extent = extent;
  cfg.samples.reset();
  const WaveFunction probe = solve_stationary_1d(spec, cfg);
  const auto zeros = find_zeros(probe);
  if (zeros.empty()) throw NumericalError("no node inside the requested box extent");
  cfg.max_extent = zeros.back();
  WaveFunction wf = solve_stationary_1d(spec, cfg);
  wf.values.back() = 0.0;
  return wf;
}

struct EvolveConfig {
  double t_end = 10.0;
  double dt = 1e-3;
  std::optional<double> absorber_width;  // default: 0.4 L
  double absorber_strength = 20.0;
  std::size_t snapshot_stride = 100;
  std::optional<double> core_radius;
  bool keep_profiles = false;
  bool potential_enabled = true;  // off only for free-propagation tests
  double blowup_factor = 10.0;
  double monitor_fraction = 1e-3;  // spectral power above half the Nyquist wavenumber
  bool check_step_halving = true;

  void validate(double L) const {
    if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
    if (!(dt > 0.0) || dt > t_end) throw ConfigError("dt must lie in (0, t_end]");
    if (absorber_width && (*absorber_width < 0.0 || *absorber_width >= 0.5 * L))
      throw ConfigError("absorber width must lie in [0, L/2)");
    if (absorber_strength < 0.0) throw ConfigError("absorber strength must be non-negative");
    if (snapshot_stride == 0) throw ConfigError("snapshot stride must be positive");
    if (core_radius && !(*core_radius > 0.0)) throw ConfigError("core radius must be positive");
  }
};

struct BlowupEvent {
  double time = 0.0;
  std::string reason;  // "peak" or "resolution"
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> core_norm;
  std::vector<double> total_norm;
  std::vector<double> peak_amplitude;
  std::vector<cplx> center_value;
  std::vector<ComplexWave> profiles;
  std::optional<BlowupEvent> blowup;
  ComplexWave final_state;
  double core_radius = 0.0;
};

// Stationary reference for the sponge: psi_ref(t) = exp(-iEt) phi.
struct Reference {
  std::vector<double> phi;
  double energy = 0.0;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// DST-I of length n on FFTW-aligned buffers.
class SineTransform {
 public:
  explicit SineTransform(std::size_t n) : n_(n) {
    buf_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    if (!buf_ || !out_) throw std::bad_alloc();
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_r2r_1d(static_cast<int>(n), buf_, out_, FFTW_RODFT00, FFTW_ESTIMATE);
    if (!plan_) throw NumericalError("FFTW could not create a DST-I plan");
  }
  ~SineTransform() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(buf_);
    fftw_free(out_);
  }
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;

  // Unnormalised: applying twice multiplies by 2(n + 1).
  void apply(std::vector<double>& v) {
    std::copy(v.begin(), v.end(), buf_);
    fftw_execute(plan_);
    std::copy(out_, out_ + n_, v.begin());
  }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  double* buf_ = nullptr;
  double* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

// Portable draws from a seeded 64-bit Mersenne twister.
class Noise {
 public:
  explicit Noise(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace detail

// Smooth complex perturbation: sum of 8 random cosines, scaled to max |delta| = epsilon.
inline std::vector<cplx> smooth_noise(const ComplexWave& grid, double epsilon, std::uint64_t seed) {
  detail::Noise rng(seed);
  struct Mode {
    cplx c;
    double q, phase;
  };
  std::vector<Mode> modes;
  for (int m = 0; m < 8; ++m) {
    const double re = rng.normal(), im = rng.normal();
    const double q = 0.5 + 3.5 * rng.uniform();
    const double ph = 2.0 * std::numbers::pi * rng.uniform();
    modes.push_back({{re, im}, q, ph});
  }
  std::vector<cplx> d(grid.size());
  double peak = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    cplx s{0.0, 0.0};
    for (const auto& m : modes) s += m.c * std::cos(m.q * grid.x(j) + m.phase);
    d[j] = s;
    peak = std::max(peak, std::abs(s));
  }
  for (auto& v : d) v *= (peak > 0.0 ? epsilon / peak : 0.0);
  return d;
}

inline double default_core_radius(const WaveFunction& stationary, const ProblemSpec& spec) {
  if (spec.energy < 0.0) return 1.5 * locate_xmax(stationary, spec);
  return std::max(1.5 * std::pow(spec.energy, 1.0 / (2.0 * spec.gamma)), 5.0);
}

class SplitStep {
 public:
  SplitStep(const ProblemSpec& spec, const EvolveConfig& cfg, double L, std::size_t samples)
      : spec_(spec), cfg_(cfg), L_(L), N_(samples), n_(samples - 2), dst_(samples - 2), re_(n_), im_(n_) {
    h_ = 2.0 * L / static_cast<double>(samples - 1);
    const double width = cfg.absorber_width.value_or(0.4 * L);
    const double onset = L - width;
    V_.resize(N_);
    W_.resize(N_);
    for (std::size_t j = 0; j < N_; ++j) {
      const double x = std::abs(x_at(j));
      V_[j] = cfg.potential_enabled ? -0.5 * steep_power(x, spec.gamma) : 0.0;
      double w = 0.0;
      if (width > 0.0 && x > onset) {
        const double s = std::clamp((x - onset) / width, 0.0, 1.0);
        w = cfg.absorber_strength * s * s * (3.0 - 2.0 * s);
      }
      W_[j] = w;
    }
    const double scale = 1.0 / (2.0 * static_cast<double>(n_ + 1));
    kin_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      const double kappa = std::numbers::pi * static_cast<double>(k + 1) / (2.0 * L);
      kin_[k] = std::polar(scale, -0.5 * kappa * kappa * cfg.dt);
    }
  }

  double x_at(std::size_t j) const { return -L_ + h_ * static_cast<double>(j); }
  double max_potential() const {
    double m = 0.0;
    for (double v : V_) m = std::max(m, std::abs(v));
    return m;
  }

  void set_reference(const Reference* ref) { ref_ = ref; }

  void step(std::vector<cplx>& psi, double t, double dt_scale = 1.0) {
    const double dt = cfg_.dt * dt_scale;
    sponge(psi, t, dt);
    local(psi, 0.5 * dt);
    kinetic(psi, dt_scale);
    local(psi, 0.5 * dt);
    sponge(psi, t + dt, dt);
  }

  // Fraction of spectral power carried by modes above half the Nyquist wavenumber.
  double high_mode_fraction(const std::vector<cplx>& psi) {
    for (std::size_t k = 0; k < n_; ++k) {
      re_[k] = psi[k + 1].real();
      im_[k] = psi[k + 1].imag();
    }
    dst_.apply(re_);
    dst_.apply(im_);
    double hi = 0.0, tot = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      const double p = re_[k] * re_[k] + im_[k] * im_[k];
      tot += p;
      if (2 * (k + 1) > n_ + 1) hi += p;
    }
    return tot > 0.0 ? hi / tot : 0.0;
  }

 private:
  void local(std::vector<cplx>& psi, double tau) const {
    for (std::size_t j = 1; j + 1 < N_; ++j) {
      double u = V_[j];
      if (spec_.g != 0) {
        const double a2 = std::norm(psi[j]);
        u += spec_.g * (spec_.sigma == 1 ? a2 : a2 * a2);
      }
      psi[j] *= std::polar(1.0, -u * tau);
    }
  }

  void kinetic(std::vector<cplx>& psi, double dt_scale) {
    for (std::size_t k = 0; k < n_; ++k) {
      re_[k] = psi[k + 1].real();
      im_[k] = psi[k + 1].imag();
    }
    dst_.apply(re_);
    dst_.apply(im_);
    for (std::size_t k = 0; k < n_; ++k) {
      cplx f = kin_[k];
      if (dt_scale != 1.0) f = std::polar(std::abs(f), std::arg(f) * dt_scale);
      const cplx a = cplx(re_[k], im_[k]) * f;
      re_[k] = a.real();
      im_[k] = a.imag();
    }
    dst_.apply(re_);
    dst_.apply(im_);
    for (std::size_t k = 0; k < n_; ++k) psi[k + 1] = {re_[k], im_[k]};
    psi.front() = psi.back() = 0.0;
  }

  void sponge(std::vector<cplx>& psi, double t, double dt) const {
    const cplx rot = ref_ ? std::polar(1.0, -ref_->energy * t) : cplx{};
    for (std::size_t j = 0; j < N_; ++j) {
      if (W_[j] == 0.0) continue;
      const double damp = std::exp(-0.5 * W_[j] * dt);
      const cplx r = ref_ ? rot * ref_->phi[j] : cplx{};
      psi[j] = r + (psi[j] - r) * damp;
    }
  }

  ProblemSpec spec_;
  EvolveConfig cfg_;
  double L_;
  std::size_t N_, n_;
  double h_ = 0.0;
  detail::SineTransform dst_;
  std::vector<double> re_, im_;
  std::vector<double> V_, W_;
  std::vector<cplx> kin_;
  const Reference* ref_ = nullptr;
};

namespace detail {

struct Diagnostics {
  double core = 0.0, total = 0.0, peak = 0.0;
};

inline Diagnostics measure(const ComplexWave& grid, const std::vector<cplx>& psi, double core_radius) {
  Diagnostics d;
  const double h = grid.spacing();
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double p = std::norm(psi[j]);
    const double w = (j == 0 || j + 1 == psi.size()) ? 0.5 * h : h;
    d.total += w * p;
    if (std::abs(grid.x(j)) < core_radius) d.core += h * p;
    d.peak = std::max(d.peak, std::sqrt(p));
  }
  return d;
}

}  // namespace detail

inline Trajectory propagate(const ComplexWave& initial, const ProblemSpec& spec, const EvolveConfig& cfg,
                            const Reference* reference = nullptr) {
  spec.validate();
  if (spec.dimension != Dimension::line) throw ConfigError("propagate evolves 1D fields only");
  initial.validate();
  const double L = initial.half_width;
  cfg.validate(L);
  if (reference && reference->phi.size() != initial.size())
    throw ConfigError("reference field does not match the initial field");
  const double h = initial.spacing();
  const int ppw = 8;
  if (cfg.potential_enabled) {
    const double bound = 2.0 * std::numbers::pi / (std::max(local_wavenumber(spec, L), 1.0) * ppw);
    if (h > bound * (1.0 + 1e-12))
      throw ConfigError("evolution grid spacing " + std::to_string(h) + " exceeds the resolution bound " +
                        std::to_string(bound));
  }

  SplitStep stepper(spec, cfg, L, initial.size());
  stepper.set_reference(reference);
  if (cfg.dt * stepper.max_potential() > std::numbers::pi / 2)
    throw ConfigError("dt too large: dt * max|V| = " + std::to_string(cfg.dt * stepper.max_potential()) +
                      " exceeds pi/2");

  if (cfg.check_step_halving) {
    std::vector<cplx> a = initial.values, b = initial.values;
    for (int k = 0; k < 10; ++k) stepper.step(a, k * cfg.dt);
    for (int k = 0; k < 20; ++k) stepper.step(b, k * 0.5 * cfg.dt, 0.5);
    double diff = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      diff = std::max(diff, std::abs(a[j] - b[j]));
      ref = std::max(ref, std::abs(b[j]));
    }
    if (!(diff <= 1e-2 * ref))
      throw NumericalError("scheme unstable at this dt: step-halving disagreement " + std::to_string(diff / ref));
  }

  Trajectory tr;
  tr.core_radius = cfg.core_radius.value_or(0.5 * L);
  std::vector<cplx> psi = initial.values;
  const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  const std::size_t mid = psi.size() / 2;
  const auto record = [&](double t, const detail::Diagnostics& d) {
    tr.times.push_back(t);
    tr.core_norm.push_back(d.core);
    tr.total_norm.push_back(d.total);
    tr.peak_amplitude.push_back(d.peak);
    tr.center_value.push_back(psi[mid]);
    if (cfg.keep_profiles) tr.profiles.push_back({L, psi});
  };
  const auto d0 = detail::measure(initial, psi, tr.core_radius);
  const double peak0 = d0.peak;
  record(0.0, d0);

  for (std::size_t n = 1; n <= steps; ++n) {
    const double t0 = static_cast<double>(n - 1) * cfg.dt;
    stepper.step(psi, t0);
    const double t = static_cast<double>(n) * cfg.dt;
    const bool at_stride = n % cfg.snapshot_stride == 0 || n == steps;
    double peak = 0.0;
    bool finite = true;
    for (const auto& v : psi) {
      const double a = std::abs(v);
      if (!std::isfinite(a)) finite = false;
      peak = std::max(peak, a);
    }
    std::optional<BlowupEvent> event;
    if (finite && peak > cfg.blowup_factor * peak0) event = BlowupEvent{t, "peak"};
    if (!event && finite && (at_stride || n % 10 == 0) && stepper.high_mode_fraction(psi) > cfg.monitor_fraction)
      event = BlowupEvent{t, "resolution"};
    if (!finite) throw NumericalError("non-finite field without a declared blowup (scheme failure)", t);
    if (event || at_stride) record(t, detail::measure(initial, psi, tr.core_radius));
    if (event) {
      tr.blowup = event;
      break;
    }
  }
  tr.final_state = {L, psi};
  return tr;
}

// ---------------------------------------------------------------------------

enum class Verdict { stable, deformed, collapse };
inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::deformed: return "deformed";
    default: return "collapse";
  }
}

struct StabilityVerdict {
  Verdict verdict = Verdict::stable;
  double max_profile_deviation = 0.0;
  std::optional<double> blowup_time;
  std::optional<std::string> blowup_reason;
  double core_radius = 0.0;
  double stable_threshold = 0.05;
  Trajectory trajectory;
};

// ||psi - c phi|| / ||c phi|| over |x| < R, c = <phi, psi> / <phi, phi>.
inline double profile_deviation(const ComplexWave& grid, const std::vector<cplx>& psi, const std::vector<double>& phi,
                                double core_radius) {
  cplx num{0.0, 0.0};
  double den = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    if (std::abs(grid.x(j)) >= core_radius) continue;
    num += phi[j] * psi[j];
    den += phi[j] * phi[j];
  }
  if (!(den > 0.0)) throw NumericalError("reference state vanishes in the core");
  const cplx c = num / den;
  double err = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    if (std::abs(grid.x(j)) >= core_radius) continue;
    err += std::norm(psi[j] - c * phi[j]);
  }
  return std::sqrt(err / (std::norm(c) * den));
}

struct StabilityOptions {
  std::uint64_t seed = 20240601;
  double threshold = 0.05;
};

inline StabilityVerdict stability_test(const WaveFunction& stationary, const ProblemSpec& spec, double epsilon,
                                       EvolveConfig cfg, const StabilityOptions& opt = {}) {
  if (!(epsilon >= 0.0 && epsilon <= 0.1)) throw ConfigError("perturbation epsilon must lie in [0, 0.1]");
  const ComplexWave base = extend_to_full_line(stationary, spec);
  Reference ref;
  ref.energy = spec.energy;
  ref.phi.resize(base.size());
  for (std::size_t j = 0; j < base.size(); ++j) ref.phi[j] = base.values[j].real();

  const double L = base.half_width;
  const double onset = L - cfg.absorber_width.value_or(0.4 * L);
  if (!cfg.core_radius) cfg.core_radius = std::min(default_core_radius(stationary, spec), onset);
  cfg.keep_profiles = true;

  ComplexWave init = base;
  if (epsilon > 0.0) {
    const auto delta = smooth_noise(base, epsilon, opt.seed);
    for (std::size_t j = 0; j < init.size(); ++j) init.values[j] *= (1.0 + delta[j]);
  }

  StabilityVerdict out;
  out.trajectory = propagate(init, spec, cfg, &ref);
  out.core_radius = *cfg.core_radius;
  out.stable_threshold = opt.threshold;
  for (const auto& p : out.trajectory.profiles)
    out.max_profile_deviation = std::max(out.max_profile_deviation, profile_deviation(base, p.values, ref.phi, out.core_radius));
  if (out.trajectory.blowup) {
    out.verdict = Verdict::collapse;
    out.blowup_time = out.trajectory.blowup->time;
    out.blowup_reason = out.trajectory.blowup->reason;
  } else {
    out.verdict = out.max_profile_deviation < opt.threshold ? Verdict::stable : Verdict::deformed;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct CollapseScanConfig {
  double box_extent = 5.0;   // requested box half width; the box ends at a node below this
  double norm_extent = 12.0;  // extent of the solve used for the state norm
  double epsilon = 0.01;
  int refine_steps = 6;       // bisections in amplitude between the bracketing states
  double target_ratio = 1.2;  // stop refining once N_high / N_low is below this
  StabilityOptions stability;
  unsigned workers = default_workers();
};

struct LadderEntry {
  double amplitude = 0.0;
  double norm = 0.0;
  Verdict verdict = Verdict::stable;
  double max_profile_deviation = 0.0;
  std::optional<double> blowup_time;
};

struct CollapseBracket {
  double n_low = 0.0;
  double n_high = 0.0;
  double a_low = 0.0;
  double a_high = 0.0;
  std::vector<LadderEntry> ladder;  // ladder plus refinement points, sorted by amplitude
};

class LadderError : public NumericalError {
 public:
  LadderError(const std::string& what, std::vector<LadderEntry> table)
      : NumericalError(what), table_(std::move(table)) {}
  const std::vector<LadderEntry>& table() const { return table_; }

 private:
  std::vector<LadderEntry> table_;
};

inline int verdict_rank(Verdict v) { return v == Verdict::stable ? 0 : v == Verdict::deformed ? 1 : 2; }

inline LadderEntry evaluate_rung(const ProblemSpec& spec, double A, const ShootConfig& shoot, const EvolveConfig& evo,
                                 const CollapseScanConfig& sc) {
  ShootConfig c = shoot;
  c.amplitude = A;
  LadderEntry e;
  e.amplitude = A;
  c.max_extent = sc.norm_extent;
  c.samples.reset();
  e.norm = state_norm(solve_stationary_1d(spec, c), spec);
  const WaveFunction box = box_state(spec, c, sc.box_extent);
  const StabilityVerdict v = stability_test(box, spec, sc.epsilon, evo, sc.stability);
  e.verdict = v.verdict;
  e.max_profile_deviation = v.max_profile_deviation;
  e.blowup_time = v.blowup_time;
  return e;
}

inline std::string describe(const std::vector<LadderEntry>& table) {
  std::string s;
  for (const auto& e : table)
    s += "\n  A=" + std::to_string(e.amplitude) + " N=" + std::to_string(e.norm) + " " + to_string(e.verdict);
  return s;
}

// Checks a ladder sorted by amplitude and returns the index of its first
// collapsing rung. Throws LadderError with the full table otherwise.
inline std::size_t first_collapse(const std::vector<LadderEntry>& lad) {
  if (lad.empty()) throw ConfigError("empty ladder");
  for (std::size_t i = 1; i < lad.size(); ++i) {
    if (!(lad[i].norm > lad[i - 1].norm))
      throw LadderError("norm is not increasing along the amplitude ladder:" + describe(lad), lad);
    if (verdict_rank(lad[i].verdict) < verdict_rank(lad[i - 1].verdict))
      throw LadderError("non-monotone verdicts across the ladder:" + describe(lad), lad);
  }
  if (lad.front().verdict == Verdict::collapse)
    throw LadderError("no lower bracket: every state collapses" + describe(lad), lad);
  if (lad.back().verdict != Verdict::collapse)
    throw LadderError("no upper bracket: largest tested N = " + std::to_string(lad.back().norm) + describe(lad), lad);
  std::size_t hi = 0;
  while (lad[hi].verdict != Verdict::collapse) ++hi;
  return hi;
}

inline CollapseBracket collapse_scan(const ProblemSpec& spec, const std::vector<double>& amplitudes,
                                     const ShootConfig& shoot, const EvolveConfig& evo,
                                     const CollapseScanConfig& sc = {}) {
  if (spec.g != -1 || spec.sigma != 2) throw ConfigError("collapse_scan needs the focusing quintic case (g=-1, sigma=2)");
  if (amplitudes.size() < 2) throw ConfigError("collapse_scan needs at least two amplitudes");
  for (std::size_t i = 1; i < amplitudes.size(); ++i)
    if (!(amplitudes[i] > amplitudes[i - 1])) throw ConfigError("amplitudes must be strictly ascending");

  CollapseBracket out;
  out.ladder = detail::parallel_map<LadderEntry>(amplitudes.size(), sc.workers, [&](std::size_t i) {
    return evaluate_rung(spec, amplitudes[i], shoot, evo, sc);
  });
  const std::size_t hi = first_collapse(out.ladder);
  const auto& lad = out.ladder;
  LadderEntry low = lad[hi - 1], high = lad[hi];
  std::vector<LadderEntry> extra;
  for (int k = 0; k < sc.refine_steps && high.norm / low.norm > sc.target_ratio; ++k) {
    const LadderEntry mid = evaluate_rung(spec, 0.5 * (low.amplitude + high.amplitude), shoot, evo, sc);
    extra.push_back(mid);
    if (!(mid.norm > low.norm && mid.norm < high.norm))
      throw LadderError("norm is not monotone inside the bracket" + describe(extra), extra);
    (mid.verdict == Verdict::collapse ? high : low) = mid;
  }
  out.ladder.insert(out.ladder.end(), extra.begin(), extra.end());
  std::sort(out.ladder.begin(), out.ladder.end(),
            [](const LadderEntry& a, const LadderEntry& b) { return a.amplitude < b.amplitude; });
  out.n_low = low.norm;
  out.n_high = high.norm;
  out.a_low = low.amplitude;
  out.a_high = high.amplitude;
  return out;
}

// Norm of the homogeneous quintic soliton of i psi_t = -(1/2) psi_xx - |psi|^4 psi,
// |psi|^2 = sqrt(3) k sech(2 k x) / sqrt(2), by trapezoidal quadrature. The
// result does not depend on k.
inline double townes_quintic_norm(double k = 1.0, double half_width = 40.0, std::size_t samples = 400001) {
  const double A = std::sqrt(1.5) * k;
  const double h = 2.0 * half_width / static_cast<double>(samples - 1);
  double s = 0.0;
  for (std::size_t j = 0; j < samples; ++j) {
    const double x = -half_width + h * static_cast<double>(j);
    const double w = (j == 0 || j + 1 == samples) ? 0.5 : 1.0;
    s += w * A / std::cosh(2.0 * k * x);
  }
  return s * h;
}

}  // namespace xbound
