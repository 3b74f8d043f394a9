#pragma once

// Qubit-state-conditioned coherent-amplitude dynamics on the reduced bus model
// (two drive resonators plus M retained bus modes), phase accumulation, the
// spectral (eigenbasis-convolution) solution, closed-form steady-state rates,
// and the sweeps built on them.
//
// The interaction matrix G is stored in GHz with the -i and -kappa/2 factors
// folded in: alpha' = 2*pi * (G alpha - (i/2) E(t)). The factor 2*pi appears
// only in the integrators.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ripsim/device.hpp"
#include "ripsim/envelope.hpp"

namespace ripsim {

struct numerical_abort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class StateLabel { s00, s01, s10, s11 };

inline constexpr std::array<StateLabel, 4> k_all_states = {
    StateLabel::s00, StateLabel::s01, StateLabel::s10, StateLabel::s11};

inline bool left_excited(StateLabel s) {
  return s == StateLabel::s10 || s == StateLabel::s11;
}
inline bool right_excited(StateLabel s) {
  return s == StateLabel::s01 || s == StateLabel::s11;
}

inline std::string to_string(StateLabel s) {
  switch (s) {
    case StateLabel::s00: return "00";
    case StateLabel::s01: return "01";
    case StateLabel::s10: return "10";
    case StateLabel::s11: return "11";
  }
  throw std::logic_error("unreachable state label");
}

/// Reduced linear model: index order is [left drive, bus modes..., right drive].
/// All rates plain GHz; drives are complex peak amplitudes eps * e^{i phi}.
struct ReducedModel {
  std::vector<double> detunings;  // nu_p - omega_d per entry
  std::vector<double> kappas;
  std::vector<double> g_left;   // left-drive <-> mode couplings (size = modes)
  std::vector<double> g_right;  // right-drive <-> mode couplings (parity-signed)
  double chi_left = 0.0;        // signed chi-bar on the drive resonators
  double chi_right = 0.0;
  std::complex<double> drive_left{0.0, 0.0};
  std::complex<double> drive_right{0.0, 0.0};
  EnvelopeSpec envelope_left;
  EnvelopeSpec envelope_right;

  int modes() const { return static_cast<int>(detunings.size()) - 2; }
  int dim() const { return static_cast<int>(detunings.size()); }
  int left_index() const { return 0; }
  int right_index() const { return dim() - 1; }
};

/// Builds the reduced model with a symmetric window of mode_count bus modes
/// centered on the selected harmonic; mode_count = 1 is the single-mode model
/// of the main text (same code path). The right-side coupling carries the
/// (-1)^m parity sign of the harmonic's spatial profile.
inline ReducedModel reduced_model(const DeviceConfig& dev, int mode_count = 1) {
  if (mode_count < 1) throw std::invalid_argument("mode_count must be >= 1");
  const double w_d = dev.left_drive_field.frequency;
  if (std::abs(dev.right_drive_field.frequency - w_d) > 1e-12)
    throw std::invalid_argument("drives must share one frequency");
  ReducedModel m;
  const int n = mode_count + 2;
  m.detunings.resize(n);
  m.kappas.resize(n);
  m.g_left.resize(mode_count);
  m.g_right.resize(mode_count);
  m.detunings.front() = dev.left_drive.frequency - w_d;
  m.kappas.front() = dev.left_drive.decay_rate;
  m.detunings.back() = dev.right_drive.frequency - w_d;
  m.kappas.back() = dev.right_drive.decay_rate;
  const int m0 = dev.long_resonator.selected_mode_index;
  const int q0 = -(mode_count - 1) / 2;
  for (int i = 0; i < mode_count; ++i) {
    const int q = q0 + i;
    const double nu = mode_count == 1
                          ? dev.center.frequency
                          : dev.long_resonator.base_frequency +
                                q * dev.long_resonator.fsr;
    m.detunings[1 + i] = nu - w_d;
    m.kappas[1 + i] = dev.center.decay_rate;
    m.g_left[i] = dev.couplings.g_left_drive_center;
    const double sign = ((m0 + q) % 2 == 0) ? 1.0 : -1.0;
    m.g_right[i] = sign * dev.couplings.g_right_drive_center;
  }
  m.chi_left = dispersive_shift(dev.left_qubit, dev.left_drive,
                                dev.couplings.g_left_qubit_drive);
  m.chi_right = dispersive_shift(dev.right_qubit, dev.right_drive,
                                 dev.couplings.g_right_qubit_drive);
  const std::complex<double> i1(0.0, 1.0);
  m.drive_left = dev.left_drive_field.peak_amplitude *
                 std::exp(i1 * dev.left_drive_field.phase);
  m.drive_right = dev.right_drive_field.peak_amplitude *
                  std::exp(i1 * dev.right_drive_field.phase);
  m.envelope_left = dev.left_drive_field.envelope;
  m.envelope_right = dev.right_drive_field.envelope;
  return m;
}

struct InteractionMatrix {
  Eigen::MatrixXcd G;  // GHz convention: diag -i(Delta + chi~) - kappa/2
  Eigen::VectorXcd E;  // peak drive vector (envelope applied at integration time)
};

/// Signed dispersive pull the given state puts on resonator p. Only a drive
/// resonator feels its own qubit; bus-mode pulls are state-independent and
/// drop out of every difference, so they are folded into the frame.
inline double state_chi(const ReducedModel& m, StateLabel jk, int p) {
  if (p == m.left_index()) return left_excited(jk) ? m.chi_left : 0.0;
  if (p == m.right_index()) return right_excited(jk) ? m.chi_right : 0.0;
  return 0.0;
}

inline InteractionMatrix build_interaction_matrix(StateLabel jk,
                                                  const ReducedModel& m) {
  const int n = m.dim();
  const std::complex<double> i1(0.0, 1.0);
  InteractionMatrix out;
  out.G = Eigen::MatrixXcd::Zero(n, n);
  out.E = Eigen::VectorXcd::Zero(n);
  for (int p = 0; p < n; ++p)
    out.G(p, p) = -i1 * (m.detunings[p] + state_chi(m, jk, p)) - 0.5 * m.kappas[p];
  for (int k = 0; k < m.modes(); ++k) {
    out.G(0, 1 + k) = -i1 * m.g_left[k];
    out.G(1 + k, 0) = -i1 * m.g_left[k];
    out.G(n - 1, 1 + k) = -i1 * m.g_right[k];
    out.G(1 + k, n - 1) = -i1 * m.g_right[k];
  }
  out.E(0) = m.drive_left;
  out.E(n - 1) = m.drive_right;
  return out;
}

struct AmplitudeTrajectory {
  double dt = 0.0;
  // amplitudes[state][step] is the mode-amplitude vector at t = step * dt
  std::array<std::vector<Eigen::VectorXcd>, 4> amplitudes;

  std::size_t steps() const { return amplitudes[0].size(); }
  const Eigen::VectorXcd& terminal(StateLabel s) const {
    return amplitudes[static_cast<int>(s)].back();
  }
  /// Summed terminal photons |alpha|^2, maximized over the four qubit states.
  double worst_residual_photons() const {
    double worst = 0.0;
    for (const auto& traj : amplitudes)
      worst = std::max(worst, traj.back().squaredNorm());
    return worst;
  }
};

namespace detail {

// Envelope samples on a half-step grid so RK4 midpoints need no re-evaluation;
// zero past the pulse end (flat envelopes excepted: they are only ever
// integrated over their own duration).
struct HalfStepEnvelope {
  std::vector<double> samples;
  double at(std::size_t half_step) const {
    return half_step < samples.size() ? samples[half_step] : 0.0;
  }
};

inline HalfStepEnvelope sample_half_steps(const EnvelopeSpec& e, double dt,
                                          std::size_t steps) {
  HalfStepEnvelope out;
  const double T = total_duration(e);
  const std::size_t n_env =
      static_cast<std::size_t>(std::floor(T / (0.5 * dt) + 1e-9));
  out.samples.resize(std::min(2 * steps, n_env) + 1);
  for (std::size_t h = 0; h < out.samples.size(); ++h)
    out.samples[h] = evaluate_envelope(e, std::min(h * 0.5 * dt, T));
  return out;
}

}  // namespace detail

/// Integrates alpha' = 2 pi (G alpha - (i/2) E env(t)) for all four qubit
/// states from alpha(0) = 0 with classical RK4. Past the envelope's end the
/// drive is zero (free ring-down). Aborts if any amplitude exceeds 1e6.
inline AmplitudeTrajectory integrate_amplitudes(const ReducedModel& m, double T,
                                                double dt = 0.02) {
  if (dt <= 0.0 || T < 0.0) throw std::invalid_argument("bad integration window");
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const auto env_l = detail::sample_half_steps(m.envelope_left, dt, steps);
  const auto env_r = detail::sample_half_steps(m.envelope_right, dt, steps);
  const std::complex<double> half_i(0.0, 0.5);

  AmplitudeTrajectory out;
  out.dt = dt;
  for (int s = 0; s < 4; ++s) {
    const InteractionMatrix im =
        build_interaction_matrix(static_cast<StateLabel>(s), m);
    const Eigen::MatrixXcd A = k_two_pi * im.G;
    const Eigen::VectorXcd el = -k_two_pi * half_i * m.drive_left *
                                Eigen::VectorXcd::Unit(m.dim(), 0);
    const Eigen::VectorXcd er = -k_two_pi * half_i * m.drive_right *
                                Eigen::VectorXcd::Unit(m.dim(), m.dim() - 1);
    auto deriv = [&](const Eigen::VectorXcd& a, std::size_t half_step) {
      return (A * a + env_l.at(half_step) * el + env_r.at(half_step) * er).eval();
    };
    auto& traj = out.amplitudes[s];
    traj.reserve(steps + 1);
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(m.dim());
    traj.push_back(a);
    for (std::size_t i = 0; i < steps; ++i) {
      const Eigen::VectorXcd k1 = deriv(a, 2 * i);
      const Eigen::VectorXcd k2 = deriv(a + 0.5 * dt * k1, 2 * i + 1);
      const Eigen::VectorXcd k3 = deriv(a + 0.5 * dt * k2, 2 * i + 1);
      const Eigen::VectorXcd k4 = deriv(a + dt * k3, 2 * i + 2);
      a += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!a.allFinite() || a.cwiseAbs().maxCoeff() > 1e6)
        throw numerical_abort("amplitude blow-up at t = " +
                              std::to_string((i + 1) * dt) + " ns; reduce dt");
      traj.push_back(a);
    }
  }
  return out;
}

struct PhaseTrajectory {
  double dt = 0.0;
  std::vector<std::complex<double>> mu_11_00, mu_10_00, mu_01_00;
  std::vector<std::complex<double>> theta_zz;  // mu_11_00 - mu_10_00 - mu_01_00

  std::complex<double> terminal() const { return theta_zz.back(); }
};

/// Accumulates the conditional phases mu' = -2 pi sum_p (chi_jk - chi_nm)
/// alpha_jk alpha_nm^* for the three pairings against 00 and forms theta_ZZ.
/// Composite Simpson over the common grid (trapezoid on a leftover interval).
inline PhaseTrajectory accumulate_phase(const AmplitudeTrajectory& traj,
                                        const ReducedModel& m) {
  const std::size_t n = traj.steps();
  for (const auto& t : traj.amplitudes)
    if (t.size() != n) throw std::invalid_argument("trajectory grid mismatch");

  auto rate = [&m, &traj](StateLabel jk, StateLabel nm, std::size_t i) {
    const auto& a = traj.amplitudes[static_cast<int>(jk)][i];
    const auto& b = traj.amplitudes[static_cast<int>(nm)][i];
    std::complex<double> r = 0.0;
    for (int p : {m.left_index(), m.right_index()}) {
      const double dchi = state_chi(m, jk, p) - state_chi(m, nm, p);
      if (dchi != 0.0) r += dchi * a(p) * std::conj(b(p));
    }
    return -k_two_pi * r;
  };

  PhaseTrajectory out;
  out.dt = traj.dt;
  const std::array<std::pair<StateLabel, StateLabel>, 3> pairs = {
      {{StateLabel::s11, StateLabel::s00},
       {StateLabel::s10, StateLabel::s00},
       {StateLabel::s01, StateLabel::s00}}};
  std::array<std::vector<std::complex<double>>*, 3> dest = {
      &out.mu_11_00, &out.mu_10_00, &out.mu_01_00};
  for (int k = 0; k < 3; ++k) {
    auto& mu = *dest[k];
    mu.resize(n, 0.0);
    std::vector<std::complex<double>> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = rate(pairs[k].first, pairs[k].second, i);
    const double h = traj.dt;
    for (std::size_t i = 1; i < n; ++i) {
      if (i + 1 < n && i % 2 == 1) {
        // fill the odd point by half-Simpson so every grid point is populated
        mu[i] = mu[i - 1] + (h / 12.0) * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
      } else if (i % 2 == 0) {
        mu[i] = mu[i - 2] + (h / 3.0) * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
      } else {
        mu[i] = mu[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
      }
    }
  }
  out.theta_zz.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.theta_zz[i] = out.mu_11_00[i] - out.mu_10_00[i] - out.mu_01_00[i];
  return out;
}

// ---------------------------------------------------------------------------
// Spectral solution

struct SpectralSolution {
  std::array<Eigen::VectorXcd, 4> amplitudes;  // per StateLabel at time t
  double worst_condition = 0.0;  // eigenbasis condition number, max over states
  bool ill_conditioned = false;  // condition > 1e8
};

/// Exact-in-form solution via eigen-decomposition of G: each eigenmode evolves
/// by a scalar convolution of the envelope against e^{d (t - t')}, evaluated
/// with composite-Simpson quadrature at step quad_dt.
inline SpectralSolution spectral_solution(const ReducedModel& m, double t,
                                          double quad_dt = 0.005) {
  if (t < 0.0 || quad_dt <= 0.0) throw std::invalid_argument("bad spectral window");
  SpectralSolution out;
  // Quadrature grid (even interval count for Simpson).
  std::size_t n = static_cast<std::size_t>(std::ceil(t / quad_dt));
  if (n % 2 == 1) ++n;
  if (n == 0) n = 2;
  const double h = t / static_cast<double>(n);
  const double Tl = total_duration(m.envelope_left);
  const double Tr = total_duration(m.envelope_right);
  auto env = [&](const EnvelopeSpec& e, double T, double tp) {
    return tp <= T ? evaluate_envelope(e, tp) : 0.0;
  };
  for (int s = 0; s < 4; ++s) {
    const InteractionMatrix im =
        build_interaction_matrix(static_cast<StateLabel>(s), m);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(im.G);
    if (es.info() != Eigen::Success)
      throw numerical_abort("eigen-decomposition failed in spectral_solution");
    const Eigen::MatrixXcd& V = es.eigenvectors();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
    const double cond = svd.singularValues()(0) /
                        svd.singularValues()(svd.singularValues().size() - 1);
    out.worst_condition = std::max(out.worst_condition, cond);
    // Per-drive forcing in the eigenbasis: alpha' = 2 pi (G a - (i/2) E env).
    const std::complex<double> half_i(0.0, 0.5);
    const Eigen::VectorXcd fl =
        V.partialPivLu().solve((-k_two_pi * half_i * m.drive_left) *
                               Eigen::VectorXcd::Unit(m.dim(), 0));
    const Eigen::VectorXcd fr =
        V.partialPivLu().solve((-k_two_pi * half_i * m.drive_right) *
                               Eigen::VectorXcd::Unit(m.dim(), m.dim() - 1));
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(m.dim());
    for (int k = 0; k < m.dim(); ++k) {
      const std::complex<double> d = k_two_pi * es.eigenvalues()(k);
      std::complex<double> il = 0.0, ir = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        const double tp = static_cast<double>(i) * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const std::complex<double> g = std::exp(d * (t - tp));
        il += w * g * env(m.envelope_left, Tl, tp);
        ir += w * g * env(m.envelope_right, Tr, tp);
      }
      c(k) = (h / 3.0) * (fl(k) * il + fr(k) * ir);
    }
    out.amplitudes[s] = V * c;
  }
  out.ill_conditioned = out.worst_condition > 1e8;
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms and steady state

/// Re theta'_zz of the symmetric single-mode model at steady state, in MHz.
/// chi_bar, eps, Delta, g are magnitudes in GHz.
inline double zz_rate_closed_form(double eps, double chi_bar, double delta,
                                  double g) {
  const double d1 = 9.0 * delta * delta - 18.0 * g * g - 6.0 * delta * chi_bar +
                    chi_bar * chi_bar;
  const double d2 = 2.0 * delta * delta - 3.0 * delta * chi_bar + chi_bar * chi_bar;
  const double scale = delta * delta + g * g + chi_bar * chi_bar;
  if (std::abs(d1) < 1e-12 * scale || std::abs(d2) < 1e-12 * scale ||
      std::abs(delta) < k_degenerate_eps)
    throw pole_error("zz_rate_closed_form: denominator vanishes");
  return 1e3 * (eps * eps * chi_bar * chi_bar / (4.0 * delta)) *
         (9.0 / d1 - 2.0 / d2);
}

/// Im theta'_zz (drive-induced coherence-loss rate) in MHz; linear in kappa.
/// Deep-dispersive asymptote: accurate only for chi_bar << Delta.
inline double dephasing_rate_closed_form(double eps, double chi_bar, double delta,
                                         double g, double kappa) {
  const double b1 = 2.0 * (delta * delta - 3.0 * delta * chi_bar +
                           chi_bar * chi_bar);
  const double b2 = 9.0 * delta * delta - 18.0 * g * g - 6.0 * delta * chi_bar +
                    chi_bar * chi_bar;
  const double scale = delta * delta + g * g + chi_bar * chi_bar;
  if (std::abs(b1) < 1e-12 * scale || std::abs(b2) < 1e-12 * scale ||
      std::abs(delta) < k_degenerate_eps)
    throw pole_error("dephasing_rate_closed_form: denominator vanishes");
  return 1e3 * (eps * eps * chi_bar * chi_bar * kappa / (4.0 * delta)) *
         ((4.0 * delta - 3.0 * chi_bar) / (0.5 * b1 * b1) -
          27.0 * (3.0 * delta - chi_bar) / (b2 * b2));
}

/// Steady-state amplitudes under a unit envelope: G alpha = (i/2) E.
inline Eigen::VectorXcd steady_state(const ReducedModel& m, StateLabel jk) {
  const InteractionMatrix im = build_interaction_matrix(jk, m);
  const std::complex<double> half_i(0.0, 0.5);
  return im.G.partialPivLu().solve(half_i * im.E);
}

/// Instantaneous Re theta'_zz / 2 pi from steady-state amplitudes, in MHz.
inline double zz_rate_steady(const ReducedModel& m) {
  std::array<Eigen::VectorXcd, 4> a;
  for (int s = 0; s < 4; ++s) a[s] = steady_state(m, static_cast<StateLabel>(s));
  auto pairing = [&](StateLabel jk, StateLabel nm) {
    const auto& x = a[static_cast<int>(jk)];
    const auto& y = a[static_cast<int>(nm)];
    std::complex<double> r = 0.0;
    for (int p : {m.left_index(), m.right_index()}) {
      const double dchi = state_chi(m, jk, p) - state_chi(m, nm, p);
      if (dchi != 0.0) r += dchi * x(p) * std::conj(y(p));
    }
    return -r;  // rate / 2 pi, GHz
  };
  const std::complex<double> rate = pairing(StateLabel::s11, StateLabel::s00) -
                                    pairing(StateLabel::s10, StateLabel::s00) -
                                    pairing(StateLabel::s01, StateLabel::s00);
  return 1e3 * rate.real();
}

/// Total steady-state photon number of the given qubit state.
inline double steady_state_photons(const ReducedModel& m, StateLabel jk) {
  return steady_state(m, jk).squaredNorm();
}

// ---------------------------------------------------------------------------
// Numeric steady-slope measurement and sweeps

struct SlopeFit {
  double rate_mhz = 0.0;       // d(Re theta)/dt / 2 pi, MHz
  double imag_rate_mhz = 0.0;  // same for Im theta
};

/// Least-squares slope of theta_ZZ over [t0, t1] of a phase trajectory,
/// converted to a rate / 2 pi in MHz.
inline SlopeFit fit_phase_slope(const PhaseTrajectory& ph, double t0, double t1) {
  const auto n = ph.theta_zz.size();
  std::size_t i0 = static_cast<std::size_t>(std::ceil(t0 / ph.dt));
  std::size_t i1 = static_cast<std::size_t>(std::floor(t1 / ph.dt));
  if (i1 >= n) i1 = n - 1;
  if (i0 + 1 >= i1) throw std::invalid_argument("slope window too narrow");
  double sx = 0, sxx = 0;
  std::complex<double> sy = 0, sxy = 0;
  const auto cnt = static_cast<double>(i1 - i0 + 1);
  for (std::size_t i = i0; i <= i1; ++i) {
    const double x = static_cast<double>(i) * ph.dt;
    sx += x;
    sxx += x * x;
    sy += ph.theta_zz[i];
    sxy += x * ph.theta_zz[i];
  }
  const std::complex<double> slope =
      (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  SlopeFit out;
  out.rate_mhz = 1e3 * slope.real() / k_two_pi;
  out.imag_rate_mhz = 1e3 * slope.imag() / k_two_pi;
  return out;
}

/// Steady-state ZZ rate from a long constant-envelope run: adiabatic rise
/// into a flat top held to time T, slope fitted over the final 50% of the
/// flat top. The smooth edge matters: with kappa = 0 an abrupt turn-on leaves
/// undamped transient photons that bias the secular slope.
inline SlopeFit measure_zz_numeric(ReducedModel m, double T = 1000.0,
                                   double dt = 0.02) {
  EnvelopeSpec env;
  env.kind = EnvelopeKind::polynomial;
  env.degree = 3;
  env.rise_time = std::min(100.0, 0.2 * T);
  env.hold_time = 2.0 * (T - env.rise_time);  // integration stops mid-platform
  m.envelope_left = env;
  m.envelope_right = env;
  const AmplitudeTrajectory traj = integrate_amplitudes(m, T, dt);
  const PhaseTrajectory ph = accumulate_phase(traj, m);
  return fit_phase_slope(ph, 0.5 * (env.rise_time + T), T);
}

struct ZZResult {
  double zz_rate_numeric = 0.0;     // MHz
  double zz_rate_closed_form = 0.0; // MHz
  double dephasing_rate = 0.0;      // MHz
  std::vector<double> residual_photons;  // per mode, worst qubit state
  double max_mean_photon = 0.0;
  double n_crit_margin = 0.0;  // n_crit / max_mean_photon
  bool failed = false;
  std::string error;
};

namespace detail {

/// Index-parallel map with no shared mutable state; results ordered by index.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const unsigned used = std::min<unsigned>(threads, static_cast<unsigned>(count));
  pool.reserve(used);
  for (unsigned w = 0; w < used; ++w)
    pool.emplace_back([&fn, w, used, count] {
      for (std::size_t i = w; i < count; i += used) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

struct ZZSweepPoint {
  double delta = 0.0;  // GHz
  ZZResult result;
};

/// ZZ rate vs drive detuning Delta (omega_d = center frequency - Delta) with a
/// long flat pulse. Closed form uses the mean |chi| and the mean bus coupling.
/// Per-point failures are recorded in the row, not thrown.
inline std::vector<ZZSweepPoint> zz_sweep(const DeviceConfig& dev,
                                          const std::vector<double>& delta_grid,
                                          double T = 1000.0, double dt = 0.02,
                                          unsigned threads = 1) {
  if (delta_grid.empty()) throw std::invalid_argument("empty detuning grid");
  std::vector<ZZSweepPoint> rows(delta_grid.size());
  detail::parallel_for(delta_grid.size(), threads, [&](std::size_t i) {
    ZZSweepPoint& row = rows[i];
    row.delta = delta_grid[i];
    try {
      DeviceConfig d = dev;
      d.left_drive_field.frequency = d.center.frequency - row.delta;
      d.right_drive_field.frequency = d.left_drive_field.frequency;
      ReducedModel m = reduced_model(d);
      const SlopeFit fit = measure_zz_numeric(m, T, dt);
      row.result.zz_rate_numeric = fit.rate_mhz;
      row.result.dephasing_rate = fit.imag_rate_mhz;
      const double chi_bar = 0.5 * (std::abs(m.chi_left) + std::abs(m.chi_right));
      const double g = 0.5 * (std::abs(m.g_left[0]) + std::abs(m.g_right[0]));
      row.result.zz_rate_closed_form = zz_rate_closed_form(
          std::abs(m.drive_left), chi_bar, row.delta, g);
      double worst = 0.0;
      int worst_state = 0;
      for (int s = 0; s < 4; ++s) {
        const double n =
            steady_state(m, static_cast<StateLabel>(s)).squaredNorm();
        if (n > worst) {
          worst = n;
          worst_state = s;
        }
      }
      row.result.max_mean_photon = worst;
      const Eigen::VectorXcd a =
          steady_state(m, static_cast<StateLabel>(worst_state));
      row.result.residual_photons.resize(m.dim());
      for (int p = 0; p < m.dim(); ++p)
        row.result.residual_photons[p] = std::norm(a(p));
      const double n_crit =
          critical_photon(dev.left_qubit.frequency - dev.left_drive.frequency,
                          dev.left_qubit.anharmonicity,
                          dev.couplings.g_left_qubit_drive);
      row.result.n_crit_margin = worst > 0.0 ? n_crit / worst : 0.0;
    } catch (const std::exception& e) {
      row.result.failed = true;
      row.result.error = e.what();
    }
  });
  return rows;
}

struct AsymmetryPoint {
  double phi = 0.0;    // drive phase difference, rad
  double theta = 0.0;  // coupling-ratio angle, rad
  double entangling_phase = 0.0;  // Re theta_ZZ(T), rad
  double residual_photons = 0.0;
};

/// Entangling phase over the (phi, theta) grid with g^{lc} = g0 sqrt(2) sin(th)
/// and g^{rc} = g0 sqrt(2) cos(th), preserving the quadrature sum; g0 is the
/// configured left bus coupling.
inline std::vector<AsymmetryPoint> drive_asymmetry_sweep(
    const DeviceConfig& dev, const std::vector<double>& phi_grid,
    const std::vector<double>& theta_grid, double dt = 0.02,
    unsigned threads = 1) {
  for (double th : theta_grid)
    if (!(th > 0.0 && th < 0.5 * std::numbers::pi))
      throw std::invalid_argument("theta must lie in (0, pi/2)");
  const double g0 = std::abs(dev.couplings.g_left_drive_center);
  std::vector<AsymmetryPoint> rows(phi_grid.size() * theta_grid.size());
  detail::parallel_for(rows.size(), threads, [&](std::size_t i) {
    AsymmetryPoint& row = rows[i];
    row.phi = phi_grid[i / theta_grid.size()];
    row.theta = theta_grid[i % theta_grid.size()];
    DeviceConfig d = dev;
    d.couplings.g_left_drive_center = g0 * std::sqrt(2.0) * std::sin(row.theta);
    d.couplings.g_right_drive_center = g0 * std::sqrt(2.0) * std::cos(row.theta);
    d.right_drive_field.phase = d.left_drive_field.phase + row.phi;
    const ReducedModel m = reduced_model(d, d.long_resonator.mode_count);
    const double T = total_duration(m.envelope_left);
    const AmplitudeTrajectory traj = integrate_amplitudes(m, T, dt);
    row.entangling_phase = accumulate_phase(traj, m).terminal().real();
    row.residual_photons = traj.worst_residual_photons();
  });
  return rows;
}

/// Worst-state terminal photons over a (gate time, detuning) grid; the given
/// envelope family is rescaled so the rise occupies half of each gate time.
inline std::vector<std::vector<double>> residual_photon_map(
    const DeviceConfig& dev, const std::vector<double>& t_grid,
    const std::vector<double>& delta_grid, const EnvelopeSpec& envelope,
    double dt = 0.02, unsigned threads = 1) {
  if (t_grid.empty() || delta_grid.empty())
    throw std::invalid_argument("empty grid");
  std::vector<std::vector<double>> out(t_grid.size(),
                                       std::vector<double>(delta_grid.size()));
  detail::parallel_for(t_grid.size() * delta_grid.size(), threads,
                       [&](std::size_t idx) {
    const std::size_t i = idx / delta_grid.size();
    const std::size_t j = idx % delta_grid.size();
    DeviceConfig d = dev;
    d.left_drive_field.frequency = d.center.frequency - delta_grid[j];
    d.right_drive_field.frequency = d.left_drive_field.frequency;
    EnvelopeSpec e = envelope;
    const double T = t_grid[i];
    if (e.kind == EnvelopeKind::flat) {
      e.hold_time = T;
    } else if (e.hold_time > 0.0) {
      const double frac = e.hold_time / total_duration(e);
      e.hold_time = frac * T;
      e.rise_time = 0.5 * (T - e.hold_time);
    } else {
      e.rise_time = 0.5 * T;
    }
    d.left_drive_field.envelope = e;
    d.right_drive_field.envelope = e;
    const ReducedModel m = reduced_model(d);
    out[i][j] = integrate_amplitudes(m, T, dt).worst_residual_photons();
  });
  return out;
}

/// Terminal Re theta_ZZ for one full pulse of the model's own envelope.
inline double entangling_phase(const ReducedModel& m, double dt = 0.02) {
  const double T = std::max(total_duration(m.envelope_left),
                            total_duration(m.envelope_right));
  const AmplitudeTrajectory traj = integrate_amplitudes(m, T, dt);
  return accumulate_phase(traj, m).terminal().real();
}

/// Scales the drive amplitude so |Re theta_ZZ(T)| = pi, using the exact
/// amplitude-squared linearity of the phase. Returns the calibrated amplitude.
inline double calibrate_amplitude_for_pi(ReducedModel& m, double dt = 0.02) {
  const double eps0 = std::abs(m.drive_left);
  if (eps0 <= 0.0) throw std::invalid_argument("zero drive cannot be calibrated");
  double scale = 1.0;
  for (int it = 0; it < 8; ++it) {
    const double th = entangling_phase(m, dt);
    if (std::abs(th) < 1e-15) throw numerical_abort("no entangling phase accrues");
    const double corr = std::sqrt(std::numbers::pi / std::abs(th));
    m.drive_left *= corr;
    m.drive_right *= corr;
    scale *= corr;
    if (std::abs(corr - 1.0) < 1e-12) break;
  }
  return eps0 * scale;
}

}  // namespace ripsim
