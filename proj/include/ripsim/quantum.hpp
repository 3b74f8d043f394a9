#pragma once

// Truncated-Fock Schrodinger simulation of the driven two-qubit /
// three-resonator system, controlled-phase calibration, and CZ process
// tomography.
//
// Basis index order: (q_left, q_right, n_left, n_center, n_right), the two
// qubit occupations outermost. In the rotating_dispersive frame the
// Hamiltonian never mixes qubit occupations, so the computational labels are
// conserved and all entanglement lives in the state-dependent resonator
// dynamics. Energies in GHz; H(t) = 2 pi (h0 + env(t) w) enters integrators.

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ripsim/coherent.hpp"
#include "ripsim/device.hpp"

namespace ripsim {

struct HilbertSpec {
  int qubit_levels = 3;
  int resonator_levels = 7;
  int dimension_cap = 25000;

  long dimension() const {
    return static_cast<long>(qubit_levels) * qubit_levels * resonator_levels *
           resonator_levels * resonator_levels;
  }
  void check() const {
    if (qubit_levels < 2 || resonator_levels < 2)
      throw std::invalid_argument("need at least 2 levels per subsystem");
    if (dimension() > dimension_cap)
      throw std::invalid_argument("Hilbert dimension " +
                                  std::to_string(dimension()) +
                                  " exceeds cap " +
                                  std::to_string(dimension_cap));
  }
};

/// CSR sparse operator; built from (row, col, value) triples.
struct SparseOperator {
  long dim = 0;
  std::vector<long> row_ptr;
  std::vector<long> col;
  std::vector<std::complex<double>> val;
  bool hermitian = false;

  static SparseOperator from_triples(
      long dim, std::map<std::pair<long, long>, std::complex<double>> triples,
      bool hermitian) {
    SparseOperator op;
    op.dim = dim;
    op.hermitian = hermitian;
    op.row_ptr.assign(dim + 1, 0);
    for (const auto& [rc, v] : triples)
      if (std::abs(v) > 0.0) ++op.row_ptr[rc.first + 1];
    for (long r = 0; r < dim; ++r) op.row_ptr[r + 1] += op.row_ptr[r];
    op.col.reserve(op.row_ptr.back());
    op.val.reserve(op.row_ptr.back());
    for (const auto& [rc, v] : triples) {
      if (std::abs(v) == 0.0) continue;
      op.col.push_back(rc.second);
      op.val.push_back(v);
    }
    return op;
  }

  void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    y.setZero();
    for (long r = 0; r < dim; ++r)
      for (long k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        y(r) += val[k] * x(col[k]);
  }

  Eigen::MatrixXcd to_dense() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (long r = 0; r < dim; ++r)
      for (long k = row_ptr[r]; k < row_ptr[r + 1]; ++k) m(r, col[k]) += val[k];
    return m;
  }
};

enum class Frame { rotating_dispersive, lab_exchange };

struct DrivenHamiltonian {
  HilbertSpec hilbert;
  Frame frame = Frame::rotating_dispersive;
  SparseOperator h0;      // GHz
  SparseOperator drive;   // GHz at unit envelope (amplitudes folded in)
  SparseOperator photons; // total resonator number operator
  EnvelopeSpec envelope;
};

namespace detail {

struct BasisIndexer {
  int ql, nl;  // qubit levels, resonator levels
  long index(int q1, int q2, int n1, int nc, int n2) const {
    return (((static_cast<long>(q1) * ql + q2) * nl + n1) * nl + nc) * nl + n2;
  }
};

}  // namespace detail

/// Assembles the sparse Hamiltonian. rotating_dispersive keeps resonator
/// detunings, qubit-state-dependent dispersive pulls on each qubit's own
/// drive resonator (all three qubit levels), bus exchange, and the two drives;
/// constant-per-block qubit energies are absorbed by the frame. lab_exchange
/// keeps bare qubit ladders with explicit qubit-resonator exchange instead of
/// the dispersive pulls (for validating the dispersive reduction).
inline DrivenHamiltonian build_hamiltonian(const DeviceConfig& dev,
                                           const HilbertSpec& hs, Frame frame) {
  hs.check();
  if (std::abs(dev.right_drive_field.frequency - dev.left_drive_field.frequency) >
      1e-12)
    throw std::invalid_argument("drives must share one frequency");
  const double w_d = dev.left_drive_field.frequency;
  const detail::BasisIndexer ix{hs.qubit_levels, hs.resonator_levels};
  const long dim = hs.dimension();

  std::map<std::pair<long, long>, std::complex<double>> h0, drv, nph;
  auto sq = [](int n) { return std::sqrt(static_cast<double>(n)); };

  // Dispersive pull of qubit occupation q on its drive resonator, relative to
  // the q = 0 pull that the frame absorbs.
  auto pull = [](int q, const QubitSpec& qu, const ResonatorSpec& rp, double g) {
    return dispersive_shift_state(q, qu, rp, g) -
           dispersive_shift_state(0, qu, rp, g);
  };

  const std::complex<double> el =
      dev.left_drive_field.peak_amplitude *
      std::exp(std::complex<double>(0.0, dev.left_drive_field.phase));
  const std::complex<double> er =
      dev.right_drive_field.peak_amplitude *
      std::exp(std::complex<double>(0.0, dev.right_drive_field.phase));

  for (int q1 = 0; q1 < hs.qubit_levels; ++q1)
    for (int q2 = 0; q2 < hs.qubit_levels; ++q2)
      for (int n1 = 0; n1 < hs.resonator_levels; ++n1)
        for (int nc = 0; nc < hs.resonator_levels; ++nc)
          for (int n2 = 0; n2 < hs.resonator_levels; ++n2) {
            const long r = ix.index(q1, q2, n1, nc, n2);
            nph[{r, r}] = n1 + nc + n2;
            double diag;
            if (frame == Frame::rotating_dispersive) {
              const double dl =
                  dev.left_drive.frequency - w_d +
                  pull(q1, dev.left_qubit, dev.left_drive,
                       dev.couplings.g_left_qubit_drive);
              const double dr =
                  dev.right_drive.frequency - w_d +
                  pull(q2, dev.right_qubit, dev.right_drive,
                       dev.couplings.g_right_qubit_drive);
              const double dc = dev.center.frequency - w_d;
              diag = dl * n1 + dc * nc + dr * n2;
            } else {
              auto qubit_e = [](int q, const QubitSpec& s) {
                return s.frequency * q + 0.5 * s.anharmonicity * q * (q - 1);
              };
              diag = qubit_e(q1, dev.left_qubit) + qubit_e(q2, dev.right_qubit) +
                     dev.left_drive.frequency * n1 + dev.center.frequency * nc +
                     dev.right_drive.frequency * n2;
            }
            h0[{r, r}] += diag;

            // bus exchange g_pc (a_p^dag a_c + h.c.)
            if (n1 + 1 < hs.resonator_levels && nc > 0) {
              const long c = ix.index(q1, q2, n1 + 1, nc - 1, n2);
              const double v =
                  dev.couplings.g_left_drive_center * sq(n1 + 1) * sq(nc);
              h0[{r, c}] += v;
              h0[{c, r}] += v;
            }
            if (n2 + 1 < hs.resonator_levels && nc > 0) {
              const long c = ix.index(q1, q2, n1, nc - 1, n2 + 1);
              const double v =
                  dev.couplings.g_right_drive_center * sq(n2 + 1) * sq(nc);
              h0[{r, c}] += v;
              h0[{c, r}] += v;
            }
            if (frame == Frame::lab_exchange) {
              // qubit <-> own drive resonator exchange on anharmonic ladders
              if (q1 + 1 < hs.qubit_levels && n1 > 0) {
                const long c = ix.index(q1 + 1, q2, n1 - 1, nc, n2);
                const double v =
                    dev.couplings.g_left_qubit_drive * sq(q1 + 1) * sq(n1);
                h0[{r, c}] += v;
                h0[{c, r}] += v;
              }
              if (q2 + 1 < hs.qubit_levels && n2 > 0) {
                const long c = ix.index(q1, q2 + 1, n1, nc, n2 - 1);
                const double v =
                    dev.couplings.g_right_qubit_drive * sq(q2 + 1) * sq(n2);
                h0[{r, c}] += v;
                h0[{c, r}] += v;
              }
            }
            // drive: 1/2 sum_p eps_p (e^{i phi} a_p^dag + h.c.)
            if (n1 + 1 < hs.resonator_levels) {
              const long c = ix.index(q1, q2, n1 + 1, nc, n2);
              drv[{c, r}] += 0.5 * el * sq(n1 + 1);       // a_l^dag
              drv[{r, c}] += 0.5 * std::conj(el) * sq(n1 + 1);  // a_l
            }
            if (n2 + 1 < hs.resonator_levels) {
              const long c = ix.index(q1, q2, n1, nc, n2 + 1);
              drv[{c, r}] += 0.5 * er * sq(n2 + 1);
              drv[{r, c}] += 0.5 * std::conj(er) * sq(n2 + 1);
            }
          }

  DrivenHamiltonian out;
  out.hilbert = hs;
  out.frame = frame;
  out.h0 = SparseOperator::from_triples(dim, std::move(h0), true);
  out.drive = SparseOperator::from_triples(dim, std::move(drv), true);
  out.photons = SparseOperator::from_triples(dim, std::move(nph), true);
  out.envelope = dev.left_drive_field.envelope;
  return out;
}

/// RK4 integration of psi' = -i 2 pi (h0 + env(t) w) psi. Drive is zero past
/// the envelope's end. Aborts if the norm drifts by more than 1e-6.
inline Eigen::VectorXcd evolve(Eigen::VectorXcd psi, const DrivenHamiltonian& H,
                               double T, double dt = 0.01) {
  if (dt <= 0.0 || T < 0.0) throw std::invalid_argument("bad evolve window");
  if (std::abs(psi.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("initial state must be normalized");
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const auto env = detail::sample_half_steps(H.envelope, dt, steps);
  const std::complex<double> mi(0.0, -k_two_pi);
  Eigen::VectorXcd h0x(psi.size()), wx(psi.size());
  Eigen::VectorXcd k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size());
  Eigen::VectorXcd tmp(psi.size());
  auto deriv = [&](const Eigen::VectorXcd& x, std::size_t half,
                   Eigen::VectorXcd& out) {
    H.h0.apply(x, h0x);
    H.drive.apply(x, wx);
    out = mi * (h0x + env.at(half) * wx);
  };
  for (std::size_t i = 0; i < steps; ++i) {
    deriv(psi, 2 * i, k1);
    tmp = psi + 0.5 * dt * k1;
    deriv(tmp, 2 * i + 1, k2);
    tmp = psi + 0.5 * dt * k2;
    deriv(tmp, 2 * i + 1, k3);
    tmp = psi + dt * k3;
    deriv(tmp, 2 * i + 2, k4);
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (std::abs(psi.norm() - 1.0) > 1e-6)
      throw numerical_abort("norm drift exceeded 1e-6 at t = " +
                            std::to_string((i + 1) * dt) + " ns; reduce dt");
  }
  return psi;
}

/// Mean total resonator photons of a state.
inline double mean_photons(const Eigen::VectorXcd& psi,
                           const DrivenHamiltonian& H) {
  Eigen::VectorXcd y(psi.size());
  H.photons.apply(psi, y);
  return psi.dot(y).real();
}

/// Reduced 4x4 density matrix on the two-qubit computational subspace
/// (qubit levels 0/1; resonators traced out). Trace < 1 signals leakage.
inline Eigen::Matrix4cd computational_density(const Eigen::VectorXcd& psi,
                                              const HilbertSpec& hs) {
  const detail::BasisIndexer ix{hs.qubit_levels, hs.resonator_levels};
  const long res_block = static_cast<long>(hs.resonator_levels) *
                         hs.resonator_levels * hs.resonator_levels;
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      const long bm = ix.index(m >> 1, m & 1, 0, 0, 0);
      const long bn = ix.index(n >> 1, n & 1, 0, 0, 0);
      std::complex<double> s = 0.0;
      for (long k = 0; k < res_block; ++k)
        s += psi(bm + k) * std::conj(psi(bn + k));
      rho(m, n) = s;
    }
  return rho;
}

struct ProcessReport {
  double controlled_phase = 0.0;  // rad, from the computational-basis blocks
  double virtual_z_left = 0.0;    // rad
  double virtual_z_right = 0.0;   // rad
  double process_fidelity = 0.0;  // vs ideal CZ, after virtual-Z
  double average_fidelity = 0.0;  // (d F_pro + 1)/(d + 1), d = 4
  double leakage = 0.0;           // 1 - mean trace of the 16 output rhos
  double residual_photons = 0.0;  // worst over inputs, at gate end
};

namespace detail {

/// Coefficients expressing the single-qubit matrix unit |m><n| in the
/// preparation basis {|0><0|, |1><1|, |+><+|, |+i><+i|}.
inline std::array<std::complex<double>, 4> unit_in_preparations(int m, int n) {
  using c = std::complex<double>;
  if (m == 0 && n == 0) return {c(1), c(0), c(0), c(0)};
  if (m == 1 && n == 1) return {c(0), c(1), c(0), c(0)};
  if (m == 0 && n == 1)
    return {c(-0.5, -0.5), c(-0.5, -0.5), c(1), c(0, 1)};
  return {c(-0.5, 0.5), c(-0.5, 0.5), c(1), c(0, -1)};
}

inline Eigen::Vector2cd preparation_ket(int a) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (a) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {s, s};
    default: return {s, std::complex<double>(0.0, s)};
  }
}

}  // namespace detail

/// Full process tomography of the gate against an ideal CZ: evolves the 16
/// product preparations {0, 1, +, +i}^2, reconstructs the Choi matrix on the
/// computational subspace by linear inversion, and maximizes process fidelity
/// over per-qubit virtual-Z corrections (coarse grid plus local refinement).
inline ProcessReport qpt_fidelity(const DeviceConfig& dev, const HilbertSpec& hs,
                                  double dt = 0.01, unsigned threads = 1) {
  const DrivenHamiltonian H =
      build_hamiltonian(dev, hs, Frame::rotating_dispersive);
  const double T = total_duration(H.envelope);
  const detail::BasisIndexer ix{hs.qubit_levels, hs.resonator_levels};

  std::array<Eigen::Matrix4cd, 16> outputs;
  std::array<double, 16> photons{};
  double trace_sum = 0.0;
  std::array<double, 16> traces{};
  detail::parallel_for(16, threads, [&](std::size_t i) {
    const Eigen::Vector2cd a = detail::preparation_ket(static_cast<int>(i) / 4);
    const Eigen::Vector2cd b = detail::preparation_ket(static_cast<int>(i) % 4);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(hs.dimension());
    for (int q1 = 0; q1 < 2; ++q1)
      for (int q2 = 0; q2 < 2; ++q2)
        psi(ix.index(q1, q2, 0, 0, 0)) = a(q1) * b(q2);
    psi = evolve(psi, H, T, dt);
    outputs[i] = computational_density(psi, hs);
    photons[i] = mean_photons(psi, H);
    traces[i] = outputs[i].trace().real();
  });
  double worst_photons = 0.0;
  for (int i = 0; i < 16; ++i) {
    trace_sum += traces[i];
    worst_photons = std::max(worst_photons, photons[i]);
  }

  // E(|m><n| (x) |u><v|) by linearity, then the Choi matrix
  // J = sum_{mn,uv} E(unit) (x) unit with trace <= 4.
  Eigen::MatrixXcd choi = Eigen::MatrixXcd::Zero(16, 16);
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n)
      for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) {
          const auto ca = detail::unit_in_preparations(m, n);
          const auto cb = detail::unit_in_preparations(u, v);
          Eigen::Matrix4cd e = Eigen::Matrix4cd::Zero();
          for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) e += ca[i] * cb[j] * outputs[4 * i + j];
          const int row_in = 2 * m + u;
          const int col_in = 2 * n + v;
          for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
              choi(4 * r + row_in, 4 * c + col_in) += e(r, c);
        }

  // F(th_l, th_r) = <phi_V | J | phi_V> / 4 with V = Z-corrected CZ.
  auto fidelity = [&choi](double tl, double tr) {
    Eigen::Vector4cd u;  // diagonal of CZ * Z(tl) (x) Z(tr)
    u << 1.0, std::exp(std::complex<double>(0.0, tr)),
        std::exp(std::complex<double>(0.0, tl)),
        -std::exp(std::complex<double>(0.0, tl + tr));
    std::complex<double> f = 0.0;
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n)
        f += std::conj(u(m)) * u(n) * choi(4 * m + m, 4 * n + n);
    return f.real() / 16.0;
  };

  double best_tl = 0.0, best_tr = 0.0, best = -1.0;
  const int grid = 64;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double tl = k_two_pi * i / grid, tr = k_two_pi * j / grid;
      const double f = fidelity(tl, tr);
      if (f > best) {
        best = f;
        best_tl = tl;
        best_tr = tr;
      }
    }
  for (double step = k_two_pi / grid; step > 1e-10; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (const auto& [dl, dr] : std::initializer_list<std::pair<double, double>>{
               {step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}) {
        const double f = fidelity(best_tl + dl, best_tr + dr);
        if (f > best) {
          best = f;
          best_tl += dl;
          best_tr += dr;
          improved = true;
        }
      }
    }
  }

  ProcessReport rep;
  // Controlled phase from the reconstructed conditional coherences.
  const std::complex<double> c_l = choi(4 * 2 + 2, 4 * 0 + 0);  // E(|10><00|)
  const std::complex<double> c_r = choi(4 * 1 + 1, 4 * 0 + 0);  // E(|01><00|)
  const std::complex<double> c_b = choi(4 * 3 + 3, 4 * 0 + 0);  // E(|11><00|)
  double cp = std::arg(c_b) - std::arg(c_l) - std::arg(c_r);
  cp = std::remainder(cp, k_two_pi);
  rep.controlled_phase = cp;
  rep.virtual_z_left = std::remainder(best_tl, k_two_pi);
  rep.virtual_z_right = std::remainder(best_tr, k_two_pi);
  rep.process_fidelity = best;
  rep.average_fidelity = (4.0 * best + 1.0) / 5.0;
  rep.leakage = 1.0 - trace_sum / 16.0;
  rep.residual_photons = worst_photons;
  return rep;
}

/// Process fidelity of the identity channel against CZ under the same
/// definition (virtual-Z already optimal at zero): the harness closed form.
inline double identity_vs_cz_fidelity() {
  // |Tr(CZ)|^2 / 16 = |1 + 1 + 1 - 1|^2 / 16, with the optimal virtual-Z
  // leaving it unchanged for diagonal corrections: max over (tl, tr) of
  // |1 + e^{i tr} + e^{i tl} - e^{i (tl+tr)}|^2 / 16 = 8/16.
  return 0.5;
}

struct CalibrationTrace {
  double delta = 0.0;       // drive detuning from the center frequency, GHz
  double phase_c0 = 0.0;    // target coherence phase, control in |0>
  double phase_c1 = 0.0;    // control in |1>
  double controlled_phase = 0.0;
  double p_plus_c0 = 0.0;   // target |+> population after the pulse
  double p_plus_c1 = 0.0;
  double leakage = 0.0;
};

struct CalibrationReport {
  double controlled_phase = 0.0;  // rad, at the configured detuning
  double leakage = 0.0;
  bool unreliable = false;  // leakage > 5%
  std::vector<CalibrationTrace> traces;
};

/// Ramsey-style controlled-phase calibration: target (right) qubit prepared in
/// |+>, control (left) in |0> then |1>; the controlled phase is the difference
/// of the target coherence phases. Optionally sweeps the drive detuning and
/// records the per-control |+> populations.
inline CalibrationReport calibrate_controlled_phase(
    const DeviceConfig& dev, const HilbertSpec& hs,
    const std::vector<double>& detuning_grid = {}, double dt = 0.01,
    unsigned threads = 1) {
  std::vector<double> deltas = detuning_grid;
  const double base_delta =
      dev.center.frequency - dev.left_drive_field.frequency;
  if (deltas.empty()) deltas.push_back(base_delta);

  CalibrationReport rep;
  rep.traces.resize(deltas.size());
  detail::parallel_for(deltas.size(), threads, [&](std::size_t i) {
    DeviceConfig d = dev;
    d.left_drive_field.frequency = d.center.frequency - deltas[i];
    d.right_drive_field.frequency = d.left_drive_field.frequency;
    const DrivenHamiltonian H =
        build_hamiltonian(d, hs, Frame::rotating_dispersive);
    const double T = total_duration(H.envelope);
    const detail::BasisIndexer ix{hs.qubit_levels, hs.resonator_levels};
    CalibrationTrace& tr = rep.traces[i];
    tr.delta = deltas[i];
    double traces_sum = 0.0;
    for (int control = 0; control < 2; ++control) {
      Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(hs.dimension());
      const double s = 1.0 / std::sqrt(2.0);
      psi(ix.index(control, 0, 0, 0, 0)) = s;
      psi(ix.index(control, 1, 0, 0, 0)) = s;
      psi = evolve(psi, H, T, dt);
      const Eigen::Matrix4cd rho = computational_density(psi, hs);
      // target reduced matrix within the control's block
      const int b0 = 2 * control, b1 = 2 * control + 1;
      const std::complex<double> coh = rho(b0, b1);
      const double phase = std::arg(coh);
      const double p_plus =
          0.5 * (rho(b0, b0).real() + rho(b1, b1).real()) + coh.real();
      if (control == 0) {
        tr.phase_c0 = phase;
        tr.p_plus_c0 = p_plus;
      } else {
        tr.phase_c1 = phase;
        tr.p_plus_c1 = p_plus;
      }
      traces_sum += rho(b0, b0).real() + rho(b1, b1).real();
    }
    tr.controlled_phase = std::remainder(tr.phase_c1 - tr.phase_c0, k_two_pi);
    tr.leakage = 1.0 - 0.5 * traces_sum;
  });

  // Report the trace nearest the configured detuning.
  std::size_t pick = 0;
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (std::abs(deltas[i] - base_delta) < std::abs(deltas[pick] - base_delta))
      pick = i;
  rep.controlled_phase = rep.traces[pick].controlled_phase;
  rep.leakage = rep.traces[pick].leakage;
  rep.unreliable = rep.leakage > 0.05;
  return rep;
}

}  // namespace ripsim
