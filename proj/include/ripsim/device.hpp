#pragma once

// Static device parameters and the closed-form algebra derived from them:
// dressed frequencies, dispersive shifts, effective couplings, critical photon
// number, static residual couplings, and regime validation.
//
// Convention: every frequency-like quantity is stored as ordinary frequency in
// GHz (not angular). The 2*pi shows up only inside integrators.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ripsim/envelope.hpp"

namespace ripsim {

inline constexpr double k_two_pi = 6.283185307179586476925286766559;

// Below this detuning the perturbative formulas blow up; treat as user error.
inline constexpr double k_degenerate_eps = 1e-6;  // GHz (1 kHz)

struct degenerate_detuning_error : std::domain_error {
  using std::domain_error::domain_error;
};

struct pole_error : std::domain_error {
  using std::domain_error::domain_error;
};

struct QubitSpec {
  double frequency = 5.0;       // omega_01 / 2pi, GHz
  double anharmonicity = -0.28; // eta / 2pi, GHz (negative for transmons)
  std::string label = "left";   // "left" | "right"
};

struct ResonatorSpec {
  double frequency = 7.0;   // nu / 2pi, GHz
  double decay_rate = 0.0;  // kappa / 2pi, GHz
  std::string label = "center";  // "left_drive" | "right_drive" | "center"
};

struct LongResonatorSpec {
  double fsr = 1.0;             // GHz
  int selected_mode_index = 0;  // m0; right-side coupling sign alternates as (-1)^m
  int mode_count = 5;           // M modes retained, window centered on m0
  double base_frequency = 7.0;  // frequency of the selected mode, GHz
};

struct CouplingSpec {
  double g_left_qubit_drive = 0.0;   // g^(l,l), GHz
  double g_right_qubit_drive = 0.0;  // g^(r,r), GHz
  double g_left_drive_center = 0.0;  // g^(l,c), GHz (signed)
  double g_right_drive_center = 0.0; // g^(r,c) at the selected mode, GHz (signed)
  double g_left_qubit_center = 0.0;  // direct qubit-center couplings, usually 0
  double g_right_qubit_center = 0.0;
};

struct DriveSpec {
  double frequency = 0.0;      // omega_d / 2pi, GHz
  double phase = 0.0;          // rad, [0, 2pi)
  double peak_amplitude = 0.0; // eps / 2pi, GHz
  EnvelopeSpec envelope;
  std::string target = "left_drive";  // "left_drive" | "right_drive"
};

struct DeviceConfig {
  QubitSpec left_qubit;
  QubitSpec right_qubit;
  ResonatorSpec left_drive;
  ResonatorSpec right_drive;
  ResonatorSpec center;
  LongResonatorSpec long_resonator;
  CouplingSpec couplings;
  DriveSpec left_drive_field;
  DriveSpec right_drive_field;
  std::string preset_name;
};

namespace detail {
inline void require_detuned(double num, const char* what) {
  if (std::abs(num) < k_degenerate_eps)
    throw degenerate_detuning_error(std::string("degenerate detuning in ") + what);
}
}  // namespace detail

/// omega + g^2 / (omega - nu): qubit frequency dressed by its drive resonator.
inline double dressed_qubit_frequency(const QubitSpec& q, const ResonatorSpec& p,
                                      double g) {
  detail::require_detuned(q.frequency - p.frequency, "dressed_qubit_frequency");
  return q.frequency + g * g / (q.frequency - p.frequency);
}

/// chi_n = g^2 (eta - omega + nu) / ((omega + n eta - nu)(omega + (n-1) eta - nu)).
inline double dispersive_shift_state(int n, const QubitSpec& q,
                                     const ResonatorSpec& p, double g) {
  const double w = q.frequency, nu = p.frequency, eta = q.anharmonicity;
  const double d1 = w + n * eta - nu;
  const double d2 = w + (n - 1) * eta - nu;
  detail::require_detuned(d1, "dispersive_shift_state");
  detail::require_detuned(d2, "dispersive_shift_state");
  return g * g * (eta - w + nu) / (d1 * d2);
}

/// chi = chi_1 - chi_0 (signed; negative for the Table-style parameter sets).
inline double dispersive_shift(const QubitSpec& q, const ResonatorSpec& p, double g) {
  return dispersive_shift_state(1, q, p, g) - dispersive_shift_state(0, q, p, g);
}

enum class Side { left, right };

/// Effective qubit-mode XX coupling J_m through the drive resonator:
/// (g_qp g_pc / 2) [1/(w~ - nu_p) + 1/(nu_m - nu_p) - 1/(w~ + nu_p) - 1/(nu_m + nu_p)].
inline double effective_xx_coupling(int m, const DeviceConfig& dev,
                                    Side side = Side::left) {
  const bool l = side == Side::left;
  const QubitSpec& q = l ? dev.left_qubit : dev.right_qubit;
  const ResonatorSpec& p = l ? dev.left_drive : dev.right_drive;
  const double g_qp = l ? dev.couplings.g_left_qubit_drive
                        : dev.couplings.g_right_qubit_drive;
  const double g_pc = l ? dev.couplings.g_left_drive_center
                        : dev.couplings.g_right_drive_center;
  if (g_pc == 0.0 || g_qp == 0.0) return 0.0;
  const double nu_m = dev.long_resonator.base_frequency +
                      (m - dev.long_resonator.selected_mode_index) *
                          dev.long_resonator.fsr;
  const double wt = dressed_qubit_frequency(q, p, g_qp);
  const double nu_p = p.frequency;
  detail::require_detuned(wt - nu_p, "effective_xx_coupling");
  detail::require_detuned(nu_m - nu_p, "effective_xx_coupling");
  detail::require_detuned(wt + nu_p, "effective_xx_coupling");
  detail::require_detuned(nu_m + nu_p, "effective_xx_coupling");
  return 0.5 * g_qp * g_pc *
         (1.0 / (wt - nu_p) + 1.0 / (nu_m - nu_p) - 1.0 / (wt + nu_p) -
          1.0 / (nu_m + nu_p));
}

/// n_crit = ((delta + eta)^2 / 4g^2 - 1) / 3.
inline double critical_photon(double delta, double eta, double g) {
  if (g == 0.0) throw std::invalid_argument("critical_photon: g must be nonzero");
  const double s = delta + eta;
  return (s * s / (4.0 * g * g) - 1.0) / 3.0;
}

struct StaticCouplings {
  double j_xx = 0.0;   // GHz
  double xi_zz = 0.0;  // GHz
  bool approximate = false;  // true when parameters were asymmetric and averaged
};

/// Always-on residual couplings J_xx^s = g1^2 g2^2 / (w - nu)^3 and
/// xi_zz^s = 12 (J_xx^s)^2 / (w - nu); both should come out negligible.
inline StaticCouplings static_couplings(const DeviceConfig& dev) {
  const double g1 = dev.couplings.g_left_qubit_drive;
  const double g2 = dev.couplings.g_right_qubit_drive;
  const double dl = dev.left_qubit.frequency - dev.left_drive.frequency;
  const double dr = dev.right_qubit.frequency - dev.right_drive.frequency;
  const double d = 0.5 * (dl + dr);
  detail::require_detuned(d, "static_couplings");
  StaticCouplings out;
  out.j_xx = g1 * g1 * g2 * g2 / (d * d * d);
  out.xi_zz = 12.0 * out.j_xx * out.j_xx / d;
  out.approximate = std::abs(dl - dr) > 1e-9;
  return out;
}

struct RegimeCheck {
  std::string name;
  double achieved = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RegimeReport {
  std::vector<RegimeCheck> checks;
  bool all_pass = true;
};

/// Checks |omega - nu| >> g_qp >> g_pc (default ratio 5) plus the multimode
/// 13x rule and the 2 J_m / FSR leakage figure against the ~0.1 design target.
inline RegimeReport validate_regime(const DeviceConfig& dev, double ratio = 5.0) {
  if (ratio < 1.0) throw std::invalid_argument("ratio must be >= 1");
  RegimeReport rep;
  auto add = [&rep](std::string name, double achieved, double threshold,
                    bool bigger_is_better = true) {
    const bool ok = bigger_is_better ? achieved >= threshold : achieved <= threshold;
    rep.checks.push_back({std::move(name), achieved, threshold, ok});
    rep.all_pass = rep.all_pass && ok;
  };
  const auto& c = dev.couplings;
  add("left |omega-nu| / g_qp",
      std::abs(dev.left_qubit.frequency - dev.left_drive.frequency) /
          c.g_left_qubit_drive, ratio);
  add("right |omega-nu| / g_qp",
      std::abs(dev.right_qubit.frequency - dev.right_drive.frequency) /
          c.g_right_qubit_drive, ratio);
  add("left g_qp / g_pc",
      c.g_left_qubit_drive / std::abs(c.g_left_drive_center), ratio);
  add("right g_qp / g_pc",
      c.g_right_qubit_drive / std::abs(c.g_right_drive_center), ratio);
  // Nearest excluded long-resonator mode, in units of the bus coupling.
  const double g_pc =
      0.5 * (std::abs(c.g_left_drive_center) + std::abs(c.g_right_drive_center));
  const double excl = (dev.long_resonator.mode_count + 1) / 2 *
                      dev.long_resonator.fsr;
  add("excluded-mode detuning / g_pc", excl / g_pc, 13.0);
  // Qubit leakage into the low-energy mode nearest each dressed qubit.
  for (Side side : {Side::left, Side::right}) {
    const bool l = side == Side::left;
    const QubitSpec& q = l ? dev.left_qubit : dev.right_qubit;
    const ResonatorSpec& p = l ? dev.left_drive : dev.right_drive;
    const double g_qp =
        l ? c.g_left_qubit_drive : c.g_right_qubit_drive;
    const double wt = dressed_qubit_frequency(q, p, g_qp);
    const double rel = (wt - dev.long_resonator.base_frequency) /
                       dev.long_resonator.fsr;
    const int m = dev.long_resonator.selected_mode_index +
                  static_cast<int>(std::llround(rel));
    const double j = effective_xx_coupling(m, dev, side);
    add(std::string(l ? "left" : "right") + " 2|J_m|/FSR leakage",
        2.0 * std::abs(j) / dev.long_resonator.fsr, 0.1, false);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Table presets

inline std::vector<std::string> preset_names() {
  return {"fsr1400", "fsr500", "fsr300", "fsr200"};
}

/// Builds one of the four shipped presets. Drive frequency is base - Delta,
/// drive phases (0, pi), and the envelope is the listed polynomial degree with
/// t_r = T/2. The selected harmonic index is chosen even so the antiphase
/// optimum applies.
inline DeviceConfig make_preset(const std::string& name) {
  struct Row {
    const char* name;
    double fsr, nu_l, nu_r, w_l, w_r, g_ll, g_rr, g_pc;
    int degree, mode_index;
    double delta, eps, gate_time;
  };
  static const Row rows[] = {
      {"fsr1400", 1.40, 6.9239, 6.9168, 5.000, 4.800, 0.390, 0.428, 0.100, 3, 4,
       0.100, 0.200, 180.0},
      {"fsr500", 0.50, 5.9808, 5.9820, 5.250, 5.200, 0.120, 0.120, 0.080, 3, 12,
       0.070, 0.280, 205.0},
      {"fsr300", 0.30, 5.9796, 5.9795, 5.150, 5.155, 0.130, 0.130, 0.060, 7, 20,
       0.050, 0.200, 175.0},
      {"fsr200", 0.20, 5.9854, 5.9853, 5.300, 5.305, 0.100, 0.100, 0.050, 9, 30,
       0.040, 0.200, 165.0},
  };
  for (const Row& r : rows) {
    if (name != r.name) continue;
    DeviceConfig d;
    d.preset_name = r.name;
    d.left_qubit = {r.w_l, -0.28, "left"};
    d.right_qubit = {r.w_r, -0.28, "right"};
    d.left_drive = {r.nu_l, 0.0, "left_drive"};
    d.right_drive = {r.nu_r, 0.0, "right_drive"};
    const double base = 0.5 * (r.nu_l + r.nu_r);
    d.center = {base, 0.0, "center"};
    d.long_resonator = {r.fsr, r.mode_index, 5, base};
    d.couplings = {r.g_ll, r.g_rr, r.g_pc, r.g_pc, 0.0, 0.0};
    EnvelopeSpec env;
    env.kind = EnvelopeKind::polynomial;
    env.degree = r.degree;
    env.rise_time = 0.5 * r.gate_time;
    d.left_drive_field = {base - r.delta, 0.0, r.eps, env, "left_drive"};
    d.right_drive_field = {base - r.delta, std::numbers::pi, r.eps, env,
                           "right_drive"};
    return d;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

// ---------------------------------------------------------------------------
// Serialization (field order fixed for byte-stable round trips)

using json = nlohmann::ordered_json;

inline json to_json(const EnvelopeSpec& e) {
  json j;
  j["kind"] = to_string(e.kind);
  j["degree"] = e.degree;
  j["lambda"] = e.lambda;
  j["rise_time"] = e.rise_time;
  j["hold_time"] = e.hold_time;
  return j;
}

inline EnvelopeSpec envelope_from_json(const json& j) {
  EnvelopeSpec e;
  e.kind = envelope_kind_from_string(j.at("kind").get<std::string>());
  e.degree = j.at("degree").get<int>();
  e.lambda = j.at("lambda").get<std::vector<double>>();
  e.rise_time = j.at("rise_time").get<double>();
  e.hold_time = j.at("hold_time").get<double>();
  return e;
}

inline json to_json(const DeviceConfig& d) {
  json j;
  auto qubit = [](const QubitSpec& q) {
    return json{{"frequency", q.frequency},
                {"anharmonicity", q.anharmonicity},
                {"label", q.label}};
  };
  auto res = [](const ResonatorSpec& r) {
    return json{{"frequency", r.frequency},
                {"decay_rate", r.decay_rate},
                {"label", r.label}};
  };
  auto drive = [](const DriveSpec& f) {
    json x;
    x["frequency"] = f.frequency;
    x["phase"] = f.phase;
    x["peak_amplitude"] = f.peak_amplitude;
    x["envelope"] = to_json(f.envelope);
    x["target"] = f.target;
    return x;
  };
  j["preset_name"] = d.preset_name;
  j["left_qubit"] = qubit(d.left_qubit);
  j["right_qubit"] = qubit(d.right_qubit);
  j["left_drive"] = res(d.left_drive);
  j["right_drive"] = res(d.right_drive);
  j["center"] = res(d.center);
  j["long_resonator"] = {{"fsr", d.long_resonator.fsr},
                         {"selected_mode_index", d.long_resonator.selected_mode_index},
                         {"mode_count", d.long_resonator.mode_count},
                         {"base_frequency", d.long_resonator.base_frequency}};
  j["couplings"] = {{"g_left_qubit_drive", d.couplings.g_left_qubit_drive},
                    {"g_right_qubit_drive", d.couplings.g_right_qubit_drive},
                    {"g_left_drive_center", d.couplings.g_left_drive_center},
                    {"g_right_drive_center", d.couplings.g_right_drive_center},
                    {"g_left_qubit_center", d.couplings.g_left_qubit_center},
                    {"g_right_qubit_center", d.couplings.g_right_qubit_center}};
  j["left_drive_field"] = drive(d.left_drive_field);
  j["right_drive_field"] = drive(d.right_drive_field);
  return j;
}

inline DeviceConfig device_from_json(const json& j) {
  DeviceConfig d;
  auto qubit = [](const json& x) {
    return QubitSpec{x.at("frequency").get<double>(),
                     x.at("anharmonicity").get<double>(),
                     x.at("label").get<std::string>()};
  };
  auto res = [](const json& x) {
    return ResonatorSpec{x.at("frequency").get<double>(),
                         x.at("decay_rate").get<double>(),
                         x.at("label").get<std::string>()};
  };
  auto drive = [](const json& x) {
    return DriveSpec{x.at("frequency").get<double>(), x.at("phase").get<double>(),
                     x.at("peak_amplitude").get<double>(),
                     envelope_from_json(x.at("envelope")),
                     x.at("target").get<std::string>()};
  };
  d.preset_name = j.at("preset_name").get<std::string>();
  d.left_qubit = qubit(j.at("left_qubit"));
  d.right_qubit = qubit(j.at("right_qubit"));
  d.left_drive = res(j.at("left_drive"));
  d.right_drive = res(j.at("right_drive"));
  d.center = res(j.at("center"));
  const json& lr = j.at("long_resonator");
  d.long_resonator = {lr.at("fsr").get<double>(),
                      lr.at("selected_mode_index").get<int>(),
                      lr.at("mode_count").get<int>(),
                      lr.at("base_frequency").get<double>()};
  const json& c = j.at("couplings");
  d.couplings = {c.at("g_left_qubit_drive").get<double>(),
                 c.at("g_right_qubit_drive").get<double>(),
                 c.at("g_left_drive_center").get<double>(),
                 c.at("g_right_drive_center").get<double>(),
                 c.at("g_left_qubit_center").get<double>(),
                 c.at("g_right_qubit_center").get<double>()};
  d.left_drive_field = drive(j.at("left_drive_field"));
  d.right_drive_field = drive(j.at("right_drive_field"));
  return d;
}

inline void validate(const DeviceConfig& d) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be > 0");
  };
  positive(d.left_qubit.frequency, "left qubit frequency");
  positive(d.right_qubit.frequency, "right qubit frequency");
  if (d.left_qubit.anharmonicity >= 0.0 || d.right_qubit.anharmonicity >= 0.0)
    throw std::invalid_argument("anharmonicity must be negative");
  positive(d.left_drive.frequency, "left drive resonator frequency");
  positive(d.right_drive.frequency, "right drive resonator frequency");
  positive(d.center.frequency, "center resonator frequency");
  if (d.left_drive.decay_rate < 0.0 || d.right_drive.decay_rate < 0.0 ||
      d.center.decay_rate < 0.0)
    throw std::invalid_argument("decay rates must be >= 0");
  positive(d.long_resonator.fsr, "fsr");
  if (d.long_resonator.mode_count < 1)
    throw std::invalid_argument("mode_count must be >= 1");
  if (d.left_drive_field.peak_amplitude < 0.0 ||
      d.right_drive_field.peak_amplitude < 0.0)
    throw std::invalid_argument("drive amplitude must be >= 0");
  validate(d.left_drive_field.envelope);
  validate(d.right_drive_field.envelope);
  if (d.left_qubit.label != "left" || d.right_qubit.label != "right" ||
      d.left_drive.label != "left_drive" || d.right_drive.label != "right_drive" ||
      d.center.label != "center" || d.left_drive_field.target != "left_drive" ||
      d.right_drive_field.target != "right_drive")
    throw std::invalid_argument("role labels are fixed: left/right/center");
}

}  // namespace ripsim
