#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ripsim/device.hpp"

using namespace ripsim;

TEST_CASE("dispersive shifts of the 1.4 GHz preset") {
  const DeviceConfig dev = make_preset("fsr1400");
  const double chi_l = dispersive_shift(dev.left_qubit, dev.left_drive,
                                        dev.couplings.g_left_qubit_drive);
  const double chi_r = dispersive_shift(dev.right_qubit, dev.right_drive,
                                        dev.couplings.g_right_qubit_drive);
  // design values: |chi|/2pi = 20.12 and 20.22 MHz, within 1%
  CHECK(std::abs(-chi_l * 1e3 - 20.12) / 20.12 < 0.01);
  CHECK(std::abs(-chi_r * 1e3 - 20.22) / 20.22 < 0.01);
  // frozen regression values
  CHECK(chi_l * 1e3 == Catch::Approx(-20.088).margin(5e-3));
  CHECK(chi_r * 1e3 == Catch::Approx(-20.219).margin(5e-3));
}

TEST_CASE("dressed qubit frequency") {
  const DeviceConfig dev = make_preset("fsr1400");
  const double wt = dressed_qubit_frequency(dev.left_qubit, dev.left_drive,
                                            dev.couplings.g_left_qubit_drive);
  CHECK(wt == Catch::Approx(4.920942).margin(1e-5));
  // dressing lowers the qubit when it sits below its resonator
  CHECK(wt < dev.left_qubit.frequency);
}

TEST_CASE("critical photon number") {
  // left qubit of fsr1400: delta = 5.0 - 6.9239, eta = -0.28, g = 0.39
  const double n = critical_photon(5.0 - 6.9239, -0.28, 0.39);
  CHECK(n == Catch::Approx(2.3278).margin(5e-4));
  CHECK_THROWS_AS(critical_photon(1.0, -0.3, 0.0), std::invalid_argument);
}

TEST_CASE("static residual couplings are negligible") {
  const DeviceConfig dev = make_preset("fsr1400");
  const StaticCouplings s = static_couplings(dev);
  CHECK(std::abs(s.j_xx) < 1e-2);        // < 10 MHz always-on XX
  CHECK(std::abs(s.xi_zz) < 1e-4);       // < 100 kHz always-on ZZ
  CHECK(s.approximate);                  // fsr1400 detunings are asymmetric
}

TEST_CASE("effective coupling falls off away from resonance") {
  const DeviceConfig dev = make_preset("fsr1400");
  const int m0 = dev.long_resonator.selected_mode_index;
  const double j0 = std::abs(effective_xx_coupling(m0, dev, Side::left));
  const double j3 = std::abs(effective_xx_coupling(m0 + 3, dev, Side::left));
  CHECK(j0 > 0.0);
  CHECK(j3 < j0 * 5.0);  // no runaway growth in the window
  // zero bus coupling means zero effective coupling
  DeviceConfig off = dev;
  off.couplings.g_left_drive_center = 0.0;
  CHECK(effective_xx_coupling(m0, off, Side::left) == 0.0);
}

TEST_CASE("regime validation on the shipped presets") {
  const DeviceConfig dev = make_preset("fsr1400");
  SECTION("passes at ratio 3, reports failures at 5") {
    CHECK(validate_regime(dev, 3.0).all_pass);
    const RegimeReport rep = validate_regime(dev, 5.0);
    // |omega - nu| / g_qp is ~4.9 on each side, below the strict ratio 5
    CHECK_FALSE(rep.all_pass);
    bool hierarchy_flagged = false;
    for (const auto& c : rep.checks)
      if (!c.pass) {
        CHECK(c.achieved < c.threshold);
        hierarchy_flagged = true;
      }
    CHECK(hierarchy_flagged);
  }
  SECTION("leakage figures") {
    const RegimeReport rep = validate_regime(dev, 3.0);
    double left_leak = -1.0, right_leak = -1.0;
    for (const auto& c : rep.checks) {
      if (c.name == "left 2|J_m|/FSR leakage") left_leak = c.achieved;
      if (c.name == "right 2|J_m|/FSR leakage") right_leak = c.achieved;
    }
    CHECK(left_leak == Catch::Approx(0.0383).margin(2e-3));
    CHECK(right_leak == Catch::Approx(0.0302).margin(2e-3));
  }
  SECTION("preset hierarchy margins") {
    // the dense-bus rows trade g_qp / g_pc margin (1.5-2.2x) for range; only
    // the 1.4 GHz row clears 3x on every ratio
    for (const auto& name : preset_names()) {
      const RegimeReport rep = validate_regime(make_preset(name), 1.2);
      for (const auto& c : rep.checks)
        if (c.threshold == 1.2) CHECK(c.pass);
    }
    CHECK_FALSE(validate_regime(make_preset("fsr500"), 3.0).all_pass);
  }
  CHECK_THROWS_AS(validate_regime(dev, 0.5), std::invalid_argument);
}

TEST_CASE("preset JSON round trip is byte stable") {
  for (const auto& name : preset_names()) {
    const DeviceConfig dev = make_preset(name);
    const std::string a = to_json(dev).dump(2);
    const std::string b = to_json(device_from_json(json::parse(a))).dump(2);
    CHECK(a == b);
  }
  CHECK_THROWS_AS(make_preset("fsr9000"), std::invalid_argument);
}

TEST_CASE("preset sanity") {
  for (const auto& name : preset_names()) {
    const DeviceConfig dev = make_preset(name);
    CHECK_NOTHROW(validate(dev));
    CHECK(dev.preset_name == name);
    CHECK(dev.long_resonator.mode_count == 5);
    CHECK(dev.long_resonator.selected_mode_index % 2 == 0);
    CHECK(dev.left_drive_field.frequency ==
          Catch::Approx(dev.right_drive_field.frequency));
    CHECK(dev.right_drive_field.phase == Catch::Approx(std::numbers::pi));
    // drive sits below the selected mode
    CHECK(dev.left_drive_field.frequency < dev.long_resonator.base_frequency);
  }
}

TEST_CASE("degenerate detunings are rejected") {
  QubitSpec q;
  q.frequency = 7.0;
  ResonatorSpec p;
  p.frequency = 7.0;
  CHECK_THROWS_AS(dressed_qubit_frequency(q, p, 0.1), degenerate_detuning_error);
  q.frequency = 7.0 - q.anharmonicity;  // omega + eta = nu pole in chi_1
  CHECK_THROWS_AS(dispersive_shift(q, p, 0.1), degenerate_detuning_error);
}

TEST_CASE("config validation rejects malformed devices") {
  DeviceConfig dev = make_preset("fsr500");
  SECTION("positive anharmonicity") {
    dev.left_qubit.anharmonicity = 0.2;
    CHECK_THROWS_AS(validate(dev), std::invalid_argument);
  }
  SECTION("negative decay") {
    dev.center.decay_rate = -1e-4;
    CHECK_THROWS_AS(validate(dev), std::invalid_argument);
  }
  SECTION("bad mode count") {
    dev.long_resonator.mode_count = 0;
    CHECK_THROWS_AS(validate(dev), std::invalid_argument);
  }
  SECTION("shuffled labels") {
    dev.left_qubit.label = "right";
    CHECK_THROWS_AS(validate(dev), std::invalid_argument);
  }
}
