// Batch front door for the simulator: preset management, sweeps, envelope
// optimization, and full-quantum fidelity runs. Every artifact-writing command
// also writes a RunManifest JSON next to its outputs.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical abort.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ripsim/io.hpp"
#include "ripsim/multimode.hpp"
#include "ripsim/optimizer.hpp"
#include "ripsim/quantum.hpp"

namespace fs = std::filesystem;
using ripsim::json;

namespace {

struct CommonOpts {
  std::string preset;
  std::string config_path;
  std::string out_dir;
  double dt = 0.0;  // 0 = subcommand default
  unsigned parallel = 1;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_device = true) {
  if (needs_device) {
    auto* p = cmd->add_option("--preset", o.preset, "preset name");
    auto* c = cmd->add_option("--config", o.config_path, "device config JSON");
    p->excludes(c);
  }
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--dt", o.dt, "integrator step, ns");
  cmd->add_option("--parallel", o.parallel, "worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--dry-run", o.dry_run,
                "print the resolved config without computing");
}

ripsim::DeviceConfig resolve_device(const CommonOpts& o) {
  if (!o.config_path.empty()) {
    const json j = ripsim::read_json(o.config_path);
    ripsim::DeviceConfig d = ripsim::device_from_json(j);
    ripsim::validate(d);
    return d;
  }
  const std::string name = o.preset.empty() ? "fsr1400" : o.preset;
  return ripsim::make_preset(name);
}

fs::path resolve_out_dir(const CommonOpts& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("RIPSIM_OUT_DIR")) return env;
  return ".";
}

struct RunContext {
  CommonOpts* opts = nullptr;
  std::string command;
  std::vector<std::string> argv;
  ripsim::WallClock clock;
  std::optional<ripsim::DeviceConfig> device;
  json extra_config;
  std::vector<std::string> outputs;

  fs::path out(const std::string& name) {
    const fs::path dir = resolve_out_dir(*opts);
    fs::create_directories(dir);
    const fs::path p = dir / name;
    outputs.push_back(p.string());
    return p;
  }

  /// Returns true when the command should stop after printing the config.
  bool dry_run_exit() const {
    if (!opts->dry_run) return false;
    std::cout << resolved().dump(2) << '\n';
    return true;
  }

  json resolved() const {
    json j;
    if (device) j["device"] = ripsim::to_json(*device);
    for (auto& [k, v] : extra_config.items()) j[k] = v;
    if (opts->dt > 0.0) j["dt"] = opts->dt;
    j["parallel"] = opts->parallel;
    return j;
  }

  void write_manifest(const std::string& stem, std::uint64_t seed = 0,
                      bool seeded = false) {
    ripsim::RunManifest m;
    m.command = command;
    for (const auto& a : argv) m.command += " " + a;
    m.resolved_config = resolved();
    m.rng_seed = seed;
    m.seeded = seeded;
    m.wall_seconds = clock.seconds();
    m.outputs = outputs;
    const fs::path dir = resolve_out_dir(*opts);
    ripsim::write_json(dir / (stem + ".manifest.json"), ripsim::to_json(m));
  }
};

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("grid needs at least one point");
  std::vector<double> v;
  if (n == 1) return {lo};
  for (int i = 0; i < n; ++i)
    v.push_back(lo + (hi - lo) * i / static_cast<double>(n - 1));
  return v;
}

using ripsim::format_number;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator and pulse toolkit for long-range resonator-induced-"
               "phase CZ gates"};
  app.require_subcommand(1);

  // presets ------------------------------------------------------------
  auto* presets = app.add_subcommand("presets", "list shipped presets");
  std::string presets_action = "list";
  presets->add_option("action", presets_action)->check(CLI::IsMember({"list"}));

  // validate -----------------------------------------------------------
  CommonOpts v_o;
  auto* validate = app.add_subcommand("validate", "regime validity report");
  add_common(validate, v_o);
  double v_ratio = 5.0;
  validate->add_option("--ratio", v_ratio, "hierarchy ratio to warn below");

  // pulse --------------------------------------------------------------
  CommonOpts p_o;
  auto* pulse = app.add_subcommand("pulse", "dump envelope samples");
  add_common(pulse, p_o);
  std::string pulse_action = "dump";
  pulse->add_option("action", pulse_action)->check(CLI::IsMember({"dump"}));

  // zz-sweep -----------------------------------------------------------
  CommonOpts zz_o;
  auto* zz = app.add_subcommand("zz-sweep", "ZZ rate vs drive detuning");
  add_common(zz, zz_o);
  double zz_lo = 0.04, zz_hi = 0.09, zz_T = 1000.0;
  int zz_n = 20;
  zz->add_option("--delta-min", zz_lo, "GHz");
  zz->add_option("--delta-max", zz_hi, "GHz");
  zz->add_option("--points", zz_n);
  zz->add_option("--flat-time", zz_T, "flat-pulse length, ns");

  // residual-map ---------------------------------------------------------
  CommonOpts rm_o;
  auto* rmap = app.add_subcommand("residual-map",
                                  "residual photons vs gate time and detuning");
  add_common(rmap, rm_o);
  double rm_tlo = 60.0, rm_thi = 260.0, rm_dlo = 0.04, rm_dhi = 0.12;
  int rm_tn = 11, rm_dn = 9;
  rmap->add_option("--t-min", rm_tlo, "ns");
  rmap->add_option("--t-max", rm_thi, "ns");
  rmap->add_option("--t-points", rm_tn);
  rmap->add_option("--delta-min", rm_dlo, "GHz");
  rmap->add_option("--delta-max", rm_dhi, "GHz");
  rmap->add_option("--delta-points", rm_dn);

  // asymmetry-sweep ------------------------------------------------------
  CommonOpts as_o;
  auto* asym = app.add_subcommand(
      "asymmetry-sweep", "entangling phase vs drive phase and coupling ratio");
  add_common(asym, as_o);
  int as_pn = 13, as_tn = 9;
  asym->add_option("--phi-points", as_pn);
  asym->add_option("--theta-points", as_tn);

  // zz-vs-fsr ------------------------------------------------------------
  CommonOpts ff_o;
  auto* fsr = app.add_subcommand("zz-vs-fsr", "multimode ZZ rate vs FSR");
  add_common(fsr, ff_o);
  double ff_lo = 0.1, ff_hi = 1.4;
  int ff_n = 14, ff_m = 5;
  fsr->add_option("--fsr-min", ff_lo, "GHz");
  fsr->add_option("--fsr-max", ff_hi, "GHz");
  fsr->add_option("--points", ff_n);
  fsr->add_option("--modes", ff_m, "retained modes");

  // mode-convergence -------------------------------------------------------
  CommonOpts mc_o;
  auto* conv = app.add_subcommand("mode-convergence",
                                  "ZZ change as retained modes grow");
  add_common(conv, mc_o);
  std::vector<int> mc_modes = {1, 3, 5, 7};
  conv->add_option("--modes", mc_modes, "mode counts, e.g. 1 3 5 7");

  // optimize --------------------------------------------------------------
  CommonOpts op_o;
  auto* opt = app.add_subcommand("optimize",
                                 "DE optimization of Slepian coefficients");
  add_common(opt, op_o);
  double op_T = 100.0;
  int op_dim = 7, op_gen = 200, op_pop = 0, op_modes = 5;
  std::uint64_t op_seed = 1;
  std::string op_constraint = "none";
  opt->add_option("--gate-time", op_T, "ns");
  opt->add_option("--dim", op_dim, "number of coefficients");
  opt->add_option("--seed", op_seed);
  opt->add_option("--generations", op_gen);
  opt->add_option("--population", op_pop, "0 = 15 * dim");
  opt->add_option("--modes", op_modes);
  opt->add_option("--constraint", op_constraint)
      ->check(CLI::IsMember({"none", "penalty", "projection"}));

  // calibrate ---------------------------------------------------------------
  CommonOpts cal_o;
  auto* cal = app.add_subcommand("calibrate",
                                 "full-quantum controlled-phase calibration");
  add_common(cal, cal_o);
  std::vector<int> cal_levels = {3, 7};
  cal->add_option("--levels", cal_levels, "qubit,resonator levels")
      ->expected(2);
  double cal_dlo = 0.0, cal_dhi = 0.0;
  int cal_dn = 0;
  cal->add_option("--delta-min", cal_dlo, "GHz (with --delta-points)");
  cal->add_option("--delta-max", cal_dhi, "GHz");
  cal->add_option("--delta-points", cal_dn);

  // qpt ----------------------------------------------------------------------
  CommonOpts q_o;
  auto* qpt = app.add_subcommand("qpt", "CZ process tomography fidelity");
  add_common(qpt, q_o);
  std::vector<int> q_levels = {3, 7};
  qpt->add_option("--levels", q_levels, "qubit,resonator levels")->expected(2);

  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> raw_args(argv + 1, argv + argc);
  auto make_ctx = [&raw_args](CommonOpts& o, const std::string& name) {
    RunContext ctx;
    ctx.opts = &o;
    ctx.command = name;
    ctx.argv.assign(raw_args.begin() + 1, raw_args.end());
    return ctx;
  };

  try {
    if (presets->parsed()) {
      for (const std::string& name : ripsim::preset_names()) {
        const ripsim::DeviceConfig d = ripsim::make_preset(name);
        std::cout << name << ": FSR " << d.long_resonator.fsr * 1e3
                  << " MHz, qubits " << d.left_qubit.frequency << "/"
                  << d.right_qubit.frequency << " GHz, drive "
                  << d.left_drive_field.peak_amplitude * 1e3 << " MHz at "
                  << d.left_drive_field.frequency << " GHz, envelope d"
                  << d.left_drive_field.envelope.degree << ", gate "
                  << ripsim::total_duration(d.left_drive_field.envelope)
                  << " ns\n";
      }
      return 0;
    }

    if (validate->parsed()) {
      RunContext ctx = make_ctx(v_o, "validate");
      ctx.device = resolve_device(v_o);
      ctx.extra_config["ratio"] = v_ratio;
      if (ctx.dry_run_exit()) return 0;
      const ripsim::RegimeReport warn = ripsim::validate_regime(*ctx.device,
                                                                v_ratio);
      for (const auto& c : warn.checks)
        std::cout << (c.pass ? "  ok  " : " WARN ") << c.name << ": "
                  << format_number(c.achieved) << " vs "
                  << format_number(c.threshold) << '\n';
      // Hard failure only when the coupling hierarchy collapses outright;
      // the fixed-threshold window and leakage figures stay warnings.
      const ripsim::RegimeReport hard = ripsim::validate_regime(*ctx.device, 1.2);
      for (const auto& c : hard.checks)
        if (c.threshold == 1.2 && !c.pass) {
          std::cerr << "regime hierarchy broken: " << c.name << " = "
                    << format_number(c.achieved) << " < 1.2\n";
          return 2;
        }
      return 0;
    }

    if (pulse->parsed()) {
      RunContext ctx = make_ctx(p_o, "pulse");
      ctx.device = resolve_device(p_o);
      if (ctx.dry_run_exit()) return 0;
      const ripsim::EnvelopeSpec& e = ctx.device->left_drive_field.envelope;
      const double dt = p_o.dt > 0.0 ? p_o.dt : 0.1;
      const ripsim::SampledEnvelope s = ripsim::sample_envelope(e, dt);
      ripsim::CsvWriter csv(ctx.out("pulse.csv"), {"t_ns", "envelope"});
      for (std::size_t i = 0; i < s.samples.size(); ++i)
        csv.row({format_number(i * s.dt), format_number(s.samples[i])});
      ctx.write_manifest("pulse");
      return 0;
    }

    if (zz->parsed()) {
      RunContext ctx = make_ctx(zz_o, "zz-sweep");
      ctx.device = resolve_device(zz_o);
      ctx.extra_config = {{"delta_min", zz_lo}, {"delta_max", zz_hi},
                          {"points", zz_n},    {"flat_time", zz_T}};
      if (ctx.dry_run_exit()) return 0;
      const double dt = zz_o.dt > 0.0 ? zz_o.dt : 0.02;
      const auto rows = ripsim::zz_sweep(*ctx.device, linspace(zz_lo, zz_hi, zz_n),
                                         zz_T, dt, zz_o.parallel);
      ripsim::CsvWriter csv(
          ctx.out("zz_sweep.csv"),
          {"delta_ghz", "zz_numeric_mhz", "zz_closed_form_mhz",
           "dephasing_mhz", "max_mean_photon", "n_crit_margin", "failed"});
      json summary = json::array();
      for (const auto& r : rows) {
        csv.row({format_number(r.delta), format_number(r.result.zz_rate_numeric),
                 format_number(r.result.zz_rate_closed_form),
                 format_number(r.result.dephasing_rate),
                 format_number(r.result.max_mean_photon),
                 format_number(r.result.n_crit_margin),
                 r.result.failed ? "1" : "0"});
        summary.push_back({{"delta", r.delta},
                           {"zz_rate_numeric", r.result.zz_rate_numeric},
                           {"zz_rate_closed_form", r.result.zz_rate_closed_form},
                           {"dephasing_rate", r.result.dephasing_rate},
                           {"max_mean_photon", r.result.max_mean_photon},
                           {"n_crit_margin", r.result.n_crit_margin},
                           {"failed", r.result.failed},
                           {"error", r.result.error}});
      }
      ripsim::write_json(ctx.out("zz_sweep.json"), summary);
      ctx.write_manifest("zz_sweep");
      return 0;
    }

    if (rmap->parsed()) {
      RunContext ctx = make_ctx(rm_o, "residual-map");
      ctx.device = resolve_device(rm_o);
      ctx.extra_config = {{"t_min", rm_tlo},     {"t_max", rm_thi},
                          {"t_points", rm_tn},   {"delta_min", rm_dlo},
                          {"delta_max", rm_dhi}, {"delta_points", rm_dn}};
      if (ctx.dry_run_exit()) return 0;
      const double dt = rm_o.dt > 0.0 ? rm_o.dt : 0.02;
      const auto t_grid = linspace(rm_tlo, rm_thi, rm_tn);
      const auto d_grid = linspace(rm_dlo, rm_dhi, rm_dn);
      const auto map = ripsim::residual_photon_map(
          *ctx.device, t_grid, d_grid, ctx.device->left_drive_field.envelope, dt,
          rm_o.parallel);
      ripsim::CsvWriter csv(ctx.out("residual_map.csv"),
                            {"gate_time_ns", "delta_ghz", "residual_photons"});
      for (std::size_t i = 0; i < t_grid.size(); ++i)
        for (std::size_t j = 0; j < d_grid.size(); ++j)
          csv.row({format_number(t_grid[i]), format_number(d_grid[j]),
                   format_number(map[i][j])});
      ctx.write_manifest("residual_map");
      return 0;
    }

    if (asym->parsed()) {
      RunContext ctx = make_ctx(as_o, "asymmetry-sweep");
      ctx.device = resolve_device(as_o);
      ctx.extra_config = {{"phi_points", as_pn}, {"theta_points", as_tn}};
      if (ctx.dry_run_exit()) return 0;
      const double dt = as_o.dt > 0.0 ? as_o.dt : 0.02;
      const auto phi = linspace(0.0, ripsim::k_two_pi, as_pn);
      std::vector<double> theta;
      for (int i = 1; i <= as_tn; ++i)
        theta.push_back(0.5 * std::numbers::pi * i / (as_tn + 1.0));
      const auto rows =
          ripsim::drive_asymmetry_sweep(*ctx.device, phi, theta, dt,
                                        as_o.parallel);
      ripsim::CsvWriter csv(
          ctx.out("asymmetry_sweep.csv"),
          {"phi_rad", "theta_rad", "entangling_phase_rad", "residual_photons"});
      for (const auto& r : rows)
        csv.row({format_number(r.phi), format_number(r.theta),
                 format_number(r.entangling_phase),
                 format_number(r.residual_photons)});
      ctx.write_manifest("asymmetry_sweep");
      return 0;
    }

    if (fsr->parsed()) {
      RunContext ctx = make_ctx(ff_o, "zz-vs-fsr");
      ctx.device = resolve_device(ff_o);
      ctx.extra_config = {{"fsr_min", ff_lo}, {"fsr_max", ff_hi},
                          {"points", ff_n},   {"modes", ff_m}};
      if (ctx.dry_run_exit()) return 0;
      const auto rows =
          ripsim::zz_vs_fsr(*ctx.device, linspace(ff_lo, ff_hi, ff_n), ff_m);
      ripsim::CsvWriter csv(ctx.out("zz_vs_fsr.csv"),
                            {"fsr_ghz", "zz_raw_mhz", "zz_normalized_mhz",
                             "zz_single_mode_mhz", "photons_00"});
      for (const auto& r : rows)
        csv.row({format_number(r.fsr), format_number(r.zz_raw),
                 format_number(r.zz_normalized),
                 format_number(r.zz_single_mode), format_number(r.photons_00)});
      ctx.write_manifest("zz_vs_fsr");
      return 0;
    }

    if (conv->parsed()) {
      RunContext ctx = make_ctx(mc_o, "mode-convergence");
      ctx.device = resolve_device(mc_o);
      ctx.extra_config["modes"] = mc_modes;
      if (ctx.dry_run_exit()) return 0;
      const auto steps = ripsim::convergence_check(*ctx.device, mc_modes);
      ripsim::CsvWriter csv(
          ctx.out("mode_convergence.csv"),
          {"modes_before", "modes_after", "zz_before_mhz", "zz_after_mhz",
           "relative_change", "excluded_detuning_ratio", "rule_applies",
           "converged"});
      for (const auto& s : steps)
        csv.row({std::to_string(s.modes_before), std::to_string(s.modes_after),
                 format_number(s.zz_before), format_number(s.zz_after),
                 format_number(s.relative_change),
                 format_number(s.excluded_detuning_ratio),
                 s.rule_applies ? "1" : "0", s.converged ? "1" : "0"});
      ctx.write_manifest("mode_convergence");
      return 0;
    }

    if (opt->parsed()) {
      RunContext ctx = make_ctx(op_o, "optimize");
      ctx.device = resolve_device(op_o);
      ctx.extra_config = {{"gate_time", op_T},     {"dim", op_dim},
                          {"seed", op_seed},       {"generations", op_gen},
                          {"population", op_pop},  {"modes", op_modes},
                          {"constraint", op_constraint}};
      if (ctx.dry_run_exit()) return 0;
      ripsim::OptimizationProblem prob;
      prob.device = *ctx.device;
      prob.gate_time = op_T;
      prob.dimension = op_dim;
      prob.mode_count = op_modes;
      prob.constraint_mode = ripsim::constraint_mode_from_string(op_constraint);
      if (op_o.dt > 0.0) prob.dt_coarse = op_o.dt;
      ripsim::DEConfig de;
      de.rng_seed = op_seed;
      de.generations = op_gen;
      de.population = op_pop;
      de.threads = op_o.parallel;
      const ripsim::OptimizationResult res = ripsim::optimize(prob, de);
      json j;
      j["best_lambda"] = res.best_lambda;
      j["objective"] = res.objective;
      j["objective_fine"] = res.objective_fine;
      j["residual_photons"] = res.residual_photons;
      j["theta_zz"] = res.theta_zz;
      j["evaluations"] = res.evaluations;
      ripsim::write_json(ctx.out("optimize.json"), j);
      ripsim::CsvWriter csv(ctx.out("optimize_trace.csv"),
                            {"generation", "best_objective"});
      for (std::size_t g = 0; g < res.trace.size(); ++g)
        csv.row({std::to_string(g + 1), format_number(res.trace[g])});
      ctx.write_manifest("optimize", op_seed, true);
      return 0;
    }

    if (cal->parsed()) {
      RunContext ctx = make_ctx(cal_o, "calibrate");
      ctx.device = resolve_device(cal_o);
      ctx.extra_config = {{"levels", cal_levels}};
      if (ctx.dry_run_exit()) return 0;
      ripsim::HilbertSpec hs;
      hs.qubit_levels = cal_levels[0];
      hs.resonator_levels = cal_levels[1];
      const double dt = cal_o.dt > 0.0 ? cal_o.dt : 0.01;
      std::vector<double> grid;
      if (cal_dn > 0) grid = linspace(cal_dlo, cal_dhi, cal_dn);
      const ripsim::CalibrationReport rep = ripsim::calibrate_controlled_phase(
          *ctx.device, hs, grid, dt, cal_o.parallel);
      json j;
      j["controlled_phase"] = rep.controlled_phase;
      j["leakage"] = rep.leakage;
      j["unreliable"] = rep.unreliable;
      ripsim::write_json(ctx.out("calibrate.json"), j);
      ripsim::CsvWriter csv(ctx.out("calibrate_traces.csv"),
                            {"delta_ghz", "controlled_phase_rad", "p_plus_c0",
                             "p_plus_c1", "leakage"});
      for (const auto& t : rep.traces)
        csv.row({format_number(t.delta), format_number(t.controlled_phase),
                 format_number(t.p_plus_c0), format_number(t.p_plus_c1),
                 format_number(t.leakage)});
      ctx.write_manifest("calibrate");
      return 0;
    }

    if (qpt->parsed()) {
      RunContext ctx = make_ctx(q_o, "qpt");
      ctx.device = resolve_device(q_o);
      ctx.extra_config = {{"levels", q_levels}};
      if (ctx.dry_run_exit()) return 0;
      ripsim::HilbertSpec hs;
      hs.qubit_levels = q_levels[0];
      hs.resonator_levels = q_levels[1];
      const double dt = q_o.dt > 0.0 ? q_o.dt : 0.01;
      const ripsim::ProcessReport rep =
          ripsim::qpt_fidelity(*ctx.device, hs, dt, q_o.parallel);
      json j;
      j["controlled_phase"] = rep.controlled_phase;
      j["virtual_z_left"] = rep.virtual_z_left;
      j["virtual_z_right"] = rep.virtual_z_right;
      j["process_fidelity"] = rep.process_fidelity;
      j["average_fidelity"] = rep.average_fidelity;
      j["leakage"] = rep.leakage;
      j["residual_photons"] = rep.residual_photons;
      // Leakage is reported separately; the fidelity is computed on the
      // reconstructed computational-subspace map.
      j["fidelity_definition"] =
          "process fidelity vs ideal CZ on the computational subspace, "
          "after optimal virtual-Z corrections";
      ripsim::write_json(ctx.out("qpt.json"), j);
      ctx.write_manifest("qpt");
      return 0;
    }
  } catch (const ripsim::numerical_abort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
