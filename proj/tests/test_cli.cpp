#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef RIPSIM_CLI_PATH
#error "RIPSIM_CLI_PATH must point at the rip binary"
#endif

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "stdout.log";
  const std::string cmd = std::string(RIPSIM_CLI_PATH) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(log);
  return r;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("ripsim_cli_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("presets lists the shipped parameter sets") {
  const fs::path dir = fresh_dir("presets");
  const RunResult r = run("presets", dir);
  CHECK(r.exit_code == 0);
  for (const char* name : {"fsr1400", "fsr500", "fsr300", "fsr200"})
    CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("validate reports warnings but exits zero on shipped presets") {
  const fs::path dir = fresh_dir("validate");
  const RunResult r = run("validate --preset fsr1400", dir);
  CHECK(r.exit_code == 0);
  // the strict default ratio 5 flags the ~4.9x qubit-resonator hierarchy
  CHECK(r.out.find("WARN") != std::string::npos);
  CHECK(r.out.find("ok") != std::string::npos);
  // the dense presets warn on their g hierarchy but still validate
  CHECK(run("validate --preset fsr200", dir).exit_code == 0);
}

TEST_CASE("configuration errors exit with code 2") {
  const fs::path dir = fresh_dir("config_err");
  SECTION("unknown preset") {
    CHECK(run("validate --preset fsr9000", dir).exit_code == 2);
  }
  SECTION("malformed config file") {
    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << "{ \"left_qubit\": { \"frequency\": ";
    CHECK(run("validate --config " + bad.string(), dir).exit_code == 2);
  }
  SECTION("config missing required fields") {
    const fs::path bad = dir / "empty.json";
    std::ofstream(bad) << "{}";
    CHECK(run("pulse --config " + bad.string(), dir).exit_code == 2);
  }
}

TEST_CASE("dry run prints the resolved configuration and writes nothing") {
  const fs::path dir = fresh_dir("dry");
  const RunResult r =
      run("zz-sweep --preset fsr500 --dry-run --out " + dir.string(), dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("\"preset_name\": \"fsr500\"") != std::string::npos);
  CHECK(r.out.find("\"flat_time\"") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "zz_sweep.csv"));
  CHECK_FALSE(fs::exists(dir / "zz_sweep.manifest.json"));
}

TEST_CASE("pulse dump writes a CSV and a manifest") {
  const fs::path dir = fresh_dir("pulse");
  const RunResult r =
      run("pulse --preset fsr1400 --dt 1.0 --out " + dir.string(), dir);
  REQUIRE(r.exit_code == 0);
  const std::string csv = slurp(dir / "pulse.csv");
  CHECK(csv.rfind("t_ns,envelope", 0) == 0);
  // 180 ns gate sampled at 1 ns: header + 181 rows
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 182);
  const std::string manifest = slurp(dir / "pulse.manifest.json");
  CHECK(manifest.find("\"command\"") != std::string::npos);
  CHECK(manifest.find("pulse.csv") != std::string::npos);
  CHECK(manifest.find("\"wall_seconds\"") != std::string::npos);
}

TEST_CASE("RIPSIM_OUT_DIR provides the default output directory") {
  const fs::path dir = fresh_dir("envdir");
  setenv("RIPSIM_OUT_DIR", dir.string().c_str(), 1);
  const RunResult r = run("pulse --preset fsr200 --dt 5.0", dir);
  unsetenv("RIPSIM_OUT_DIR");
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(dir / "pulse.csv"));
}

TEST_CASE("seeded optimize reruns are byte-identical") {
  const fs::path a = fresh_dir("opt_a");
  const fs::path b = fresh_dir("opt_b");
  const std::string args =
      "optimize --preset fsr1400 --gate-time 40 --dim 2 --modes 1 --seed 11 "
      "--generations 2 --population 6 --dt 0.1 --parallel 2 --out ";
  REQUIRE(run(args + a.string(), a).exit_code == 0);
  REQUIRE(run(args + b.string(), b).exit_code == 0);
  CHECK(slurp(a / "optimize.json") == slurp(b / "optimize.json"));
  CHECK(slurp(a / "optimize_trace.csv") == slurp(b / "optimize_trace.csv"));
  // seeded runs record the seed in the manifest; unseeded ones omit the key
  const std::string manifest = slurp(a / "optimize.manifest.json");
  CHECK(manifest.find("\"rng_seed\": 11") != std::string::npos);
  const std::string pulse_manifest_cmd =
      "pulse --preset fsr1400 --dt 1.0 --out " + a.string();
  REQUIRE(run(pulse_manifest_cmd, a).exit_code == 0);
  CHECK(slurp(a / "pulse.manifest.json").find("rng_seed") == std::string::npos);
}

TEST_CASE("numerical aborts exit with code 3") {
  const fs::path dir = fresh_dir("abort");
  // a 5 ns step is far beyond the RK4 stability limit: norm drift aborts
  const RunResult r = run("calibrate --preset fsr1400 --levels 2 3 --dt 5.0 "
                          "--out " + dir.string(), dir);
  CHECK(r.exit_code == 3);
  CHECK(r.out.find("numerical abort") != std::string::npos);
}

TEST_CASE("mode-convergence writes the per-step table") {
  const fs::path dir = fresh_dir("conv");
  const RunResult r = run("mode-convergence --preset fsr1400 --modes 1 3 "
                          "--out " + dir.string(), dir);
  REQUIRE(r.exit_code == 0);
  const std::string csv = slurp(dir / "mode_convergence.csv");
  CHECK(csv.rfind("modes_before,modes_after", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one step
}
