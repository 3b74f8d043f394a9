#pragma once

// Differential-evolution optimization of Slepian envelope coefficients for
// minimal residual photons at fixed gate time, plus the envelope-family
// shootout. DE/best/1/bin with a seeded RNG; all randomness is consumed
// single-threaded per generation so parallel objective evaluation cannot
// change results.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ripsim/coherent.hpp"
#include "ripsim/device.hpp"

namespace ripsim {

enum class ConstraintMode { none, penalty, projection };

inline std::string to_string(ConstraintMode m) {
  switch (m) {
    case ConstraintMode::none: return "none";
    case ConstraintMode::penalty: return "penalty";
    case ConstraintMode::projection: return "projection";
  }
  throw std::logic_error("unreachable constraint mode");
}

inline ConstraintMode constraint_mode_from_string(const std::string& s) {
  if (s == "none") return ConstraintMode::none;
  if (s == "penalty") return ConstraintMode::penalty;
  if (s == "projection") return ConstraintMode::projection;
  throw std::invalid_argument("unknown constraint mode: " + s);
}

struct OptimizationProblem {
  DeviceConfig device;
  double gate_time = 100.0;  // ns
  int dimension = 7;         // number of Slepian coefficients
  double lower = -2.0;
  double upper = 2.0;
  ConstraintMode constraint_mode = ConstraintMode::none;
  double constraint_weight = 1.0;
  double phase_weight = 10.0;  // weight on | |theta| - pi |^2; 0 disables
  int mode_count = 5;
  double dt_coarse = 0.05;  // ns, inside DE
  double dt_fine = 0.01;    // ns, final re-evaluation
};

inline void validate(const OptimizationProblem& p) {
  if (!(p.gate_time > 0.0)) throw std::invalid_argument("gate_time must be > 0");
  if (p.dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(std::isfinite(p.lower) && std::isfinite(p.upper) && p.lower < p.upper))
    throw std::invalid_argument("bounds must be finite with lower < upper");
}

/// Shifts the odd-indexed (0-based) coefficients uniformly so their sum is 1.
inline std::vector<double> project_constraint(std::vector<double> lambda) {
  std::size_t n_odd = lambda.size() / 2;
  if (n_odd == 0) return lambda;
  const double r = slepian_constraint_residual(lambda);
  for (std::size_t j = 1; j < lambda.size(); j += 2)
    lambda[j] -= r / static_cast<double>(n_odd);
  return lambda;
}

struct ObjectiveBreakdown {
  double objective = 0.0;
  double residual_photons = 0.0;
  double theta_zz = 0.0;  // Re theta at T, rad
  bool aborted = false;
};

/// Worst-state terminal photons for the Slepian pulse built from lambda,
/// plus the optional phase and constraint terms. Integrator aborts are turned
/// into a 1e9 penalty so the optimizer keeps going.
inline ObjectiveBreakdown objective_detail(const std::vector<double>& lambda,
                                           const OptimizationProblem& p,
                                           double dt) {
  std::vector<double> lam = p.constraint_mode == ConstraintMode::projection
                                ? project_constraint(lambda)
                                : lambda;
  EnvelopeSpec env;
  env.kind = EnvelopeKind::slepian;
  env.lambda = lam;
  env.rise_time = 0.5 * p.gate_time;
  DeviceConfig d = p.device;
  d.left_drive_field.envelope = env;
  d.right_drive_field.envelope = env;
  ObjectiveBreakdown out;
  try {
    const ReducedModel m = reduced_model(d, p.mode_count);
    const AmplitudeTrajectory traj = integrate_amplitudes(m, p.gate_time, dt);
    out.residual_photons = traj.worst_residual_photons();
    out.objective = out.residual_photons;
    if (p.phase_weight > 0.0) {
      out.theta_zz = accumulate_phase(traj, m).terminal().real();
      const double miss = std::abs(out.theta_zz) - std::numbers::pi;
      out.objective += p.phase_weight * miss * miss;
    }
    if (p.constraint_mode == ConstraintMode::penalty) {
      const double r = slepian_constraint_residual(lam);
      out.objective += p.constraint_weight * r * r;
    }
  } catch (const numerical_abort&) {
    out.aborted = true;
    out.objective = 1e9;
  }
  return out;
}

inline double objective_residual(const std::vector<double>& lambda,
                                 const OptimizationProblem& p) {
  return objective_detail(lambda, p, p.dt_coarse).objective;
}

struct DEConfig {
  int population = 0;  // 0 means 15 * dimension
  double mutation = 0.7;   // F in (0, 2]
  double crossover = 0.9;  // CR in [0, 1]
  int generations = 200;
  std::uint64_t rng_seed = 0;
  unsigned threads = 1;
};

inline void validate(const DEConfig& c) {
  if (c.population < 0) throw std::invalid_argument("population must be >= 0");
  if (!(c.mutation > 0.0 && c.mutation <= 2.0))
    throw std::invalid_argument("mutation factor must lie in (0, 2]");
  if (!(c.crossover >= 0.0 && c.crossover <= 1.0))
    throw std::invalid_argument("crossover rate must lie in [0, 1]");
  if (c.generations < 1) throw std::invalid_argument("generations must be >= 1");
}

struct OptimizationResult {
  std::vector<double> best_lambda;
  double objective = 0.0;          // at dt_coarse (what DE minimized)
  double objective_fine = 0.0;     // re-evaluated at dt_fine
  double residual_photons = 0.0;   // at dt_fine
  double theta_zz = 0.0;           // at dt_fine, rad
  std::size_t evaluations = 0;
  std::vector<double> trace;  // best-so-far objective per generation
};

namespace detail {

struct DEOutcome {
  std::vector<double> best;
  double objective = 0.0;
  std::size_t evaluations = 0;
  std::vector<double> trace;  // best-so-far per generation, nonincreasing
};

/// Generic DE/best/1/bin over a box. All RNG draws happen single-threaded in
/// population order before each generation's evaluations, and the best donor
/// is frozen per generation, so thread count cannot change the result.
template <typename Fn>
DEOutcome de_minimize(Fn&& objective, int dim, double lower, double upper,
                      const DEConfig& de) {
  const int np = de.population > 0 ? de.population : 15 * dim;
  if (np < 4) throw std::invalid_argument("population must be >= 4 for DE/best/1");
  std::mt19937_64 rng(de.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  for (auto& x : pop)
    for (double& v : x) v = lower + (upper - lower) * unit(rng);

  DEOutcome res;
  std::vector<double> cost(np);
  parallel_for(np, de.threads,
               [&](std::size_t i) { cost[i] = objective(pop[i]); });
  res.evaluations = np;

  std::vector<std::vector<double>> trial(np, std::vector<double>(dim));
  std::vector<double> trial_cost(np);
  for (int gen = 0; gen < de.generations; ++gen) {
    const auto donor =
        std::min_element(cost.begin(), cost.end()) - cost.begin();
    for (int i = 0; i < np; ++i) {
      int r2, r3;
      do { r2 = static_cast<int>(unit(rng) * np); } while (r2 == i || r2 == np);
      do { r3 = static_cast<int>(unit(rng) * np);
      } while (r3 == i || r3 == r2 || r3 == np);
      const int j_rand = std::min(static_cast<int>(unit(rng) * dim), dim - 1);
      for (int j = 0; j < dim; ++j) {
        const bool cross = unit(rng) < de.crossover || j == j_rand;
        double v = cross
                       ? pop[donor][j] + de.mutation * (pop[r2][j] - pop[r3][j])
                       : pop[i][j];
        trial[i][j] = std::clamp(v, lower, upper);
      }
    }
    parallel_for(np, de.threads,
                 [&](std::size_t i) { trial_cost[i] = objective(trial[i]); });
    res.evaluations += np;
    for (int i = 0; i < np; ++i) {
      if (trial_cost[i] <= cost[i]) {
        pop[i] = trial[i];
        cost[i] = trial_cost[i];
      }
    }
    res.trace.push_back(*std::min_element(cost.begin(), cost.end()));
  }
  const auto best = std::min_element(cost.begin(), cost.end()) - cost.begin();
  res.best = pop[best];
  res.objective = cost[best];
  return res;
}

}  // namespace detail

/// DE/best/1/bin over Slepian coefficients. The trace is monotone
/// nonincreasing; a fixed seed gives a bit-stable result.
inline OptimizationResult optimize(const OptimizationProblem& p,
                                   const DEConfig& de) {
  validate(p);
  validate(de);
  detail::DEOutcome out = detail::de_minimize(
      [&p](const std::vector<double>& x) { return objective_residual(x, p); },
      p.dimension, p.lower, p.upper, de);

  OptimizationResult res;
  res.evaluations = out.evaluations;
  res.trace = std::move(out.trace);
  res.best_lambda = out.best;
  if (p.constraint_mode == ConstraintMode::projection)
    res.best_lambda = project_constraint(res.best_lambda);
  res.objective = out.objective;
  const ObjectiveBreakdown fine = objective_detail(out.best, p, p.dt_fine);
  res.objective_fine = fine.objective;
  res.residual_photons = fine.residual_photons;
  res.theta_zz = fine.theta_zz;
  return res;
}

struct ShootoutRow {
  double gate_time = 0.0;  // ns
  std::string family;
  double residual_photons = 0.0;
  double theta_zz = 0.0;  // rad
};

/// Residual photons vs gate time for a set of envelope variants; each variant
/// is rescaled so its rise fills half the gate time (hold fraction preserved).
inline std::vector<ShootoutRow> envelope_shootout(
    const DeviceConfig& dev, const std::vector<double>& gate_times,
    const std::vector<std::pair<std::string, EnvelopeSpec>>& variants,
    int mode_count = 5, double dt = 0.02, unsigned threads = 1) {
  if (variants.empty()) throw std::invalid_argument("no envelope variants");
  std::vector<ShootoutRow> rows(gate_times.size() * variants.size());
  detail::parallel_for(rows.size(), threads, [&](std::size_t idx) {
    const std::size_t ti = idx / variants.size();
    const std::size_t vi = idx % variants.size();
    ShootoutRow& row = rows[idx];
    row.gate_time = gate_times[ti];
    row.family = variants[vi].first;
    EnvelopeSpec e = variants[vi].second;
    if (e.kind == EnvelopeKind::flat) {
      e.hold_time = row.gate_time;
    } else if (e.hold_time > 0.0) {
      const double frac = e.hold_time / total_duration(e);
      e.hold_time = frac * row.gate_time;
      e.rise_time = 0.5 * (row.gate_time - e.hold_time);
    } else {
      e.rise_time = 0.5 * row.gate_time;
    }
    DeviceConfig d = dev;
    d.left_drive_field.envelope = e;
    d.right_drive_field.envelope = e;
    const ReducedModel m = reduced_model(d, mode_count);
    const AmplitudeTrajectory traj =
        integrate_amplitudes(m, row.gate_time, dt);
    row.residual_photons = traj.worst_residual_photons();
    row.theta_zz = accumulate_phase(traj, m).terminal().real();
  });
  return rows;
}

}  // namespace ripsim
