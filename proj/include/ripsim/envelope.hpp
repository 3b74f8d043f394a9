#pragma once

// Drive-envelope families and sampling.
//
// All envelopes are dimensionless in [0, 1]; times in ns. The polynomial and
// cosine families rise over [0, t_r], optionally hold at 1, and fall as the
// mirror image of the rise. The slepian family is a truncated cosine series
// over the rise with a mirrored fall (total duration 2 t_r).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ripsim {

enum class EnvelopeKind {
  polynomial,
  nested_cosine,
  cosine_platform,
  slepian,
  flat,
};

inline std::string to_string(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::polynomial: return "polynomial";
    case EnvelopeKind::nested_cosine: return "nested_cosine";
    case EnvelopeKind::cosine_platform: return "cosine_platform";
    case EnvelopeKind::slepian: return "slepian";
    case EnvelopeKind::flat: return "flat";
  }
  throw std::logic_error("unreachable envelope kind");
}

inline EnvelopeKind envelope_kind_from_string(const std::string& s) {
  if (s == "polynomial") return EnvelopeKind::polynomial;
  if (s == "nested_cosine") return EnvelopeKind::nested_cosine;
  if (s == "cosine_platform") return EnvelopeKind::cosine_platform;
  if (s == "slepian") return EnvelopeKind::slepian;
  if (s == "flat") return EnvelopeKind::flat;
  throw std::invalid_argument("unknown envelope kind: " + s);
}

struct EnvelopeSpec {
  EnvelopeKind kind = EnvelopeKind::polynomial;
  int degree = 3;                  // polynomial only; odd, 1..15
  std::vector<double> lambda;      // slepian coefficients
  double rise_time = 50.0;         // t_r, ns
  double hold_time = 0.0;          // t_p, ns; polynomial/cosine_platform/flat only
};

/// Solves for the polynomial-rise coefficients of odd degree d.
///
/// The rise is eps(x) = sum_m (-1)^m c_m x^(m+(d+1)/2) with eps(1) = 1 and
/// derivatives 1..(d-1)/2 vanishing at x = 1. Returns (c_0, ..., c_(d-1)/2);
/// d = 3 gives (3, 2) and d = 5 gives (10, 15, 6).
inline std::vector<double> polynomial_coefficients(int d) {
  if (d < 1 || d > 15 || d % 2 == 0)
    throw std::invalid_argument("polynomial degree must be odd in [1, 15]");
  const int n = (d + 1) / 2;  // number of coefficients
  // Row 0: value at x=1; rows j>0: j-th derivative at x=1 (falling factorials).
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (int col = 0; col < n; ++col) {
    const int p = col + (d + 1) / 2;  // power of x for a_col
    m[0][col] = 1.0;
    for (int j = 1; j < n; ++j) {
      double f = 1.0;
      for (int i = 0; i < j; ++i) f *= static_cast<double>(p - i);
      m[j][col] = f;
    }
  }
  m[0][n] = 1.0;  // eps(1) = 1, derivative rows stay 0
  // Gaussian elimination with partial pivoting; the system is tiny (<= 8x8).
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-12)
      throw std::runtime_error("singular coefficient system");
    std::swap(m[col], m[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int k = col; k <= n; ++k) m[r][k] -= f * m[col][k];
    }
  }
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) {
    const double a = m[i][n] / m[i][i];
    c[i] = (i % 2 == 0) ? a : -a;  // fold the (-1)^m sign back out
  }
  return c;
}

/// Total pulse duration in ns for a spec (2 t_r plus any platform; flat pulses
/// last hold_time).
inline double total_duration(const EnvelopeSpec& e) {
  switch (e.kind) {
    case EnvelopeKind::flat: return e.hold_time;
    case EnvelopeKind::nested_cosine:
    case EnvelopeKind::slepian: return 2.0 * e.rise_time;
    case EnvelopeKind::polynomial:
    case EnvelopeKind::cosine_platform: return 2.0 * e.rise_time + e.hold_time;
  }
  throw std::logic_error("unreachable envelope kind");
}

inline void validate(const EnvelopeSpec& e) {
  if (e.kind != EnvelopeKind::flat && e.rise_time <= 0.0)
    throw std::invalid_argument("rise_time must be positive");
  if (e.hold_time < 0.0) throw std::invalid_argument("hold_time must be >= 0");
  if ((e.kind == EnvelopeKind::nested_cosine || e.kind == EnvelopeKind::slepian) &&
      e.hold_time != 0.0)
    throw std::invalid_argument(to_string(e.kind) + " envelope takes no hold_time");
  if (e.kind == EnvelopeKind::polynomial &&
      (e.degree < 1 || e.degree > 15 || e.degree % 2 == 0))
    throw std::invalid_argument("polynomial degree must be odd in [1, 15]");
  if (e.kind == EnvelopeKind::slepian) {
    if (e.lambda.empty()) throw std::invalid_argument("slepian lambda is empty");
    for (double v : e.lambda)
      if (!std::isfinite(v)) throw std::invalid_argument("slepian lambda not finite");
  }
}

namespace detail {

inline double polynomial_rise(double x, const std::vector<double>& c, int d) {
  double v = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double a = (m % 2 == 0) ? c[m] : -c[m];
    v += a * std::pow(x, static_cast<double>(m) + (d + 1) / 2);
  }
  return v;
}

inline double nested_cosine_rise(double x) {
  // (1 + cos[pi cos(pi x / 2)]) / 2 : 0 at x=0, 1 at x=1
  return 0.5 * (1.0 + std::cos(std::numbers::pi * std::cos(0.5 * std::numbers::pi * x)));
}

inline double slepian_rise(double x, const std::vector<double>& lambda) {
  double v = 0.0;
  for (std::size_t j = 0; j < lambda.size(); ++j)
    v += lambda[j] * 0.5 * (1.0 - std::cos(std::numbers::pi * (j + 1) * x));
  return v;
}

}  // namespace detail

/// Evaluates the envelope at time t in [0, total_duration].
inline double evaluate_envelope(const EnvelopeSpec& e, double t) {
  const double T = total_duration(e);
  const double tol = 1e-12 * (T > 0 ? T : 1.0);
  if (t < -tol || t > T + tol) throw std::out_of_range("envelope time out of range");
  t = std::clamp(t, 0.0, T);
  if (e.kind == EnvelopeKind::flat) return 1.0;

  const double tr = e.rise_time;
  double x;  // rise coordinate in [0, 1]; 1 means "on the platform"
  if (t < tr) x = t / tr;
  else if (t > T - tr) x = (T - t) / tr;
  else x = 1.0;

  switch (e.kind) {
    case EnvelopeKind::polynomial:
      return detail::polynomial_rise(x, polynomial_coefficients(e.degree), e.degree);
    case EnvelopeKind::nested_cosine:
    case EnvelopeKind::cosine_platform:
      return detail::nested_cosine_rise(x);
    case EnvelopeKind::slepian:
      return detail::slepian_rise(x, e.lambda);
    default:
      throw std::logic_error("unreachable envelope kind");
  }
}

struct SampledEnvelope {
  double dt = 0.0;
  std::vector<double> samples;
};

inline SampledEnvelope sample_envelope(const EnvelopeSpec& e, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  const double T = total_duration(e);
  const auto n = static_cast<std::size_t>(std::llround(T / dt));
  SampledEnvelope out;
  out.dt = dt;
  out.samples.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    out.samples.push_back(evaluate_envelope(e, std::min(i * dt, T)));
  return out;
}

/// sum_{j odd, 0-based} lambda_j - 1 (the series' odd-term sum constraint).
inline double slepian_constraint_residual(const std::vector<double>& lambda) {
  double s = 0.0;
  for (std::size_t j = 1; j < lambda.size(); j += 2) s += lambda[j];
  return s - 1.0;
}

}  // namespace ripsim
