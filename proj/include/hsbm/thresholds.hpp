#pragma once

// Exact-recovery threshold functionals for HSBM observed through its similarity matrix.
//
// psi(t) is concave for every (d, alpha, beta) with alpha, beta >= 0, so the maximizer of
// psi over t >= 0 is found by bisection on psi'(t), which is monotone decreasing.
// With beta == 0, psi increases to alpha / 2^(d-1) and the maximizer is reported as +inf.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "hsbm/combinatorics.hpp"
#include "hsbm/error.hpp"

namespace hsbm {

struct ThresholdQuery {
  std::size_t d = 2;
  double alpha = 0.0;
  double beta = 0.0;

  void validate() const {
    detail::require(d >= 2 && d <= 62, "uniformity d must be at least 2");
    detail::require(alpha >= 0.0 && beta >= 0.0, "alpha and beta must be nonnegative");
  }
};

struct ThresholdResult {
  double value_I = 0.0;
  double t_star = 0.0;
  double value_I_sdp = 0.0;
};

inline double psi(const ThresholdQuery& q, double t) {
  q.validate();
  detail::require(t >= 0.0, "psi is defined for t >= 0");
  const int m = static_cast<int>(q.d) - 1;
  double bracket = q.alpha * -std::expm1(-m * t);
  for (int r = 1; r <= m; ++r) {
    const int h = m - 2 * r;
    if (h == 0) continue;
    bracket += q.beta * binomial_real(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(r)) * -std::expm1(-h * t);
  }
  return std::ldexp(bracket, -m);
}

inline double psi_derivative(const ThresholdQuery& q, double t) {
  const int m = static_cast<int>(q.d) - 1;
  double s = q.alpha * m * std::exp(-m * t);
  for (int r = 1; r <= m; ++r) {
    const int h = m - 2 * r;
    if (h == 0) continue;
    s += q.beta * binomial_real(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(r)) * h * std::exp(-h * t);
  }
  return std::ldexp(s, -m);
}

inline double threshold_I_sdp(const ThresholdQuery& q) {
  q.validate();
  const double d = static_cast<double>(q.d);
  const double frac = d / std::ldexp(1.0, static_cast<int>(q.d));
  const double denom = q.alpha * frac + q.beta * (1.0 - frac);
  detail::require(denom > 0.0, "I_SDP undefined for alpha = beta = 0");
  const double diff = q.alpha - q.beta;
  return (d - 1.0) / std::ldexp(1.0, 2 * static_cast<int>(q.d)) * diff * diff / denom;
}

inline ThresholdResult threshold_I(const ThresholdQuery& q) {
  q.validate();
  ThresholdResult out;
  out.value_I_sdp = (q.alpha + q.beta > 0.0) ? threshold_I_sdp(q) : 0.0;
  if (psi_derivative(q, 0.0) <= 0.0) {
    out.t_star = 0.0;
    out.value_I = 0.0;
    return out;
  }
  if (q.beta == 0.0) {
    out.t_star = std::numeric_limits<double>::infinity();
    out.value_I = std::ldexp(q.alpha, -(static_cast<int>(q.d) - 1));
    return out;
  }
  double hi = 1.0;
  while (psi_derivative(q, hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw ConvergenceError("threshold_I: failed to bracket the maximizer");
  }
  double lo = 0.0;
  // Bisection terminates at the resolution of double, well below the 1e-10 target.
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (psi_derivative(q, mid) > 0.0 ? lo : hi) = mid;
  }
  out.t_star = 0.5 * (lo + hi);
  out.value_I = std::max(0.0, psi(q, out.t_star));
  return out;
}

enum class ThresholdKind { I, I_sdp };

inline double threshold_value(std::size_t d, double alpha, double beta, ThresholdKind kind) {
  const ThresholdQuery q{d, alpha, beta};
  return kind == ThresholdKind::I ? threshold_I(q).value_I : threshold_I_sdp(q);
}

/// The alpha > beta with threshold(d, alpha, beta) = level, or nullopt when no sign change is found.
inline std::optional<double> solve_alpha(std::size_t d, double beta, double level, ThresholdKind kind,
                                         double tolerance = 1e-12) {
  detail::require(beta >= 0.0, "beta must be nonnegative");
  detail::require(level > 0.0, "threshold level must be positive");
  double lo = beta;
  double hi = std::max(1.0, 2.0 * beta);
  auto f = [&](double a) { return threshold_value(d, a, beta, kind) - level; };
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) return std::nullopt;
  }
  while (hi - lo > tolerance * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// alpha on the curve threshold(d, alpha, beta) = 1.
inline std::optional<double> phase_boundary(std::size_t d, double beta, ThresholdKind kind) {
  return solve_alpha(d, beta, 1.0, kind);
}

/// N_r = C(n/2, r) C(n/2 - 1, d - 1 - r): edges through a fixed vertex with r vertices
/// from the opposite community.
inline std::uint64_t class_count_N_r(std::size_t d, std::size_t n, std::size_t r) {
  detail::require(d >= 2, "uniformity d must be at least 2");
  detail::require(n >= 2 && n % 2 == 0, "n must be even");
  detail::require(r <= d - 1, "r must lie in [0, d-1]");
  return binomial(n / 2, r) * binomial(n / 2 - 1, d - 1 - r);
}

/// N_r / C(n-1, d-1) computed through log-gamma, safe at large n.
inline double class_fraction_N_r(std::size_t d, std::size_t n, std::size_t r) {
  detail::require(r <= d - 1, "r must lie in [0, d-1]");
  const double nn = static_cast<double>(n);
  return std::exp(log_binomial(nn / 2, static_cast<double>(r)) +
                  log_binomial(nn / 2 - 1, static_cast<double>(d - 1 - r)) -
                  log_binomial(nn - 1, static_cast<double>(d - 1)));
}

}  // namespace hsbm
