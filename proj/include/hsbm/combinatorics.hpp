#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "hsbm/error.hpp"

namespace hsbm {

/// Exact C(n, k), or nullopt when the result does not fit in 64 bits.
inline std::optional<std::uint64_t> binomial_checked(std::uint64_t n, std::uint64_t k) {
  if (k > n) return std::uint64_t{0};
  if (k > n - k) k = n - k;
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    // acc * (n - i) / (i + 1) is exact because acc * (n - i) = C(n, i + 1) * (i + 1).
    acc = acc * (n - i) / (i + 1);
    if (acc > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  }
  return static_cast<std::uint64_t>(acc);
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  auto value = binomial_checked(n, k);
  if (!value) {
    throw ParameterError("binomial coefficient C(" + std::to_string(n) + ", " + std::to_string(k) +
                         ") overflows 64 bits");
  }
  return *value;
}

/// log C(n, k) through log-gamma; -inf when k > n.
inline double log_binomial(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

/// C(n, k) as a double. Exact up to rounding while the integer fits in 64 bits.
inline double binomial_real(std::uint64_t n, std::uint64_t k) {
  if (auto exact = binomial_checked(n, k)) return static_cast<double>(*exact);
  return std::exp(log_binomial(static_cast<double>(n), static_cast<double>(k)));
}

/// C(a, b) / C(c, e) without forming either coefficient when they are large.
inline double binomial_ratio(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t e) {
  auto num = binomial_checked(a, b);
  auto den = binomial_checked(c, e);
  if (num && den && *num < (1ULL << 53) && *den < (1ULL << 53)) {
    if (*den == 0) throw ParameterError("binomial_ratio: zero denominator");
    return static_cast<double>(*num) / static_cast<double>(*den);
  }
  return std::exp(log_binomial(static_cast<double>(a), static_cast<double>(b)) -
                  log_binomial(static_cast<double>(c), static_cast<double>(e)));
}

}  // namespace hsbm
