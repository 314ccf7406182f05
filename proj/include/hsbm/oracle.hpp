#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hsbm/error.hpp"
#include "hsbm/model.hpp"
#include "hsbm/similarity.hpp"

namespace hsbm {

inline constexpr std::size_t kOracleMaxVertices = 20;

template <typename Value>
struct BasicBisectionResult {
  CommunityAssignment best;
  /// <W, best best^T>.
  Value best_value{};
  /// False when another bisection (not the flip) attains best_value.
  bool unique = true;
  std::size_t bisections_checked = 0;
};

using BisectionResult = BasicBisectionResult<std::int64_t>;

namespace detail {

template <typename Value, typename Entry>
BasicBisectionResult<Value> enumerate_bisections(std::size_t n, Entry entry, Value tie_tolerance) {
  detail::require(n >= 2 && n % 2 == 0, "min-bisection needs an even n >= 2");
  detail::require(n <= kOracleMaxVertices, "min-bisection oracle is capped at n = 20");
  Value total{};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) total += entry(i, j);

  // Vertex 0 always sits on the +1 side; `mask` picks the other n/2 - 1 members among 1..n-1.
  const std::size_t free_bits = n - 1;
  const std::size_t pick = n / 2 - 1;
  std::uint32_t mask = pick == 0 ? 0u : (1u << pick) - 1u;
  const std::uint32_t limit = 1u << free_bits;

  BasicBisectionResult<Value> out;
  std::uint32_t best_mask = 0;
  bool first = true;
  std::vector<int> side(n);
  while (mask < limit) {
    side[0] = 1;
    for (std::size_t b = 0; b < free_bits; ++b) side[b + 1] = (mask >> b) & 1u ? 1 : -1;
    Value cross{};
    for (std::size_t i = 0; i < n; ++i) {
      if (side[i] < 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (side[j] < 0) cross += entry(i, j);
    }
    const Value value = total - 4 * cross;
    ++out.bisections_checked;
    if (first || value > out.best_value + tie_tolerance) {
      out.best_value = value;
      best_mask = mask;
      out.unique = true;
      first = false;
    } else if (value >= out.best_value - tie_tolerance) {
      out.unique = false;
      if (value > out.best_value) {
        out.best_value = value;
        best_mask = mask;
      }
    }
    if (pick == 0) break;
    // Next mask with the same popcount.
    const std::uint32_t c = mask & (~mask + 1u);
    const std::uint32_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
  std::vector<int> labels(n);
  labels[0] = 1;
  for (std::size_t b = 0; b < free_bits; ++b) labels[b + 1] = (best_mask >> b) & 1u ? 1 : -1;
  out.best = CommunityAssignment(std::move(labels));
  return out;
}

}  // namespace detail

/// Exhaustive maximum of <W, sigma sigma^T> over balanced sigma, i.e. the minimum bisection.
inline BisectionResult exhaustive_min_bisection(const SimilarityMatrix& w) {
  return detail::enumerate_bisections<std::int64_t>(
      w.size(), [&](std::size_t i, std::size_t j) { return w(i, j); }, 0);
}

/// Same enumeration for a real symmetric matrix; values within `tie_tolerance` count as ties.
inline BasicBisectionResult<double> exhaustive_max_balanced_objective(const Eigen::MatrixXd& w,
                                                                      double tie_tolerance = 1e-9) {
  detail::require(w.rows() == w.cols(), "matrix must be square");
  return detail::enumerate_bisections<double>(
      static_cast<std::size_t>(w.rows()),
      [&](std::size_t i, std::size_t j) { return w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); },
      tie_tolerance);
}

/// <W, sigma sigma^T>.
inline std::int64_t balanced_objective(const SimilarityMatrix& w, const CommunityAssignment& sigma) {
  detail::require(sigma.size() == w.size(), "assignment length differs from matrix size");
  std::int64_t s = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j) s += w(i, j) * sigma[i] * sigma[j];
  return s;
}

}  // namespace hsbm
