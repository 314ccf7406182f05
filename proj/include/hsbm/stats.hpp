#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "hsbm/error.hpp"

namespace hsbm {

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

/// Wilson score interval for a binomial proportion; z = 1.96 gives 95%.
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054) {
  detail::require(trials > 0, "Wilson interval needs at least one trial");
  detail::require(successes <= trials, "successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline double mean(const std::vector<double>& xs) {
  detail::require(!xs.empty(), "mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Linear-interpolation quantile (type 7) of an unsorted sample.
inline double quantile(std::vector<double> xs, double q) {
  detail::require(!xs.empty(), "quantile of empty sample");
  detail::require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double h = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|; handles ties.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  detail::require(!a.empty() && !b.empty(), "KS distance needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size() || (i < a.size() && a[i] <= b[j]))
      x = a[i];
    else
      x = b[j];
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

/// One-sample KS statistic against a CDF, evaluated at sample jump points only (exact for discrete laws).
inline double ks_distance(std::vector<double> a, const std::function<double(double)>& cdf) {
  detail::require(!a.empty(), "KS distance needs a nonempty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double best = 0.0;
  std::size_t i = 0;
  while (i < a.size()) {
    const double x = a[i];
    const double before = static_cast<double>(i) / n;
    while (i < a.size() && a[i] == x) ++i;
    const double after = static_cast<double>(i) / n;
    best = std::max({best, std::abs(after - cdf(x)), std::abs(before - cdf(std::nextafter(x, -HUGE_VAL)))});
  }
  return best;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y ~ intercept + slope x.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "linear fit needs two or more paired points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  detail::require(sxx > 0.0, "linear fit needs distinct x values");
  return {sxy / sxx, my - sxy / sxx * mx};
}

}  // namespace hsbm
