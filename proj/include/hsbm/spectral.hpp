#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hsbm/error.hpp"
#include "hsbm/linalg.hpp"
#include "hsbm/model.hpp"
#include "hsbm/random.hpp"
#include "hsbm/similarity.hpp"

namespace hsbm {

/// sgn with sgn(0) = +1.
inline CommunityAssignment sign_vector(const Eigen::VectorXd& v) {
  std::vector<int> labels(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) labels[static_cast<std::size_t>(i)] = v(i) >= 0.0 ? 1 : -1;
  return CommunityAssignment(std::move(labels));
}

/// Top two eigenpairs of W, descending.
inline EigenDecomposition leading_eigenpairs(const Eigen::MatrixXd& w, std::size_t k = 2) {
  return PartialEigensolver(w).top(k);
}

inline CommunityAssignment spectral_recover(const Eigen::MatrixXd& w) {
  detail::require(w.rows() >= 2, "spectral recovery needs n >= 2");
  const auto top = leading_eigenpairs(w, 2);
  return sign_vector(top.vectors.col(1));
}

inline CommunityAssignment spectral_recover(const SimilarityMatrix& w) { return spectral_recover(w.to_dense()); }

inline Eigen::VectorXd as_vector(const CommunityAssignment& sigma) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(sigma.size()));
  for (std::size_t i = 0; i < sigma.size(); ++i) v(static_cast<Eigen::Index>(i)) = sigma[i];
  return v;
}

struct EntrywiseReport {
  double err_direct = 0.0;
  double err_first_order_vs_true = 0.0;
  double err_residual = 0.0;
  double sign_margin = 0.0;

  double lambda2 = 0.0;
  double lambda2_star = 0.0;
  /// ||W - W*||_2.
  double deviation_norm = 0.0;
  /// min(lambda1* - lambda2*, lambda2* - lambda3*).
  double gap_star = 0.0;
  /// deviation_norm / gap_star.
  double gamma_empirical = 0.0;
};

namespace detail {

inline double min_sign_sup_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::min((a - b).cwiseAbs().maxCoeff(), (a + b).cwiseAbs().maxCoeff());
}

}  // namespace detail

inline double expected_gap(const ExpectedSimilarity& es) {
  const double n = static_cast<double>(es.n);
  return std::min(es.q_prime * n, 0.5 * (es.p_prime - es.q_prime) * n);
}

inline EntrywiseReport entrywise_report(const Eigen::MatrixXd& w, const ExpectedSimilarity& es) {
  detail::require(static_cast<std::size_t>(w.rows()) == es.n, "dimension mismatch");
  const auto star = expected_eigenstructure(es);
  detail::require(star.lambda2 != 0.0, "lambda2* is zero");
  const double root_n = std::sqrt(static_cast<double>(es.n));

  const auto top = leading_eigenpairs(w, 2);
  const Eigen::VectorXd u2 = top.vectors.col(1);
  const Eigen::VectorXd first_order = w * star.u2 / star.lambda2;

  EntrywiseReport r;
  r.err_direct = root_n * detail::min_sign_sup_distance(u2, star.u2);
  r.err_first_order_vs_true = root_n * detail::min_sign_sup_distance(star.u2, first_order);
  r.err_residual = root_n * detail::min_sign_sup_distance(u2, first_order);

  const Eigen::VectorXd sigma = as_vector(es.assignment);
  const double s = u2.dot(sigma) >= 0.0 ? 1.0 : -1.0;
  r.sign_margin = root_n * (s * sigma.cwiseProduct(u2)).minCoeff();

  r.lambda2 = top.values(1);
  r.lambda2_star = star.lambda2;
  r.deviation_norm = spectral_norm(w - es.materialize());
  r.gap_star = expected_gap(es);
  r.gamma_empirical = r.gap_star > 0.0 ? r.deviation_norm / r.gap_star : std::numeric_limits<double>::infinity();
  return r;
}

inline EntrywiseReport entrywise_report(const SimilarityMatrix& w, const ExpectedSimilarity& es) {
  return entrywise_report(w.to_dense(), es);
}

/// phi(x) = (4 c0 + 16) d / max(1, log(1/x)).
inline double phi(double x, std::size_t d, double c0) {
  detail::require(x > 0.0, "phi requires x > 0");
  return (4.0 * c0 + 16.0) * static_cast<double>(d) / std::max(1.0, std::log(1.0 / x));
}

/// ||v||_inf * phi(||v||_2 / (sqrt(n) ||v||_inf)) * log n.
inline double row_concentration_bound(const Eigen::VectorXd& v, std::size_t d, double c0) {
  const double sup = v.cwiseAbs().maxCoeff();
  detail::require(sup > 0.0, "row concentration needs v != 0");
  const double n = static_cast<double>(v.size());
  return sup * phi(v.norm() / (std::sqrt(n) * sup), d, c0) * std::log(n);
}

struct RowConcentrationResult {
  std::size_t rows_checked = 0;
  std::size_t exceedances = 0;
  /// Largest |(W - W*)_m. v| / bound seen.
  double max_ratio = 0.0;

  double rate() const { return rows_checked == 0 ? 0.0 : static_cast<double>(exceedances) / rows_checked; }
};

/// Rows m with |(W - W*)_m. v| above the bound, for one instance.
inline RowConcentrationResult row_exceedances(const Eigen::MatrixXd& w, const Eigen::MatrixXd& w_star,
                                              const Eigen::VectorXd& v, std::size_t d, double c0) {
  detail::require(w.rows() == v.size() && w_star.rows() == v.size(), "dimension mismatch");
  const double bound = row_concentration_bound(v, d, c0);
  const Eigen::VectorXd dev = (w - w_star) * v;
  RowConcentrationResult out;
  out.rows_checked = static_cast<std::size_t>(v.size());
  for (Eigen::Index m = 0; m < dev.size(); ++m) {
    const double ratio = std::abs(dev(m)) / bound;
    out.max_ratio = std::max(out.max_ratio, ratio);
    if (ratio > 1.0) ++out.exceedances;
  }
  return out;
}

/// Pools row exceedances over HSBM trials; c0 = max(alpha, beta).
inline RowConcentrationResult row_concentration_check(const HsbmParams& params, const Eigen::VectorXd& v,
                                                      std::size_t trials) {
  params.validate();
  detail::require(static_cast<std::size_t>(v.size()) == params.n, "vector length differs from n");
  const double c0 = std::max(params.alpha, params.beta);
  RowConcentrationResult total;
  for (std::size_t t = 0; t < trials; ++t) {
    HsbmParams p = params;
    p.seed = derive_seed(params.seed, {t, 1});
    const auto sigma = sample_balanced_assignment(params.n, derive_seed(params.seed, {t, 0}));
    const auto w = similarity(sample_hsbm(p, sigma)).to_dense();
    const auto part = row_exceedances(w, expected_similarity(params, sigma).materialize(), v, params.d, c0);
    total.rows_checked += part.rows_checked;
    total.exceedances += part.exceedances;
    total.max_ratio = std::max(total.max_ratio, part.max_ratio);
  }
  return total;
}

struct AssumptionCheck {
  double eigenvalue_ratio = 0.0;
  double gap_ratio = 0.0;
  bool holds = false;
};

/// Whether 1/c1 <= |lambda_k*| / log n <= c1 and 1/c1 <= |Delta_k*| / log n <= c1, for k in {1, 2}.
inline AssumptionCheck assumption_check(const ExpectedSimilarity& es, std::size_t k, double c1) {
  detail::require(k == 1 || k == 2, "k must be 1 or 2");
  detail::require(c1 >= 1.0, "c1 must be at least 1");
  detail::require(es.n >= 3, "n must be at least 3");
  const auto star = expected_eigenstructure(es);
  const double log_n = std::log(static_cast<double>(es.n));
  const double lambda = k == 1 ? star.lambda1 : star.lambda2;
  const double gap = k == 1 ? star.lambda1 - star.lambda2 : expected_gap(es);
  AssumptionCheck out;
  out.eigenvalue_ratio = std::abs(lambda) / log_n;
  out.gap_ratio = std::abs(gap) / log_n;
  auto inside = [c1](double x) { return x >= 1.0 / c1 && x <= c1; };
  out.holds = inside(out.eigenvalue_ratio) && inside(out.gap_ratio);
  return out;
}

}  // namespace hsbm
