#pragma once

// The relaxation  max <W, X>  s.t.  X >= 0 (PSD), X_ii = 1, <X, 11^T> = 0.
//
// For PSD X the last constraint is equivalent to X 1 = 0, so every feasible X lives in the
// centered subspace {J X J}, J = I - 11^T / n. The solver runs Douglas-Rachford splitting
// (scaled ADMM) between the affine set {X = J X J, diag X = 1} and the PSD cone, objective
// folded into the affine step, with type-II Anderson acceleration on the fixed-point map.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hsbm/error.hpp"
#include "hsbm/linalg.hpp"
#include "hsbm/model.hpp"
#include "hsbm/random.hpp"
#include "hsbm/similarity.hpp"
#include "hsbm/spectral.hpp"

namespace hsbm {

struct CertificateMatrices {
  /// Diagonal of D.
  Eigen::VectorXd D;
  /// S = D + 11^T - W.
  Eigen::MatrixXd S;
};

/// D_ii = sum_j W_ij sigma_i sigma_j, accumulated in integers.
inline std::vector<std::int64_t> certificate_diagonal(const SimilarityMatrix& w, const CommunityAssignment& sigma) {
  detail::require(sigma.size() == w.size(), "assignment length differs from matrix size");
  std::vector<std::int64_t> d(w.size(), 0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::int64_t s = 0;
    const auto row = w.row(i);
    for (std::size_t j = 0; j < w.size(); ++j) s += row[j] * sigma[j];
    d[i] = s * sigma[i];
  }
  return d;
}

inline CertificateMatrices certificate_matrix(const SimilarityMatrix& w, const CommunityAssignment& sigma) {
  const auto diag = certificate_diagonal(w, sigma);
  const Eigen::Index n = static_cast<Eigen::Index>(w.size());
  CertificateMatrices out;
  out.D.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.D(i) = static_cast<double>(diag[static_cast<std::size_t>(i)]);
  out.S = Eigen::MatrixXd::Ones(n, n) - w.to_dense();
  out.S.diagonal() += out.D;
  return out;
}

/// Real-valued W, e.g. a materialized expectation.
inline CertificateMatrices certificate_matrix(const Eigen::MatrixXd& w, const CommunityAssignment& sigma) {
  require_symmetric(w);
  detail::require(sigma.size() == static_cast<std::size_t>(w.rows()), "assignment length differs from matrix size");
  const Eigen::VectorXd s = as_vector(sigma);
  CertificateMatrices out;
  out.D = s.cwiseProduct(w * s);
  out.S = Eigen::MatrixXd::Ones(w.rows(), w.cols()) - w;
  out.S.diagonal() += out.D;
  return out;
}

struct CertificateReport {
  CommunityAssignment candidate;
  bool certified = false;
  double lambda_min = 0.0;
  /// lambda_{n-1}(S).
  double lambda_second_smallest = 0.0;
  double S_sigma_residual = 0.0;
  double min_diag_D = 0.0;
  /// max(1, ||S||_2); tolerances are relative to this.
  double scale = 1.0;
  double tolerance = 0.0;
  /// Empty when certified.
  std::string failure_reason;
  /// When certification fails the candidate may be wrong or the optimum may not be rank one.
  std::vector<std::string> hypotheses;
};

namespace detail {

inline CertificateReport certify_matrices(const CertificateMatrices& cm, const CommunityAssignment& sigma,
                                          double tolerance) {
  detail::require(sigma.size() >= 2, "certification needs n >= 2");
  CertificateReport r;
  r.candidate = sigma;
  r.tolerance = tolerance;
  r.min_diag_D = cm.D.minCoeff();
  r.S_sigma_residual = (cm.S * as_vector(sigma)).norm();
  PartialEigensolver solver(cm.S);
  const auto& ev = solver.eigenvalues_ascending();
  r.lambda_min = ev[0];
  r.lambda_second_smallest = ev[1];
  r.scale = std::max(1.0, solver.spectral_norm());
  const double cut = tolerance * r.scale;
  if (r.S_sigma_residual > cut) {
    r.failure_reason = "S sigma != 0 (candidate not balanced)";
  } else if (r.lambda_min < -cut) {
    r.failure_reason = "S is not positive semidefinite";
  } else if (r.lambda_second_smallest <= cut) {
    r.failure_reason = "second-smallest eigenvalue of S is not positive";
  } else {
    r.certified = true;
  }
  if (!r.certified)
    r.hypotheses = {"candidate differs from the planted assignment", "SDP optimum is not the rank-one candidate"};
  return r;
}

}  // namespace detail

inline CertificateReport certify(const SimilarityMatrix& w, const CommunityAssignment& sigma, double tolerance = 1e-9) {
  return detail::certify_matrices(certificate_matrix(w, sigma), sigma, tolerance);
}

inline CertificateReport certify(const Eigen::MatrixXd& w, const CommunityAssignment& sigma, double tolerance = 1e-9) {
  return detail::certify_matrices(certificate_matrix(w, sigma), sigma, tolerance);
}

struct AdmmConfig {
  double rho = 1.0;
  std::size_t max_iterations = 5000;
  double tolerance = 1e-6;
  /// 0 disables acceleration.
  std::size_t anderson_memory = 10;
  /// Residual-balancing penalty updates. Off by default as it interferes with acceleration.
  bool adaptive_rho = false;
};

struct SdpSolution {
  Eigen::MatrixXd X;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  CommunityAssignment rounded;
};

namespace detail {

/// J M J for J = I - 11^T / n.
inline Eigen::MatrixXd center(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd rows = m.rowwise().mean();
  const Eigen::RowVectorXd cols = m.colwise().mean();
  const double all = m.mean();
  Eigen::MatrixXd out = m;
  out.colwise() -= rows;
  out.rowwise() -= cols;
  out.array() += all;
  return out;
}

/// Orthogonal projection onto {X = J X J, diag X = 1}; needs n >= 3.
inline Eigen::MatrixXd project_affine(const Eigen::MatrixXd& v) {
  const Eigen::Index n = v.rows();
  const double nn = static_cast<double>(n);
  Eigen::MatrixXd x = center(v);
  const Eigen::VectorXd r = x.diagonal().array() - 1.0;
  const double a = 1.0 - 2.0 / nn;
  const double b = 1.0 / (nn * nn);
  const Eigen::VectorXd y = (r.array() - (b / (a + nn * b)) * r.sum()) / a;
  Eigen::MatrixXd correction = Eigen::MatrixXd::Zero(n, n);
  correction.diagonal() = y;
  x -= center(correction);
  return x;
}

inline Eigen::MatrixXd unit_diagonal(const Eigen::MatrixXd& z) {
  Eigen::VectorXd s = z.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * z * s.asDiagonal();
}

inline CommunityAssignment round_top_eigenvector(const Eigen::MatrixXd& x) {
  return sign_vector(PartialEigensolver(x, false).top(1).vectors.col(0));
}

}  // namespace detail

inline SdpSolution sdp_solve_admm(const Eigen::MatrixXd& w, const AdmmConfig& config = {}) {
  require_symmetric(w);
  detail::require(w.rows() >= 2, "SDP needs n >= 2");
  detail::require(config.rho > 0.0 && config.tolerance > 0.0, "rho and tolerance must be positive");
  const Eigen::Index n = w.rows();
  const double nn = static_cast<double>(n);
  SdpSolution sol;

  if (n == 2) {
    sol.X.resize(2, 2);
    sol.X << 1.0, -1.0, -1.0, 1.0;
    sol.objective = (w.array() * sol.X.array()).sum();
    sol.converged = true;
    sol.rounded = detail::round_top_eigenvector(sol.X);
    return sol;
  }

  const Eigen::MatrixXd wc = detail::center(w);
  double rho = config.rho;
  const Eigen::Index dim = n * n;

  // One application of the Douglas-Rachford map T(z) = z + Z - X.
  Eigen::MatrixXd x, zc, z_prev_cone;
  auto apply = [&](const Eigen::MatrixXd& z) {
    x = detail::project_affine(z + wc / rho);
    zc = project_psd(2.0 * x - z).matrix;
    return Eigen::MatrixXd(z + zc - x);
  };

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, n);
  std::deque<Eigen::VectorXd> dg, df;
  Eigen::VectorXd g_last, t_last;
  Eigen::MatrixXd fallback;
  double g_last_norm = std::numeric_limits<double>::infinity();
  bool have_last = false;
  z_prev_cone = Eigen::MatrixXd::Zero(n, n);

  for (std::size_t k = 0; k < config.max_iterations; ++k) {
    Eigen::MatrixXd tz = apply(z);
    const Eigen::MatrixXd step = tz - z;
    Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(step.data(), dim);
    const double g_norm = g.norm();

    // Safeguard: an extrapolated point that blows up the residual is replaced by the plain step.
    if (have_last && !dg.empty() && g_norm > 2.0 * g_last_norm && fallback.size() > 0) {
      dg.clear();
      df.clear();
      have_last = false;
      z = fallback;
      continue;
    }

    sol.iterations = k + 1;
    sol.primal_residual = (x - zc).norm() / nn;
    sol.dual_residual = rho * (zc - z_prev_cone).norm() / nn;
    z_prev_cone = zc;
    if (std::max(sol.primal_residual, sol.dual_residual) < config.tolerance) {
      sol.converged = true;
      break;
    }

    Eigen::VectorXd tv = Eigen::Map<const Eigen::VectorXd>(tz.data(), dim);
    if (have_last && config.anderson_memory > 0) {
      dg.push_back(g - g_last);
      df.push_back(tv - t_last);
      if (dg.size() > config.anderson_memory) {
        dg.pop_front();
        df.pop_front();
      }
    }
    g_last = g;
    t_last = tv;
    g_last_norm = g_norm;
    have_last = true;
    fallback = tz;

    if (config.adaptive_rho && k > 0 && k % 50 == 0) {
      const double ratio = sol.primal_residual / std::max(sol.dual_residual, 1e-300);
      double next = rho;
      if (ratio > 10.0) next = rho * 2.0;
      if (ratio < 0.1) next = rho / 2.0;
      if (next != rho) {
        // Keep the multiplier rho (X - z) fixed while rescaling.
        z = x + (tz - x) * (rho / next);
        rho = next;
        dg.clear();
        df.clear();
        have_last = false;
        continue;
      }
    }

    if (dg.empty()) {
      z = tz;
      continue;
    }
    const Eigen::Index m = static_cast<Eigen::Index>(dg.size());
    Eigen::MatrixXd gram(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      rhs(i) = dg[static_cast<std::size_t>(i)].dot(g);
      for (Eigen::Index j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = dg[static_cast<std::size_t>(i)].dot(dg[static_cast<std::size_t>(j)]);
    }
    gram.diagonal().array() += 1e-10 * gram.trace() + std::numeric_limits<double>::min();
    const Eigen::VectorXd gamma = gram.ldlt().solve(rhs);
    if (!gamma.allFinite()) {
      z = tz;
      continue;
    }
    Eigen::VectorXd next = tv;
    for (Eigen::Index i = 0; i < m; ++i) next -= gamma(i) * df[static_cast<std::size_t>(i)];
    z = Eigen::Map<const Eigen::MatrixXd>(next.data(), n, n);
    z = 0.5 * (z + z.transpose()).eval();
  }

  sol.X = detail::unit_diagonal(zc);
  sol.X = 0.5 * (sol.X + sol.X.transpose()).eval();
  sol.objective = (w.array() * sol.X.array()).sum();
  sol.rounded = detail::round_top_eigenvector(sol.X);
  return sol;
}

inline SdpSolution sdp_solve_admm(const SimilarityMatrix& w, const AdmmConfig& config = {}) {
  return sdp_solve_admm(w.to_dense(), config);
}

struct SdpRecovery {
  CommunityAssignment assignment;
  bool certified = false;
  bool used_admm = false;
  /// Meaningful only when used_admm.
  bool admm_converged = false;
  CertificateReport certificate;
  std::optional<SdpSolution> solution;
};

/// Certificate first: the spectral candidate is returned when its certificate holds; otherwise
/// ADMM is run and its top eigenvector rounded.
template <typename Matrix>
SdpRecovery sdp_recover(const Matrix& w, const AdmmConfig& config = {}) {
  SdpRecovery out;
  const auto candidate = spectral_recover(w);
  out.certificate = certify(w, candidate);
  if (out.certificate.certified) {
    out.assignment = candidate;
    out.certified = true;
    return out;
  }
  out.used_admm = true;
  out.solution = sdp_solve_admm(w, config);
  out.admm_converged = out.solution->converged;
  out.assignment = out.solution->rounded;
  return out;
}

/// Integer changes to W keyed by vertex pair; (i, j) and (j, i) refer to the same entry.
using Perturbation = std::map<std::pair<std::size_t, std::size_t>, std::int64_t>;

/// W~ = W + delta, requiring delta >= 0 inside communities and delta <= 0 across, with W~ >= 0.
inline SimilarityMatrix monotone_adversary(const SimilarityMatrix& w, const CommunityAssignment& sigma,
                                           const Perturbation& perturbation) {
  const std::size_t n = w.size();
  detail::require(sigma.size() == n, "assignment length differs from matrix size");
  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> canonical;
  for (const auto& [key, delta] : perturbation) {
    auto [i, j] = key;
    detail::require(i < n && j < n, "perturbation index out of range");
    detail::require(i != j, "perturbation must not touch the diagonal");
    if (i > j) std::swap(i, j);
    auto [it, fresh] = canonical.emplace(std::make_pair(i, j), delta);
    if (!fresh) detail::require(it->second == delta, "perturbation is not symmetric");
  }
  std::vector<std::int64_t> entries = w.entries();
  for (const auto& [key, delta] : canonical) {
    const auto [i, j] = key;
    if (sigma[i] == sigma[j])
      detail::require(delta >= 0, "within-community entries may only increase");
    else
      detail::require(delta <= 0, "cross-community entries may only decrease");
    const std::int64_t v = w(i, j) + delta;
    detail::require(v >= 0, "perturbation makes an entry negative");
    entries[i * n + j] = v;
    entries[j * n + i] = v;
  }
  return SimilarityMatrix(n, std::move(entries));
}

/// Raises a random `intra_fraction` of within pairs by 1..max_add and zeroes a random
/// `cross_fraction` of nonzero cross pairs.
inline Perturbation random_monotone_perturbation(const SimilarityMatrix& w, const CommunityAssignment& sigma,
                                                 std::uint64_t seed, double intra_fraction = 0.05,
                                                 std::int64_t max_add = 3, double cross_fraction = 0.05) {
  detail::require(sigma.size() == w.size(), "assignment length differs from matrix size");
  detail::require(max_add >= 1, "max_add must be at least 1");
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> amount(1, max_add);
  Perturbation out;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      if (sigma[i] == sigma[j]) {
        if (coin(rng) < intra_fraction) out[{i, j}] = amount(rng);
      } else if (w(i, j) > 0 && coin(rng) < cross_fraction) {
        out[{i, j}] = -w(i, j);
      }
    }
  return out;
}

/// Deletes every cross-community similarity.
inline Perturbation zero_cross_perturbation(const SimilarityMatrix& w, const CommunityAssignment& sigma) {
  detail::require(sigma.size() == w.size(), "assignment length differs from matrix size");
  Perturbation out;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j)
      if (sigma[i] != sigma[j] && w(i, j) > 0) out[{i, j}] = -w(i, j);
  return out;
}

}  // namespace hsbm
