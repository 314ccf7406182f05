#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "hsbm/combinatorics.hpp"
#include "hsbm/error.hpp"
#include "hsbm/model.hpp"

namespace hsbm {

/// Symmetric zero-diagonal count matrix: entry (i, j) is the number of edges containing i and j.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;

  explicit SimilarityMatrix(std::size_t n) : n_(n), entries_(n * n, 0) {}

  /// Takes row-major counts; rejects asymmetric, negative or nonzero-diagonal input.
  SimilarityMatrix(std::size_t n, std::vector<std::int64_t> row_major) : n_(n), entries_(std::move(row_major)) {
    detail::require(entries_.size() == n * n, "similarity matrix has wrong number of entries");
    for (std::size_t i = 0; i < n; ++i) {
      detail::require(at(i, i) == 0, "similarity matrix diagonal must be zero");
      for (std::size_t j = i + 1; j < n; ++j) {
        detail::require(at(i, j) == at(j, i), "similarity matrix must be symmetric");
        detail::require(at(i, j) >= 0, "similarity counts must be nonnegative");
      }
    }
  }

  std::size_t size() const { return n_; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return at(i, j); }
  std::span<const std::int64_t> row(std::size_t i) const { return {entries_.data() + i * n_, n_}; }
  const std::vector<std::int64_t>& entries() const { return entries_; }

  std::int64_t row_sum(std::size_t i) const {
    std::int64_t s = 0;
    for (auto v : row(i)) s += v;
    return s;
  }

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto v : entries_) s += v;
    return s;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd out(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) out(i, j) = static_cast<double>(at(i, j));
    return out;
  }

  SimilarityMatrix operator+(const SimilarityMatrix& other) const {
    detail::require(other.n_ == n_, "dimension mismatch");
    SimilarityMatrix out(n_);
    for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = entries_[k] + other.entries_[k];
    return out;
  }

  SimilarityMatrix operator-(const SimilarityMatrix& other) const {
    detail::require(other.n_ == n_, "dimension mismatch");
    SimilarityMatrix out(n_);
    for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = entries_[k] - other.entries_[k];
    return out;
  }

  friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

 private:
  friend SimilarityMatrix similarity(const Hypergraph& g);

  std::int64_t& at(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }
  std::int64_t at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

  std::size_t n_ = 0;
  std::vector<std::int64_t> entries_;
};

/// W = S(G) in O(|E| d^2).
inline SimilarityMatrix similarity(const Hypergraph& g) {
  SimilarityMatrix w(g.num_vertices());
  const auto d = g.uniformity();
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    auto e = g.edge(k);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a + 1; b < d; ++b) {
        ++w.at(e[a], e[b]);
        ++w.at(e[b], e[a]);
      }
  }
  return w;
}

/// S(G^(m)): the similarity matrix after deleting every edge through m.
inline SimilarityMatrix leave_one_out(const Hypergraph& g, std::size_t m) {
  detail::require(m < g.num_vertices(), "leave-one-out vertex out of range");
  return similarity(g.without_vertex_edges(m));
}

/// E[W | sigma*] for HSBM in factored form (p' within, q' across, zero diagonal).
struct ExpectedSimilarity {
  std::size_t n = 0;
  double p_prime = 0.0;
  double q_prime = 0.0;
  CommunityAssignment assignment;

  Eigen::MatrixXd materialize() const {
    Eigen::MatrixXd out(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) = i == j ? 0.0 : (assignment[i] == assignment[j] ? p_prime : q_prime);
    return out;
  }

  /// ((p'+q')/2) 11^T + ((p'-q')/2) sigma sigma^T - p' I, assembled term by term.
  Eigen::MatrixXd from_decomposition() const {
    const Eigen::Index m = static_cast<Eigen::Index>(n);
    Eigen::VectorXd sigma(m);
    for (Eigen::Index i = 0; i < m; ++i) sigma(i) = assignment[static_cast<std::size_t>(i)];
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(m, m);
    return 0.5 * (p_prime + q_prime) * ones + 0.5 * (p_prime - q_prime) * (sigma * sigma.transpose()) -
           p_prime * Eigen::MatrixXd::Identity(m, m);
  }
};

inline ExpectedSimilarity expected_similarity(const HsbmParams& params, const CommunityAssignment& assignment) {
  params.validate();
  detail::require(assignment.size() == params.n, "assignment length differs from n");
  const std::size_t n = params.n, d = params.d;
  const double scale = params.rate_scale();
  const double same = binomial_real(n / 2 - 2, d - 2);
  const double all = binomial_real(n - 2, d - 2);
  ExpectedSimilarity es;
  es.n = n;
  // Grouped as same*(alpha - beta) + all*beta so alpha == beta gives p' == q' to the last bit.
  es.p_prime = (same * (params.alpha - params.beta) + all * params.beta) * scale;
  es.q_prime = all * params.beta * scale;
  es.assignment = assignment;
  return es;
}

struct ExpectedEigenstructure {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  /// Every other eigenvalue, with multiplicity n - 2.
  double lambda_rest = 0.0;
  Eigen::VectorXd u2;
};

inline ExpectedEigenstructure expected_eigenstructure(const ExpectedSimilarity& es) {
  const double half_n = 0.5 * static_cast<double>(es.n);
  ExpectedEigenstructure out;
  out.lambda1 = (es.p_prime + es.q_prime) * half_n - es.p_prime;
  out.lambda2 = (es.p_prime - es.q_prime) * half_n - es.p_prime;
  out.lambda_rest = -es.p_prime;
  out.u2.resize(static_cast<Eigen::Index>(es.n));
  const double inv = 1.0 / std::sqrt(static_cast<double>(es.n));
  for (std::size_t i = 0; i < es.n; ++i) out.u2(static_cast<Eigen::Index>(i)) = es.assignment[i] * inv;
  return out;
}

/// Literal E[W] for H(d, n, p). Rules are enumerated, so keep C(n, d) modest.
inline Eigen::MatrixXd mean_similarity(const GeneralHypergraphParams& params) {
  params.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(params.n);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
  auto add = [&](const Edge& e, double p) {
    for (std::size_t a = 0; a < e.size(); ++a)
      for (std::size_t b = a + 1; b < e.size(); ++b) {
        mean(e[a], e[b]) += p;
        mean(e[b], e[a]) += p;
      }
  };
  if (const auto* table = std::get_if<ExplicitProbabilities>(&params.probabilities)) {
    for (const auto& [e, p] : *table) add(e, p);
    return mean;
  }
  const auto& rule = std::get<ProbabilityRule>(params.probabilities);
  detail::require(binomial(params.n, params.d) <= 50'000'000, "edge space too large to enumerate");
  detail::for_each_subset(detail::iota_pool(params.n), params.d, [&](const Edge& e) { add(e, rule.probability(e)); });
  return mean;
}

/// E[W] when every edge has probability p: C(n-2, d-2) p off the diagonal.
inline Eigen::MatrixXd mean_similarity_constant(std::size_t d, std::size_t n, double p) {
  const Eigen::Index m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Constant(m, m, binomial_real(n - 2, d - 2) * p);
  mean.diagonal().setZero();
  return mean;
}

}  // namespace hsbm
