#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hsbm/oracle.hpp"
#include "hsbm/sdp.hpp"

using namespace hsbm;

namespace {

SimilarityMatrix planted_pattern(const CommunityAssignment& sigma) {
  const std::size_t n = sigma.size();
  std::vector<std::int64_t> e(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) e[i * n + j] = i != j && sigma[i] == sigma[j];
  return SimilarityMatrix(n, std::move(e));
}

// <W, s s^T> of every balanced s, by explicit recursion over label vectors.
void brute_force(const SimilarityMatrix& w, std::vector<int>& labels, std::size_t pos, int plus, std::int64_t& best) {
  const std::size_t n = w.size();
  if (pos == n) {
    if (plus != static_cast<int>(n / 2)) return;
    std::int64_t v = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) v += w(i, j) * labels[i] * labels[j];
    best = std::max(best, v);
    return;
  }
  for (int s : {1, -1}) {
    labels[pos] = s;
    brute_force(w, labels, pos + 1, plus + (s > 0), best);
  }
}

}  // namespace

TEST(Oracle, PlantedPatternIsUnique) {
  const CommunityAssignment sigma({1, -1, -1, 1, 1, -1});
  const auto r = exhaustive_min_bisection(planted_pattern(sigma));
  EXPECT_TRUE(r.unique);
  EXPECT_TRUE(r.best.equal_up_to_flip(sigma));
  EXPECT_EQ(r.best[0], 1);
  EXPECT_EQ(r.best_value, 12);
  EXPECT_EQ(r.bisections_checked, 10u);
}

TEST(Oracle, ZeroMatrixAllTie) {
  const auto r = exhaustive_min_bisection(SimilarityMatrix(8));
  EXPECT_FALSE(r.unique);
  EXPECT_EQ(r.best_value, 0);
  EXPECT_EQ(r.bisections_checked, 35u);
  EXPECT_TRUE(r.best.is_balanced());
}

TEST(Oracle, TwoVertices) {
  const auto r = exhaustive_min_bisection(similarity(Hypergraph(2, 2, {{0, 1}})));
  EXPECT_EQ(r.best_value, -2);
  EXPECT_EQ(r.bisections_checked, 1u);
}

TEST(Oracle, MatchesRecursiveEnumeration) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sigma = sample_balanced_assignment(10, seed);
    const auto w = similarity(sample_hsbm({3, 10, 3, 1, seed}, sigma));
    const auto r = exhaustive_min_bisection(w);
    std::vector<int> labels(10);
    std::int64_t best = std::numeric_limits<std::int64_t>::min();
    brute_force(w, labels, 0, 0, best);
    EXPECT_EQ(r.best_value, best);
    EXPECT_EQ(balanced_objective(w, r.best), best);
    EXPECT_EQ(r.bisections_checked, 126u);
  }
}

TEST(Oracle, RealAndIntegerAgree) {
  const auto sigma = sample_balanced_assignment(12, 3);
  const auto w = similarity(sample_hsbm({3, 12, 10, 2, 7}, sigma));
  const auto a = exhaustive_min_bisection(w);
  const auto b = exhaustive_max_balanced_objective(w.to_dense());
  EXPECT_DOUBLE_EQ(b.best_value, static_cast<double>(a.best_value));
  EXPECT_EQ(a.unique, b.unique);
  if (a.unique) {
    EXPECT_EQ(a.best, b.best);
  }
}

TEST(Oracle, RejectsOddOrLarge) {
  EXPECT_THROW(exhaustive_min_bisection(SimilarityMatrix(7)), ParameterError);
  EXPECT_THROW(exhaustive_min_bisection(SimilarityMatrix(22)), ParameterError);
  EXPECT_NO_THROW(exhaustive_min_bisection(SimilarityMatrix(20)));
}

TEST(Oracle, ObjectiveEqualsCertificateTrace) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto w = similarity(sample_hsbm({4, 16, 5, 2, seed}, block_assignment(16)));
    const auto sigma = sample_balanced_assignment(16, seed + 50);
    std::int64_t trace = 0;
    for (auto v : certificate_diagonal(w, sigma)) trace += v;
    EXPECT_EQ(balanced_objective(w, sigma), trace);
  }
}

TEST(Oracle, DominatesEstimators) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sigma = sample_balanced_assignment(12, seed);
    const auto w = similarity(sample_hsbm({3, 12, 8, 3, 100 + seed}, sigma));
    const auto best = exhaustive_min_bisection(w).best_value;
    const auto spec = spectral_recover(w);
    if (spec.is_balanced()) {
      EXPECT_GE(best, balanced_objective(w, spec));
    }
    EXPECT_GE(best, balanced_objective(w, sigma));
  }
}

TEST(Oracle, HighSnrAgreement) {
  struct Setting {
    std::size_t d;
    double alpha, beta;
  };
  // d = 2 uses the largest alpha keeping probabilities at most 1.
  for (const Setting s : {Setting{3, 22.0, 1.0}, Setting{2, 11.0 / std::log(12.0), 1.0}}) {
    std::size_t agree = 0, trials = 100;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const auto sigma = sample_balanced_assignment(12, derive_seed(t, {0}));
      const auto w = similarity(sample_hsbm({s.d, 12, s.alpha, s.beta, derive_seed(t, {1})}, sigma));
      const auto oracle = exhaustive_min_bisection(w);
      const auto spec = spectral_recover(w);
      const auto sdp = sdp_recover(w).assignment;
      agree += oracle.best.equal_up_to_flip(spec) && oracle.best.equal_up_to_flip(sdp);
    }
    EXPECT_GE(agree, 95u) << "d=" << s.d;
  }
}
