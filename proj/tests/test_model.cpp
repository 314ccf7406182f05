#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "hsbm/model.hpp"

using namespace hsbm;

namespace {

// Independent binomial coefficient for test oracles.
double choose(double n, double k) {
  double r = 1.0;
  for (int i = 0; i < static_cast<int>(k); ++i) r = r * (n - i) / (i + 1);
  return r;
}

bool homogeneous(std::span<const Vertex> e, const CommunityAssignment& s) {
  for (auto v : e)
    if (s[v] != s[e[0]]) return false;
  return true;
}

}  // namespace

TEST(BalancedAssignment, TwoVerticesGiveOneOfEach) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = sample_balanced_assignment(2, seed);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0] + s[1], 0);
  }
}

TEST(BalancedAssignment, DeterministicForFixedSeed) {
  EXPECT_EQ(sample_balanced_assignment(4, 17), sample_balanced_assignment(4, 17));
  EXPECT_EQ(sample_balanced_assignment(1000, 3), sample_balanced_assignment(1000, 3));
}

TEST(BalancedAssignment, ExactlyHalfPositive) {
  for (std::size_t n : {2, 6, 50, 1000}) EXPECT_TRUE(sample_balanced_assignment(n, n).is_balanced());
}

TEST(BalancedAssignment, RejectsOddOrTooSmall) {
  EXPECT_THROW(sample_balanced_assignment(7, 0), ParameterError);
  EXPECT_THROW(sample_balanced_assignment(0, 0), ParameterError);
}

TEST(BalancedAssignment, CoordinateMeansNearZero) {
  const std::size_t n = 10000, draws = 1000;
  std::vector<long> sums(n, 0);
  for (std::size_t t = 0; t < draws; ++t) {
    const auto s = sample_balanced_assignment(n, 1000 + t);
    for (std::size_t i = 0; i < n; ++i) sums[i] += s[i];
  }
  const double bound = 4.0 / std::sqrt(static_cast<double>(draws));
  for (std::size_t i = 0; i < n; ++i)
    ASSERT_LE(std::abs(static_cast<double>(sums[i]) / draws), bound) << "coordinate " << i;
}

TEST(BalancedAssignment, HammingUpToFlip) {
  const CommunityAssignment a({1, 1, -1, -1});
  const CommunityAssignment b({-1, -1, 1, 1});
  const CommunityAssignment c({1, -1, 1, -1});
  EXPECT_EQ(a.hamming_up_to_flip(b), 0u);
  EXPECT_TRUE(a.equal_up_to_flip(b));
  EXPECT_EQ(a.hamming_up_to_flip(c), 2u);
  EXPECT_THROW(CommunityAssignment({1, 0}), ParameterError);
}

TEST(Hypergraph, CanonicalizesEdges) {
  const Hypergraph g(5, 3, {{4, 0, 2}, {1, 0, 3}});
  ASSERT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1, 3}));
  EXPECT_EQ(g.edges()[1], (Edge{0, 2, 4}));
  EXPECT_TRUE(is_valid(g));
}

TEST(Hypergraph, RejectsInvalidEdges) {
  EXPECT_THROW(Hypergraph(5, 3, {{0, 1}}), ParameterError);
  EXPECT_THROW(Hypergraph(5, 3, {{0, 1, 5}}), ParameterError);
  EXPECT_THROW(Hypergraph(5, 3, {{0, 1, 1}}), ParameterError);
  EXPECT_THROW(Hypergraph(5, 3, {{0, 1, 2}, {2, 1, 0}}), ParameterError);
  EXPECT_THROW(Hypergraph(5, 1, {}), ParameterError);
  EXPECT_THROW(Hypergraph(2, 3, {}), ParameterError);
}

TEST(HsbmParams, ValidatesProbabilitiesAndParity) {
  EXPECT_NO_THROW((HsbmParams{3, 100, 5, 1, 0}.validate()));
  EXPECT_THROW((HsbmParams{3, 101, 5, 1, 0}.validate()), ParameterError);
  EXPECT_THROW((HsbmParams{3, 4, 5, 1, 0}.validate()), ParameterError);
  EXPECT_THROW((HsbmParams{2, 12, 30, 1, 0}.validate()), ParameterError);
  EXPECT_THROW((HsbmParams{3, 100, -1, 1, 0}.validate()), ParameterError);
}

TEST(SampleHsbm, ZeroRatesGiveEmptyGraph) {
  const auto s = block_assignment(40);
  EXPECT_EQ(sample_hsbm({3, 40, 0, 0, 5}, s).num_edges(), 0u);
}

TEST(SampleHsbm, BitReproducible) {
  const auto s = sample_balanced_assignment(200, 9);
  const HsbmParams p{4, 200, 20, 4, 123};
  EXPECT_EQ(sample_hsbm(p, s), sample_hsbm(p, s));
  HsbmParams q = p;
  q.seed = 124;
  EXPECT_FALSE(sample_hsbm(p, s) == sample_hsbm(q, s));
}

TEST(SampleHsbm, RejectsUnbalancedAssignment) {
  const CommunityAssignment s({1, 1, 1, -1, -1, -1, 1, 1});
  EXPECT_THROW(sample_hsbm({2, 8, 1, 1, 0}, s), ParameterError);
}

TEST(SampleHsbm, EdgeClassMembership) {
  const auto s = sample_balanced_assignment(60, 2);
  // beta = 0: every edge must be homogeneous; alpha = 0: none may be.
  const auto only_hom = sample_hsbm({3, 60, 30, 0, 7}, s);
  ASSERT_GT(only_hom.num_edges(), 0u);
  for (std::size_t k = 0; k < only_hom.num_edges(); ++k) EXPECT_TRUE(homogeneous(only_hom.edge(k), s));
  const auto only_het = sample_hsbm({3, 60, 0, 30, 7}, s);
  ASSERT_GT(only_het.num_edges(), 0u);
  for (std::size_t k = 0; k < only_het.num_edges(); ++k) EXPECT_FALSE(homogeneous(only_het.edge(k), s));
}

TEST(SampleHsbm, HomogeneousEdgeCountMean) {
  const std::size_t n = 300, trials = 200;
  const double alpha = 5, beta = 1;
  const double q = alpha * std::log(300.0) / choose(299, 2);
  const double classes = 2 * choose(150, 3);
  const double mean = classes * q;
  const double sd = std::sqrt(classes * q * (1 - q));
  double total = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto s = sample_balanced_assignment(n, t);
    const auto g = sample_hsbm({3, n, alpha, beta, 500 + t}, s);
    ASSERT_TRUE(is_valid(g));
    for (std::size_t k = 0; k < g.num_edges(); ++k) total += homogeneous(g.edge(k), s);
  }
  EXPECT_NEAR(total / trials, mean, 5 * sd / std::sqrt(static_cast<double>(trials)));
}

TEST(SampleHsbm, TotalEdgeCountConcentrates) {
  for (const HsbmParams base : {HsbmParams{2, 200, 8, 2, 0}, HsbmParams{4, 120, 30, 5, 0}}) {
    const std::size_t trials = 200;
    const double qh = base.alpha * std::log(static_cast<double>(base.n)) / choose(base.n - 1, base.d - 1);
    const double qt = base.beta * std::log(static_cast<double>(base.n)) / choose(base.n - 1, base.d - 1);
    const double side = choose(base.n / 2, base.d), all = choose(base.n, base.d);
    const double mean = 2 * side * qh + (all - 2 * side) * qt;
    const double var = 2 * side * qh * (1 - qh) + (all - 2 * side) * qt * (1 - qt);
    EXPECT_NEAR(expected_edge_count(base), mean, 1e-9 * mean);
    EXPECT_NEAR(edge_count_variance(base), var, 1e-9 * var);
    double total = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      HsbmParams p = base;
      p.seed = 77 + t;
      total += static_cast<double>(sample_hsbm(p, sample_balanced_assignment(base.n, t)).num_edges());
    }
    EXPECT_NEAR(total / trials, mean, 5 * std::sqrt(var / trials));
  }
}

TEST(SampleHsbm, DenseClassUsesEnumeration) {
  // q close to 1 in a small class exercises the enumerate-and-choose path.
  const auto s = block_assignment(12);
  const auto g = sample_hsbm({3, 12, 22, 0, 3}, s);
  EXPECT_TRUE(is_valid(g));
  for (std::size_t k = 0; k < g.num_edges(); ++k) EXPECT_TRUE(homogeneous(g.edge(k), s));
}

TEST(SampleGeneral, CertainEdgesGiveCompleteHypergraph) {
  const auto g = sample_general(GeneralHypergraphParams::constant(3, 4, 1.0), 1);
  EXPECT_EQ(g.num_edges(), 4u);
  EXPECT_TRUE(is_valid(g));
}

TEST(SampleGeneral, ZeroProbabilityGivesEmpty) {
  EXPECT_EQ(sample_general(GeneralHypergraphParams::constant(3, 30, 0.0), 1).num_edges(), 0u);
}

TEST(SampleGeneral, ConstantRateEdgeCount) {
  const std::size_t n = 40, d = 3, trials = 200;
  const double p = 0.01;
  const double m = choose(40, 3);
  double total = 0;
  for (std::size_t t = 0; t < trials; ++t)
    total += static_cast<double>(sample_general(GeneralHypergraphParams::constant(d, n, p), t).num_edges());
  EXPECT_NEAR(total / trials, m * p, 5 * std::sqrt(m * p * (1 - p) / trials));
}

TEST(SampleGeneral, ExplicitTableFlipsEachEdge) {
  GeneralHypergraphParams params;
  params.d = 2;
  params.n = 4;
  params.probabilities = ExplicitProbabilities{{{0, 1}, 1.0}, {{2, 3}, 0.0}, {{1, 2}, 0.5}};
  std::size_t hits = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const auto g = sample_general(params, seed);
    const auto edges = g.edges();
    std::set<Edge> set(edges.begin(), edges.end());
    EXPECT_TRUE(set.count({0, 1}));
    EXPECT_FALSE(set.count({2, 3}));
    hits += set.count({1, 2});
  }
  EXPECT_NEAR(hits / 400.0, 0.5, 5 * std::sqrt(0.25 / 400));
}

TEST(SampleGeneral, RuleThinningMatchesPerEdgeProbability) {
  // p_e = 0.2 for edges containing vertex 0, else 0.05.
  GeneralHypergraphParams params;
  params.d = 3;
  params.n = 20;
  params.probabilities = ProbabilityRule{[](std::span<const Vertex> e) { return e[0] == 0 ? 0.2 : 0.05; }, 0.2};
  const double with0 = choose(19, 2), without0 = choose(19, 3);
  const std::size_t trials = 300;
  double a = 0, b = 0;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    const auto g = sample_general(params, seed);
    for (std::size_t k = 0; k < g.num_edges(); ++k) (g.edge(k)[0] == 0 ? a : b) += 1;
  }
  EXPECT_NEAR(a / trials, with0 * 0.2, 5 * std::sqrt(with0 * 0.2 * 0.8 / trials));
  EXPECT_NEAR(b / trials, without0 * 0.05, 5 * std::sqrt(without0 * 0.05 * 0.95 / trials));
}

TEST(SampleGeneral, RejectsBadProbabilities) {
  GeneralHypergraphParams params;
  params.d = 2;
  params.n = 4;
  params.probabilities = ExplicitProbabilities{{{0, 1}, 1.5}};
  EXPECT_THROW(sample_general(params, 0), ParameterError);
  params.probabilities = ProbabilityRule{[](std::span<const Vertex>) { return 0.5; }, 0.1};
  EXPECT_THROW(sample_general(params, 0), ParameterError);
}
