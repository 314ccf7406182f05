#pragma once

// d-uniform hypergraphs, balanced two-community assignments, and samplers for
// HSBM(d, n, alpha, beta) and the independent-edge model H(d, n, p).
//
// Vertices are 0-based in memory and 1-based in every file format.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "hsbm/combinatorics.hpp"
#include "hsbm/error.hpp"
#include "hsbm/random.hpp"

namespace hsbm {

inline constexpr std::size_t kMaxUniformity = 8;

using Vertex = std::uint32_t;
using Edge = std::vector<Vertex>;

class CommunityAssignment {
 public:
  CommunityAssignment() = default;

  explicit CommunityAssignment(std::vector<int> labels) : labels_(std::move(labels)) {
    for (int v : labels_) detail::require(v == 1 || v == -1, "assignment entries must be +1 or -1");
  }

  std::size_t size() const { return labels_.size(); }
  int operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }

  long sum() const { return std::accumulate(labels_.begin(), labels_.end(), 0L); }
  bool is_balanced() const { return !labels_.empty() && sum() == 0; }

  CommunityAssignment flipped() const {
    std::vector<int> out(labels_);
    for (int& v : out) v = -v;
    return CommunityAssignment(std::move(out));
  }

  /// Number of disagreeing coordinates, minimized over the global sign.
  std::size_t hamming_up_to_flip(const CommunityAssignment& other) const {
    detail::require(other.size() == size(), "assignment length mismatch");
    std::size_t diff = 0;
    for (std::size_t i = 0; i < size(); ++i) diff += labels_[i] != other[i];
    return std::min(diff, size() - diff);
  }

  bool equal_up_to_flip(const CommunityAssignment& other) const { return hamming_up_to_flip(other) == 0; }

  friend bool operator==(const CommunityAssignment&, const CommunityAssignment&) = default;

 private:
  std::vector<int> labels_;
};

/// Immutable d-uniform hypergraph. Edges are sorted tuples kept in lexicographic order.
class Hypergraph {
 public:
  Hypergraph() = default;

  /// Validates and canonicalizes: each edge is sorted, then the edge list is sorted.
  Hypergraph(std::size_t n, std::size_t d, std::vector<Edge> edges) : n_(n), d_(d) {
    detail::require(d >= 2 && d <= kMaxUniformity, "uniformity d must lie in [2, 8]");
    detail::require(n >= d, "vertex count must be at least d");
    for (auto& e : edges) {
      detail::require(e.size() == d, "edge size differs from uniformity d");
      std::sort(e.begin(), e.end());
      for (std::size_t k = 0; k < d; ++k) {
        detail::require(e[k] < n, "edge vertex out of range");
        if (k > 0) detail::require(e[k] != e[k - 1], "edge has repeated vertices");
      }
    }
    std::sort(edges.begin(), edges.end());
    detail::require(std::adjacent_find(edges.begin(), edges.end()) == edges.end(), "duplicate edge");
    flat_.reserve(edges.size() * d);
    for (const auto& e : edges) flat_.insert(flat_.end(), e.begin(), e.end());
  }

  std::size_t num_vertices() const { return n_; }
  std::size_t uniformity() const { return d_; }
  std::size_t num_edges() const { return d_ == 0 ? 0 : flat_.size() / d_; }

  std::span<const Vertex> edge(std::size_t k) const { return {flat_.data() + k * d_, d_}; }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (std::size_t k = 0; k < num_edges(); ++k) {
      auto e = edge(k);
      out.emplace_back(e.begin(), e.end());
    }
    return out;
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(n_, 0);
    for (Vertex v : flat_) ++deg[v];
    return deg;
  }

  /// Sub-hypergraph without any edge containing vertex m.
  Hypergraph without_vertex_edges(std::size_t m) const {
    detail::require(m < n_, "vertex out of range");
    std::vector<Edge> kept;
    for (std::size_t k = 0; k < num_edges(); ++k) {
      auto e = edge(k);
      if (std::find(e.begin(), e.end(), static_cast<Vertex>(m)) == e.end()) kept.emplace_back(e.begin(), e.end());
    }
    return Hypergraph(n_, d_, std::move(kept));
  }

  friend bool operator==(const Hypergraph&, const Hypergraph&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<Vertex> flat_;
};

/// Re-checks every type invariant of an existing hypergraph.
inline bool is_valid(const Hypergraph& g) {
  const auto d = g.uniformity();
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    auto e = g.edge(k);
    if (e.size() != d) return false;
    for (std::size_t i = 0; i < d; ++i) {
      if (e[i] >= g.num_vertices()) return false;
      if (i > 0 && e[i] <= e[i - 1]) return false;
    }
    if (k > 0) {
      auto prev = g.edge(k - 1);
      if (!std::lexicographical_compare(prev.begin(), prev.end(), e.begin(), e.end())) return false;
    }
  }
  return true;
}

struct HsbmParams {
  std::size_t d = 2;
  std::size_t n = 2;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;

  /// log n / C(n-1, d-1): the common scale of both edge probabilities.
  double rate_scale() const {
    return std::log(static_cast<double>(n)) / binomial_real(n - 1, d - 1);
  }
  double q_homogeneous() const { return alpha * rate_scale(); }
  double q_heterogeneous() const { return beta * rate_scale(); }

  void validate() const {
    detail::require(d >= 2 && d <= kMaxUniformity, "uniformity d must lie in [2, 8]");
    detail::require(n % 2 == 0, "vertex count n must be even");
    detail::require(n >= 2 * d, "vertex count n must be at least 2d");
    detail::require(alpha >= 0.0 && beta >= 0.0, "alpha and beta must be nonnegative");
    detail::require(q_homogeneous() <= 1.0, "homogeneous edge probability exceeds 1");
    detail::require(q_heterogeneous() <= 1.0, "heterogeneous edge probability exceeds 1");
  }
};

/// p_e on demand, bounded by p_max. Thinning against p_max preserves the exact law.
struct ProbabilityRule {
  std::function<double(std::span<const Vertex>)> probability;
  double p_max = 1.0;
};

/// Explicit e -> p_e table; edges not listed have probability 0.
using ExplicitProbabilities = std::map<Edge, double>;

struct GeneralHypergraphParams {
  std::size_t d = 2;
  std::size_t n = 2;
  std::variant<ExplicitProbabilities, ProbabilityRule> probabilities;
  /// The constant c0 with max_e p_e <= c0 log n / C(n-1, d-1).
  double c0 = 1.0;

  void validate() const {
    detail::require(d >= 2 && d <= kMaxUniformity, "uniformity d must lie in [2, 8]");
    detail::require(n >= d, "vertex count must be at least d");
    if (const auto* table = std::get_if<ExplicitProbabilities>(&probabilities)) {
      for (const auto& [e, p] : *table) {
        detail::require(p >= 0.0 && p <= 1.0, "edge probability outside [0, 1]");
        Hypergraph(n, d, {e});  // validates the edge itself
      }
    } else {
      const auto& rule = std::get<ProbabilityRule>(probabilities);
      detail::require(static_cast<bool>(rule.probability), "probability rule is empty");
      detail::require(rule.p_max >= 0.0 && rule.p_max <= 1.0, "p_max outside [0, 1]");
    }
  }

  /// General model with every edge at probability p.
  static GeneralHypergraphParams constant(std::size_t d, std::size_t n, double p) {
    GeneralHypergraphParams params;
    params.d = d;
    params.n = n;
    params.probabilities = ProbabilityRule{[p](std::span<const Vertex>) { return p; }, p};
    const double scale = std::log(static_cast<double>(n)) / binomial_real(n - 1, d - 1);
    params.c0 = scale > 0 ? p / scale : 0.0;
    return params;
  }
};

inline CommunityAssignment sample_balanced_assignment(std::size_t n, std::uint64_t seed) {
  detail::require(n >= 2 && n % 2 == 0, "balanced assignment needs an even n >= 2");
  std::vector<int> labels(n, -1);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n / 2), 1);
  auto rng = make_rng(seed);
  // Explicit Fisher-Yates; std::shuffle's draw pattern is not pinned by the standard.
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(labels[i], labels[pick(rng)]);
  }
  return CommunityAssignment(std::move(labels));
}

/// First n/2 vertices +1, the rest -1.
inline CommunityAssignment block_assignment(std::size_t n) {
  detail::require(n >= 2 && n % 2 == 0, "balanced assignment needs an even n >= 2");
  std::vector<int> labels(n, -1);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n / 2), 1);
  return CommunityAssignment(std::move(labels));
}

namespace detail {

using EdgeKey = std::array<Vertex, kMaxUniformity>;

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& key) const {
    std::uint64_t h = 0;
    for (Vertex v : key) h = mix64(h ^ v);
    return static_cast<std::size_t>(h);
  }
};

inline EdgeKey make_key(const Edge& e) {
  EdgeKey key{};
  key.fill(0xffffffffu);
  std::copy(e.begin(), e.end(), key.begin());
  return key;
}

/// Uniform d-subset of pool (Floyd's algorithm), mapped through pool and sorted.
inline Edge random_subset(const std::vector<Vertex>& pool, std::size_t d, Rng& rng) {
  const std::size_t m = pool.size();
  std::vector<std::size_t> chosen;
  chosen.reserve(d);
  for (std::size_t j = m - d; j < m; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    std::size_t t = pick(rng);
    if (std::find(chosen.begin(), chosen.end(), t) != chosen.end()) t = j;
    chosen.push_back(t);
  }
  Edge e(d);
  for (std::size_t k = 0; k < d; ++k) e[k] = pool[chosen[k]];
  std::sort(e.begin(), e.end());
  return e;
}

/// Calls visit(edge) for every d-subset of pool in lexicographic order of positions.
template <typename Visit>
void for_each_subset(const std::vector<Vertex>& pool, std::size_t d, Visit&& visit) {
  const std::size_t m = pool.size();
  if (d > m) return;
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  Edge e(d);
  while (true) {
    for (std::size_t k = 0; k < d; ++k) e[k] = pool[idx[k]];
    visit(e);
    std::size_t k = d;
    while (k > 0 && idx[k - 1] == m - d + (k - 1)) --k;
    if (k == 0) return;
    ++idx[k - 1];
    for (std::size_t j = k; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline constexpr std::uint64_t kEnumerationLimit = 1u << 16;

/// Draws `count` distinct edges uniformly from the d-subsets of pool accepted by `in_class`.
/// `class_size` is the number of accepted subsets.
template <typename InClass>
std::vector<Edge> draw_distinct_edges(const std::vector<Vertex>& pool, std::size_t d, std::uint64_t count,
                                      std::uint64_t class_size, InClass&& in_class, Rng& rng) {
  std::vector<Edge> out;
  if (count == 0) return out;
  if (class_size <= kEnumerationLimit || 2 * count > class_size) {
    std::vector<Edge> all;
    for_each_subset(pool, d, [&](const Edge& e) {
      if (in_class(e)) all.push_back(e);
    });
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    all.resize(count);
    return all;
  }
  std::unordered_set<EdgeKey, EdgeKeyHash> seen;
  seen.reserve(count * 2);
  out.reserve(count);
  while (out.size() < count) {
    Edge e = random_subset(pool, d, rng);
    if (!in_class(e)) continue;
    if (seen.insert(make_key(e)).second) out.push_back(std::move(e));
  }
  return out;
}

template <typename Dist>
std::uint64_t draw_count(std::uint64_t trials, double p, Rng& rng) {
  if (p <= 0.0 || trials == 0) return 0;
  if (p >= 1.0) return trials;
  Dist dist(static_cast<typename Dist::result_type>(trials), p);
  return static_cast<std::uint64_t>(dist(rng));
}

inline std::uint64_t binomial_draw(std::uint64_t trials, double p, Rng& rng) {
  return draw_count<std::binomial_distribution<long long>>(trials, p, rng);
}

inline std::vector<Vertex> iota_pool(std::size_t n) {
  std::vector<Vertex> pool(n);
  std::iota(pool.begin(), pool.end(), Vertex{0});
  return pool;
}

/// H(d, n, p) with constant p, via a binomial count and uniform distinct draws.
inline std::vector<Edge> sample_constant_edges(std::size_t n, std::size_t d, double p, Rng& rng) {
  const auto total = binomial(n, d);
  const auto count = binomial_draw(total, p, rng);
  return draw_distinct_edges(iota_pool(n), d, count, total, [](const Edge&) { return true; }, rng);
}

}  // namespace detail

/// Samples HSBM(d, n, alpha, beta) conditioned on `assignment`, using params.seed.
inline Hypergraph sample_hsbm(const HsbmParams& params, const CommunityAssignment& assignment) {
  params.validate();
  detail::require(assignment.size() == params.n, "assignment length differs from n");
  detail::require(assignment.is_balanced(), "assignment must be balanced");
  const std::size_t n = params.n;
  const std::size_t d = params.d;

  std::vector<Vertex> plus, minus;
  for (std::size_t i = 0; i < n; ++i) (assignment[i] > 0 ? plus : minus).push_back(static_cast<Vertex>(i));

  const std::uint64_t side_size = binomial(n / 2, d);
  const std::uint64_t total = binomial(n, d);
  const std::uint64_t mixed_size = total - 2 * side_size;

  std::vector<Edge> edges;
  auto any = [](const Edge&) { return true; };
  for (std::uint64_t side = 0; side < 2; ++side) {
    auto rng = make_rng(derive_seed(params.seed, {side}));
    const auto count = detail::binomial_draw(side_size, params.q_homogeneous(), rng);
    auto drawn = detail::draw_distinct_edges(side == 0 ? plus : minus, d, count, side_size, any, rng);
    edges.insert(edges.end(), std::make_move_iterator(drawn.begin()), std::make_move_iterator(drawn.end()));
  }
  {
    auto rng = make_rng(derive_seed(params.seed, {2}));
    const auto count = detail::binomial_draw(mixed_size, params.q_heterogeneous(), rng);
    auto mixed = [&](const Edge& e) {
      const int first = assignment[e[0]];
      for (std::size_t k = 1; k < e.size(); ++k)
        if (assignment[e[k]] != first) return true;
      return false;
    };
    auto drawn = detail::draw_distinct_edges(detail::iota_pool(n), d, count, mixed_size, mixed, rng);
    edges.insert(edges.end(), std::make_move_iterator(drawn.begin()), std::make_move_iterator(drawn.end()));
  }
  return Hypergraph(n, d, std::move(edges));
}

/// Samples H(d, n, p). Explicit tables are flipped edge by edge; rules are thinned from p_max.
inline Hypergraph sample_general(const GeneralHypergraphParams& params, std::uint64_t seed) {
  params.validate();
  auto rng = make_rng(seed);
  std::vector<Edge> edges;
  if (const auto* table = std::get_if<ExplicitProbabilities>(&params.probabilities)) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (const auto& [e, p] : *table)
      if (coin(rng) < p) edges.push_back(e);
    return Hypergraph(params.n, params.d, std::move(edges));
  }
  const auto& rule = std::get<ProbabilityRule>(params.probabilities);
  auto candidates = detail::sample_constant_edges(params.n, params.d, rule.p_max, rng);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (auto& e : candidates) {
    std::sort(e.begin(), e.end());
    const double p = rule.probability(e);
    detail::require(p >= 0.0 && p <= rule.p_max * (1 + 1e-12), "rule probability outside [0, p_max]");
    if (p >= rule.p_max || coin(rng) * rule.p_max < p) edges.push_back(std::move(e));
  }
  return Hypergraph(params.n, params.d, std::move(edges));
}

/// Expected HSBM edge count: 2 C(n/2, d) q_hom + (C(n, d) - 2 C(n/2, d)) q_het.
inline double expected_edge_count(const HsbmParams& params) {
  const double side = binomial_real(params.n / 2, params.d);
  const double total = binomial_real(params.n, params.d);
  return 2 * side * params.q_homogeneous() + (total - 2 * side) * params.q_heterogeneous();
}

inline double edge_count_variance(const HsbmParams& params) {
  const double side = binomial_real(params.n / 2, params.d);
  const double total = binomial_real(params.n, params.d);
  const double qh = params.q_homogeneous(), qt = params.q_heterogeneous();
  return 2 * side * qh * (1 - qh) + (total - 2 * side) * qt * (1 - qt);
}

}  // namespace hsbm
