#pragma once

// Lazy random walks on the d-regularized graph.
//
// Per step a walk at v moves to each neighbor with probability 1/(2d) and
// stays with probability 1 - deg(v)/(2d). Three stopping variants:
//   Plain(t)             exactly t steps            (p_v^t)
//   UniformAveraging(t)  l ~ U{0..t-1} steps        (pbar_v^t)
//   TwoPhase(t)          l1 + l2, l_i ~ U{0..t-1}   (qbar_v^t)
// Exact mode propagates dense distributions; sampled mode draws endpoints.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "subcluster/graph.hpp"
#include "subcluster/rng.hpp"

namespace subcluster {

// Dense probability vector over the vertices.
class WalkDistribution {
 public:
  WalkDistribution() = default;
  explicit WalkDistribution(std::vector<double> p) : p_(std::move(p)) {}

  static WalkDistribution point(std::size_t n, Vertex v) {
    std::vector<double> p(n, 0.0);
    p.at(v) = 1.0;
    return WalkDistribution(std::move(p));
  }

  static WalkDistribution uniform_on(std::size_t n, const VertexSet& s) {
    if (s.empty()) throw std::invalid_argument("uniform distribution on an empty set");
    std::vector<double> p(n, 0.0);
    const double mass = 1.0 / static_cast<double>(s.size());
    for (Vertex v : s) p.at(v) = mass;
    return WalkDistribution(std::move(p));
  }

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  double& operator[](std::size_t i) { return p_[i]; }
  const std::vector<double>& values() const { return p_; }
  std::vector<double>& values() { return p_; }

  double sum() const { return std::accumulate(p_.begin(), p_.end(), 0.0); }

  // Non-negative entries summing to one within tol.
  bool is_valid(double tol = 1e-12) const {
    for (double x : p_) {
      if (!(x >= 0.0)) return false;
    }
    return std::abs(sum() - 1.0) <= tol;
  }

 private:
  std::vector<double> p_;
};

// Half the l1 distance.
inline double total_variation(const WalkDistribution& a, const WalkDistribution& b) {
  if (a.size() != b.size()) throw std::invalid_argument("total_variation size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

struct WalkKind {
  enum class Type { kPlain, kUniformAveraging, kTwoPhase };

  Type type;
  std::uint64_t t;

  static WalkKind plain(std::uint64_t t) { return make(Type::kPlain, t); }
  static WalkKind uniform_averaging(std::uint64_t t) { return make(Type::kUniformAveraging, t); }
  static WalkKind two_phase(std::uint64_t t) { return make(Type::kTwoPhase, t); }

 private:
  static WalkKind make(Type type, std::uint64_t t) {
    if (t < 1) throw std::invalid_argument("walk length t must be >= 1");
    return WalkKind{type, t};
  }
};

// One application of P = (I + A/d)/2 (A with regularizing loops), as dist * P.
inline WalkDistribution lazy_step(const Graph& g, const WalkDistribution& dist) {
  const std::size_t n = g.num_vertices();
  if (dist.size() != n) throw std::invalid_argument("distribution size does not match graph");
  const double d = g.degree_bound();
  if (d == 0) return dist;
  const double move = 1.0 / (2.0 * d);
  std::vector<double> out(n, 0.0);
  for (Vertex v = 0; v < n; ++v) {
    const double p = dist[v];
    if (p == 0.0) continue;
    auto nb = g.neighbors(v);
    out[v] += p * (1.0 - static_cast<double>(nb.size()) * move);
    const double share = p * move;
    for (Vertex u : nb) out[u] += share;
  }
  return WalkDistribution(std::move(out));
}

// 1_v P^t.
inline WalkDistribution exact_p(const Graph& g, Vertex v, std::uint64_t t) {
  auto dist = WalkDistribution::point(g.num_vertices(), v);
  for (std::uint64_t i = 0; i < t; ++i) dist = lazy_step(g, dist);
  return dist;
}

// (1/t) sum_{l=0}^{t-1} 1_v P^l.
inline WalkDistribution exact_pbar(const Graph& g, Vertex v, std::uint64_t t) {
  if (t < 1) throw std::invalid_argument("exact_pbar requires t >= 1");
  const std::size_t n = g.num_vertices();
  auto dist = WalkDistribution::point(n, v);
  std::vector<double> acc(n, 0.0);
  for (std::uint64_t l = 0; l < t; ++l) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += dist[i];
    if (l + 1 < t) dist = lazy_step(g, dist);
  }
  const double inv = 1.0 / static_cast<double>(t);
  for (double& x : acc) x *= inv;
  return WalkDistribution(std::move(acc));
}

// Distribution after l1 + l2 steps, l1, l2 independent uniform on {0..t-1}.
inline WalkDistribution exact_qbar(const Graph& g, Vertex v, std::uint64_t t) {
  if (t < 1) throw std::invalid_argument("exact_qbar requires t >= 1");
  const std::size_t n = g.num_vertices();
  auto dist = WalkDistribution::point(n, v);
  std::vector<double> acc(n, 0.0);
  const double pairs = static_cast<double>(t) * static_cast<double>(t);
  const std::uint64_t last = 2 * t - 2;
  for (std::uint64_t s = 0; s <= last; ++s) {
    // #{(l1, l2) : l1 + l2 = s}
    const double ways = static_cast<double>(std::min(s, last - s) + 1);
    const double w = ways / pairs;
    for (std::size_t i = 0; i < n; ++i) acc[i] += w * dist[i];
    if (s < last) dist = lazy_step(g, dist);
  }
  return WalkDistribution(std::move(acc));
}

// Runs `steps` lazy steps from v. Draws i uniform in {0..2d-1}; moves to the
// i-th neighbor when i < deg, else stays. Adds the degree and neighbor queries
// it would issue against the adjacency-list oracle to `queries`.
inline Vertex lazy_walk(const Graph& g, Vertex v, std::uint64_t steps, Rng& rng,
                        std::uint64_t& queries) {
  const std::uint32_t twice_d = 2 * g.degree_bound();
  if (twice_d == 0) return v;
  auto nb = g.neighbors(v);
  ++queries;  // degree of the start vertex
  for (std::uint64_t s = 0; s < steps; ++s) {
    const std::uint32_t i = rng.below(twice_d);
    if (i < nb.size()) {
      v = nb[i];
      nb = g.neighbors(v);
      queries += 2;  // neighbor, then degree of the new position
    }
  }
  return v;
}

inline std::uint64_t draw_length(const WalkKind& kind, Rng& rng) {
  auto below = [&](std::uint64_t t) -> std::uint64_t {
    if (t <= 0xFFFFFFFFULL) return rng.below(static_cast<std::uint32_t>(t));
    return rng.next() % t;
  };
  switch (kind.type) {
    case WalkKind::Type::kPlain:
      return kind.t;
    case WalkKind::Type::kUniformAveraging:
      return below(kind.t);
    case WalkKind::Type::kTwoPhase:
      return below(kind.t) + below(kind.t);
  }
  return 0;
}

// Endpoint of one walk drawn from an existing stream; charges g's counter.
inline Vertex sample_walk(const Graph& g, Vertex v, const WalkKind& kind, Rng& rng) {
  std::uint64_t queries = 0;
  const Vertex end = lazy_walk(g, v, draw_length(kind, rng), rng, queries);
  g.counter().add(queries);
  return end;
}

// Endpoint of one walk, deterministic in (graph, v, kind, seed).
inline Vertex sample_walk(const Graph& g, Vertex v, const WalkKind& kind, std::uint64_t seed) {
  if (v >= g.num_vertices()) throw std::out_of_range("sample_walk start vertex out of range");
  Rng rng = Rng::stream(seed, "walk", v, 0);
  return sample_walk(g, v, kind, rng);
}

}  // namespace subcluster
