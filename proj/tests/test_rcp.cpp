#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "subcluster/expander.hpp"
#include "subcluster/generators.hpp"
#include "subcluster/rcp.hpp"

using namespace subcluster;

namespace {

// Vertex 0 isolated, the rest a sparse random graph.
Graph with_isolated_vertex(std::size_t n, std::uint64_t seed) {
  const auto base = gen_random_bounded(n - 1, 6, 3 * n, seed);
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (auto [u, v] : base.edges()) edges.emplace_back(u + 1, v + 1);
  return Graph::from_edges(n, 6, edges);
}

// Two disjoint copies of a random graph on m vertices.
Graph two_components(std::size_t m, std::uint64_t seed) {
  const auto base = gen_random_bounded(m, 6, 4 * m, seed);
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (auto [u, v] : base.edges()) {
    edges.emplace_back(u, v);
    edges.emplace_back(u + m, v + m);
  }
  return Graph::from_edges(2 * m, 6, edges);
}

}  // namespace

TEST(RcpParams, DerivesWalkCount) {
  const auto p = RcpParams::derive(1024, 0.1, 0.1, 50);
  EXPECT_EQ(p.x, 3200u);
  EXPECT_EQ(p.trials(1024), static_cast<std::uint64_t>(std::ceil(4.0 * std::log(1024.0))));
  EXPECT_EQ(p.find_set_walks(1024), static_cast<std::uint64_t>(std::ceil(4.0 * 32.0 * std::log(1024.0))));
  EXPECT_NEAR(p.heavy_hits(1024), 4.0 * 0.95 * std::log(1024.0), 1e-12);
}

TEST(RcpParams, CapsWalkCount) {
  EXPECT_EQ(RcpParams::derive(1 << 20, 0.1, 0.01, 5, 4.0, 1000).x, 1000u);
  EXPECT_EQ(RcpParams::derive(1 << 20, 0.1, 0.01, 5, 4.0, std::nullopt).x, 10240000u);
}

TEST(RcpParams, RejectsInvalid) {
  EXPECT_THROW(RcpParams::derive(100, 0.6, 0.1, 5), std::invalid_argument);
  EXPECT_THROW(RcpParams::derive(100, 0.1, 0.0, 5), std::invalid_argument);
  EXPECT_THROW(RcpParams::derive(100, 0.1, 0.1, 0), std::invalid_argument);
  EXPECT_THROW(RcpParams::derive(100, 0.1, 0.1, 5, 0.5), std::invalid_argument);
}

TEST(RcpOutcome, MedianAndAbortRule) {
  EXPECT_TRUE(median_outcome({1.0, 2.0}, 4).aborted());
  EXPECT_TRUE(median_outcome({}, 1).aborted());
  EXPECT_DOUBLE_EQ(median_outcome({3.0, 1.0, 2.0}, 4).value(), 2.0);
  EXPECT_DOUBLE_EQ(median_outcome({4.0, 1.0, 3.0, 2.0}, 5).value(), 2.0);
  EXPECT_THROW(RcpOutcome::abort().value(), std::logic_error);
}

TEST(CountCollisions, CountsPairs) {
  EXPECT_EQ(count_collisions({1, 1, 2, 5}, {1, 2, 2, 3}), 2u * 1u + 1u * 2u);
  EXPECT_EQ(count_collisions({}, {1}), 0u);
}

TEST(FindSet, IsolatedVertexIsTheOnlyHeavyOne) {
  const std::size_t n = 2000;
  const auto g = with_isolated_vertex(n, 1);
  const auto f = find_set(g, 0, 0.1, 30, 5);
  EXPECT_FALSE(f.contains(0));
  EXPECT_EQ(f.size(), n - 1);
}

TEST(FindSet, DeterministicForSeed) {
  const auto g = materialize_expander(400);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_EQ(find_set(g, 17, 0.1, 4, seed), find_set(g, 17, 0.1, 4, seed));
  }
}

TEST(FindSet, ExpanderHeavySetIsSmall) {
  const std::size_t n = 400;
  const auto g = materialize_expander(n);
  const std::uint64_t t = 40;
  const double bound = static_cast<double>(n) - 2.0 * std::sqrt(static_cast<double>(n));
  const auto exact = exact_pbar(g, 0, t);
  std::size_t exact_heavy = 0;
  for (double x : exact.values()) exact_heavy += x > 0.9 / std::sqrt(static_cast<double>(n));
  EXPECT_LE(static_cast<double>(exact_heavy), 2.0 * std::sqrt(static_cast<double>(n)));
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    good += static_cast<double>(find_set(g, 0, 0.1, t, seed).size()) >= bound;
  }
  EXPECT_GE(good, 95);
}

TEST(EstimateRcp, DisjointComponentsGiveZero) {
  const auto g = two_components(150, 3);
  const auto p = RcpParams::derive(g.num_vertices(), 0.1, 0.3, 40);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = estimate_rcp(g, 4, 150 + 9, p, seed);
    if (!r.aborted()) {
      EXPECT_EQ(r.value(), 0.0);
    }
  }
}

TEST(EstimateRcp, DeterministicForSeed) {
  const auto g = materialize_expander(256);
  const auto p = RcpParams::derive(256, 0.1, 0.3, 30);
  EXPECT_EQ(estimate_rcp(g, 3, 70, p, 9), estimate_rcp(g, 3, 70, p, 9));
}

TEST(EstimateRcp, SelfPairWithinBracketOnExpander) {
  const std::size_t n = 1024;
  const auto g = materialize_expander(n);
  const std::uint64_t t = static_cast<std::uint64_t>(std::ceil(20.0 * std::log(1024.0) / 0.25));
  const double delta = 0.1, theta = 0.1, floor = 1.0 / (2.0 * static_cast<double>(n));
  const auto p = RcpParams::derive(n, theta, delta, t);
  int inside = 0;
  const int runs = 10;
  for (int s = 0; s < runs; ++s) {
    const Vertex u = static_cast<Vertex>(97 * s % n);
    const auto pu = exact_pbar(g, u, t);
    const double lo_ref = exact_rcp(pu, pu, theta);
    const double hi_ref = exact_rcp(pu, pu, 0.0);
    const double lo = lo_ref - delta * std::max(lo_ref, floor);
    const double hi = hi_ref + delta * std::max(hi_ref, floor);
    const auto r = estimate_rcp(g, u, u, p, 1000 + s);
    inside += !r.aborted() && r.value() >= lo && r.value() <= hi;
  }
  EXPECT_GE(inside, 9);
}

TEST(EstimateRcp, SameClusterPairClearsWeightThreshold) {
  const auto inst = gen_clusterable(400, 2, 10, 1e-4, 4);
  const std::uint64_t t = static_cast<std::uint64_t>(std::ceil(20.0 * std::log(400.0) / 0.36));
  const double kappa = 0.2;
  const auto& c = inst.partition[0];
  const double threshold = (1.0 - kappa) / static_cast<double>(c.size());
  const auto p = RcpParams::derive(400, 0.1, 0.3, t, 2.0);
  int above = 0, exact_above = 0;
  const int pairs = 20;
  for (int s = 0; s < pairs; ++s) {
    const Vertex u = c[(7 * s) % c.size()];
    const Vertex v = c[(13 * s + 5) % c.size()];
    exact_above += exact_rcp(inst.graph, u, v, 0.1, t) >= threshold;
    const auto r = estimate_rcp(inst.graph, u, v, p, 500 + s);
    above += !r.aborted() && r.value() >= threshold;
  }
  EXPECT_EQ(exact_above, pairs);
  EXPECT_GE(above, 18);
}

TEST(ExactRcp, DisjointSupportsGiveZero) {
  const auto g = two_components(30, 2);
  EXPECT_EQ(exact_rcp(g, 0, 31, 0.1, 20), 0.0);
  EXPECT_EQ(exact_rcp(g, 0, 31, 0.0, 20), 0.0);
}

TEST(ExactRcp, BoundedByTwoPhaseMass) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = gen_random_bounded(25, 4, 50, seed);
    const Vertex u = static_cast<Vertex>(seed % 25), v = static_cast<Vertex>((seed * 7 + 3) % 25);
    const std::uint64_t t = 3 + seed % 10;
    EXPECT_LE(exact_rcp(g, u, v, 0.0, t), exact_qbar(g, v, t)[u] + 1e-15);
  }
}

TEST(ExactRcp, NonIncreasingInTheta) {
  const auto g = gen_random_bounded(64, 5, 160, 6);
  const auto pu = exact_pbar(g, 2, 6), pv = exact_pbar(g, 9, 6);
  double prev = exact_rcp(pu, pv, 0.0);
  for (double theta : {0.05, 0.1, 0.2, 0.3, 0.45}) {
    const double cur = exact_rcp(pu, pv, theta);
    EXPECT_LE(cur, prev);
    prev = cur;
  }
}
