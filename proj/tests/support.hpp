#pragma once

// Reference computations for the tests, built straight from edge lists with
// dense Eigen arithmetic so they share no code with the library's walk and
// chain routines.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "subcluster/graph.hpp"
#include "subcluster/oracle.hpp"

namespace subcluster::testing {

// Lazy walk matrix (I + A/d)/2, A with loops topping each row up to d.
inline Eigen::MatrixXd reference_walk_matrix(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  const double d = g.degree_bound();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (auto [u, v] : g.edges()) {
    a(u, v) += 1.0;
    a(v, u) += 1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) += d - a.row(i).sum();
  return 0.5 * (Eigen::MatrixXd::Identity(n, n) + a / d);
}

// Row v of (1/t) sum_{l<t} P^l by direct accumulation.
inline Eigen::RowVectorXd reference_pbar(const Eigen::MatrixXd& p, Vertex v, std::uint64_t t) {
  Eigen::RowVectorXd cur = Eigen::RowVectorXd::Zero(p.rows());
  cur(v) = 1.0;
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(p.rows());
  for (std::uint64_t l = 0; l < t; ++l) {
    acc += cur;
    cur = cur * p;
  }
  return acc / static_cast<double>(t);
}

// Connected graph: a Hamiltonian cycle plus random chords under degree d.
inline Graph connected_random(std::size_t n, std::uint32_t d, std::size_t chords, std::uint64_t seed) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  std::vector<std::uint32_t> deg(n, 0);
  std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
  auto add = [&](Vertex u, Vertex v) {
    if (u == v || has[u][v] || deg[u] >= d || deg[v] >= d) return;
    has[u][v] = has[v][u] = 1;
    ++deg[u];
    ++deg[v];
    edges.emplace_back(std::min(u, v), std::max(u, v));
  };
  for (Vertex v = 0; v < n; ++v) add(v, static_cast<Vertex>((v + 1) % n));
  std::uint64_t x = seed * 0x9E3779B97F4A7C15ULL + 1;
  auto next = [&] {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    return x;
  };
  for (std::size_t i = 0; i < chords; ++i) add(static_cast<Vertex>(next() % n), static_cast<Vertex>(next() % n));
  return Graph::from_edges(n, d, edges);
}

// Oracle settings tuned for planted desk instances with d = 10 and a
// crossing fraction near 1e-4.
inline OracleParams planted_params(std::size_t k, std::uint64_t seed, RcpMode mode = RcpMode::kSampled) {
  OracleParams p;
  p.k = k;
  p.phi = 0.6;
  p.eps = 5e-4;
  p.kappa = 0.2;
  p.delta0 = 0.3;
  p.c_big = 2.0;
  p.sample_min = 150;
  p.sample_max = 150;
  p.rcp_mode = mode;
  p.master_seed = seed;
  return p;
}

// One block per part: the first |part|/denominator vertices of a BFS from a
// seeded root, restricted to the part.
inline std::vector<VertexSet> ball_blocks(const Graph& g, const std::vector<VertexSet>& parts,
                                          std::size_t denominator, std::uint64_t seed) {
  std::vector<VertexSet> blocks;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& part = parts[i];
    const std::size_t want = part.size() / denominator;
    std::vector<Vertex> order{part[(seed * 7919 + i * 104729) % part.size()]};
    std::vector<char> seen(g.num_vertices(), 0);
    seen[order[0]] = 1;
    for (std::size_t head = 0; head < order.size() && order.size() < want; ++head) {
      for (Vertex u : g.neighbors(order[head])) {
        if (!seen[u] && part.contains(u) && order.size() < want) {
          seen[u] = 1;
          order.push_back(u);
        }
      }
    }
    if (order.size() > want) order.resize(want);
    blocks.emplace_back(std::move(order));
  }
  return blocks;
}

}  // namespace subcluster::testing
