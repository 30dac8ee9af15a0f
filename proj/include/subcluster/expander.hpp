#pragma once

// Explicit expander on [n] with locally computable neighbor lists.
//
// Vertices are embedded in Z_m x Z_m, m = ceil(sqrt(n)), as v = x m + y. Eight
// affine maps of Margulis/Gabber-Galil type and their inverses give up to 16
// neighbors. Points >= n are padding: a map is applied repeatedly until it
// lands back in [n] (first return). The first-return map of a bijection is a
// bijection of [n] whose inverse is the first-return map of the inverse, so
// the neighbor relation is symmetric. Self-loops are dropped and duplicates
// collapsed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "subcluster/graph.hpp"
#include "subcluster/spectral.hpp"

namespace subcluster {

inline constexpr std::uint32_t kExpanderDegree = 16;

namespace detail {

inline std::uint64_t expander_side(std::uint64_t n) {
  auto m = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (m * m < n) ++m;
  while (m > 1 && (m - 1) * (m - 1) >= n) --m;
  return std::max<std::uint64_t>(m, 1);
}

// Map `which` in [0, 16): 0..7 forward, 8..15 the matching inverses.
inline std::uint64_t expander_map(std::uint64_t v, std::uint64_t m, int which) {
  const std::uint64_t x = v / m, y = v % m;
  auto mod = [m](std::uint64_t a) { return a % m; };
  auto sub = [m](std::uint64_t a, std::uint64_t b) { return (a + m - (b % m)) % m; };
  std::uint64_t nx = x, ny = y;
  switch (which) {
    case 0: ny = mod(y + 2 * x); break;
    case 1: ny = mod(y + 2 * x + 1); break;
    case 2: nx = mod(x + 2 * y); break;
    case 3: nx = mod(x + 2 * y + 1); break;
    case 4: nx = mod(x + 1); break;
    case 5: ny = mod(y + 1); break;
    case 6: nx = mod(x + y); break;
    case 7: ny = mod(y + x); break;
    case 8: ny = sub(y, 2 * x); break;
    case 9: ny = sub(y, 2 * x + 1); break;
    case 10: nx = sub(x, 2 * y); break;
    case 11: nx = sub(x, 2 * y + 1); break;
    case 12: nx = sub(x, 1); break;
    case 13: ny = sub(y, 1); break;
    case 14: nx = sub(x, y); break;
    case 15: ny = sub(y, x); break;
    default: throw std::logic_error("expander map index");
  }
  return nx * m + ny;
}

}  // namespace detail

// Sorted, distinct neighbors of v (never v itself), at most 16.
inline std::vector<Vertex> expander_neighbors(std::size_t n, Vertex v) {
  if (v >= n) throw std::out_of_range("expander_neighbors: vertex out of range");
  const std::uint64_t m = detail::expander_side(n);
  std::array<Vertex, kExpanderDegree> found{};
  std::size_t count = 0;
  for (int which = 0; which < 16; ++which) {
    std::uint64_t w = detail::expander_map(v, m, which);
    while (w >= n) w = detail::expander_map(w, m, which);
    if (w != v) found[count++] = static_cast<Vertex>(w);
  }
  std::sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(count));
  const auto last = std::unique(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(count));
  return std::vector<Vertex>(found.begin(), last);
}

// Whole expander as a Graph with degree bound 16 (desk scale).
inline Graph materialize_expander(std::size_t n) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (Vertex v = 0; v < n; ++v) {
    for (Vertex u : expander_neighbors(n, v)) {
      if (v < u) edges.emplace_back(v, u);
    }
  }
  return Graph::from_edges(n, kExpanderDegree, edges);
}

inline constexpr std::size_t kExpanderGapLimit = 1u << 16;

// lambda2 of L for the materialized expander (d = 16). Cheeger then gives
// edge expansion phi(S) >= lambda2 / 2 for every |S| <= n/2.
inline double expander_gap(std::size_t n) {
  if (n < 2) throw std::invalid_argument("expander_gap needs n >= 2");
  if (n > kExpanderGapLimit) throw DeskLimitError("expander_gap: n too large");
  return spectral_gap(materialize_expander(n));
}

}  // namespace subcluster
