#pragma once

// Local reconstruction filter. Answers neighbor queries of a graph G' that
// adds explicit-expander edges around outlier vertices:
//   learning failed      -> G-neighbors plus all expander neighbors
//   w is an outlier      -> G-neighbors plus all expander neighbors
//   otherwise            -> G-neighbors plus expander neighbors that are outliers
// An expander edge (w, u) is present iff w or u is an outlier, so the answers
// are symmetric. G' has degree bound d + 16.

#include <algorithm>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "subcluster/expander.hpp"
#include "subcluster/graph.hpp"
#include "subcluster/oracle.hpp"

namespace subcluster {

class Reconstructor {
 public:
  explicit Reconstructor(ClusteringOracle& oracle) : oracle_(oracle), g_(oracle.graph()) {}

  std::uint32_t degree_bound() const { return g_.degree_bound() + kExpanderDegree; }
  bool learning_failed() const { return oracle_.state().failed; }

  std::vector<Vertex> new_neighbors(Vertex w) {
    if (w >= g_.num_vertices()) throw std::out_of_range("new_neighbors: vertex out of range");
    {
      std::lock_guard lock(mutex_);
      if (auto it = memo_.find(w); it != memo_.end()) return it->second;
    }
    std::vector<Vertex> out;
    const std::uint32_t deg = g_.degree(w);
    for (std::uint32_t i = 0; i < deg; ++i) out.push_back(g_.neighbor(w, i));
    const auto exp = expander_neighbors(g_.num_vertices(), w);
    if (learning_failed() || oracle_.is_outlier(w)) {
      out.insert(out.end(), exp.begin(), exp.end());
    } else {
      for (Vertex u : exp) {
        if (oracle_.is_outlier(u)) out.push_back(u);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    std::lock_guard lock(mutex_);
    return memo_.emplace(w, std::move(out)).first->second;
  }

  // Queries every vertex and assembles G'. Throws if the answers are not
  // symmetric.
  Graph materialize() {
    const std::size_t n = g_.num_vertices();
    std::vector<std::vector<Vertex>> lists(n);
    for (Vertex w = 0; w < n; ++w) lists[w] = new_neighbors(w);
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex w = 0; w < n; ++w) {
      for (Vertex u : lists[w]) {
        if (!std::binary_search(lists[u].begin(), lists[u].end(), w)) {
          throw std::logic_error("reconstruction is not symmetric at (" + std::to_string(w) + ", " +
                                 std::to_string(u) + ")");
        }
        if (w < u) edges.emplace_back(w, u);
      }
    }
    return Graph::from_edges(n, degree_bound(), edges);
  }

 private:
  ClusteringOracle& oracle_;
  const Graph& g_;
  std::mutex mutex_;
  std::unordered_map<Vertex, std::vector<Vertex>> memo_;
};

}  // namespace subcluster
