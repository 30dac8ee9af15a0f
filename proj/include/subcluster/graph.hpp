#pragma once

// Bounded-degree undirected graphs with adjacency-list query access.
//
// A Graph stores n, the degree bound d and sorted CSR adjacency. The bound d
// may exceed the realized maximum degree; every walk probability is computed
// against d, never against the realized degree. Self-loops are never stored:
// laziness and d-regularization are modeled by the walk code.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace subcluster {

using Vertex = std::uint32_t;

// Counts degree/neighbor queries issued against a graph. Copying a counter
// copies its current value into a fresh atomic.
class QueryCounter {
 public:
  QueryCounter() = default;
  QueryCounter(const QueryCounter& other) : count_(other.value()) {}
  QueryCounter& operator=(const QueryCounter& other) {
    count_.store(other.value(), std::memory_order_relaxed);
    return *this;
  }

  void add(std::uint64_t k) const { count_.fetch_add(k, std::memory_order_relaxed); }
  std::uint64_t value() const { return count_.load(std::memory_order_relaxed); }
  void reset() const { count_.store(0, std::memory_order_relaxed); }

 private:
  mutable std::atomic<std::uint64_t> count_{0};
};

// Strictly sorted, duplicate-free list of vertex ids.
class VertexSet {
 public:
  VertexSet() = default;

  // Sorts and deduplicates.
  explicit VertexSet(std::vector<Vertex> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }
  VertexSet(std::initializer_list<Vertex> ids) : VertexSet(std::vector<Vertex>(ids)) {}

  static VertexSet range(Vertex begin, Vertex end) {
    std::vector<Vertex> ids;
    ids.reserve(end > begin ? end - begin : 0);
    for (Vertex v = begin; v < end; ++v) ids.push_back(v);
    VertexSet s;
    s.ids_ = std::move(ids);
    return s;
  }

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(Vertex v) const { return std::binary_search(ids_.begin(), ids_.end(), v); }
  std::span<const Vertex> ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  Vertex operator[](std::size_t i) const { return ids_[i]; }

  // Complement within [0, n).
  VertexSet complement(std::size_t n) const {
    std::vector<Vertex> out;
    out.reserve(n - std::min(n, ids_.size()));
    std::size_t j = 0;
    for (Vertex v = 0; v < n; ++v) {
      if (j < ids_.size() && ids_[j] == v) {
        ++j;
      } else {
        out.push_back(v);
      }
    }
    VertexSet s;
    s.ids_ = std::move(out);
    return s;
  }

  friend bool operator==(const VertexSet&, const VertexSet&) = default;

 private:
  std::vector<Vertex> ids_;
};

enum class GraphErrorKind {
  kMalformed,
  kVertexOutOfRange,
  kSelfLoop,
  kAsymmetric,  // edge line not in canonical "u v" with u < v orientation
  kDuplicateEdge,
  kDegreeBound,
  kIo,
};

class GraphError : public std::runtime_error {
 public:
  GraphError(GraphErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  GraphErrorKind kind() const { return kind_; }

 private:
  GraphErrorKind kind_;
};

class Graph {
 public:
  Graph() = default;

  // Builds from an undirected edge list. Each unordered pair must appear once;
  // orientation is irrelevant here.
  static Graph from_edges(std::size_t n, std::uint32_t d,
                          std::span<const std::pair<Vertex, Vertex>> edges) {
    Graph g;
    g.d_ = d;
    g.offsets_.assign(n + 1, 0);
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) {
        throw GraphError(GraphErrorKind::kVertexOutOfRange,
                         "edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
      }
      if (u == v) {
        throw GraphError(GraphErrorKind::kSelfLoop, "self-loop at " + std::to_string(u));
      }
      ++g.offsets_[u + 1];
      ++g.offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.adjacency_.resize(g.offsets_[n]);
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : edges) {
      g.adjacency_[fill[u]++] = v;
      g.adjacency_[fill[v]++] = u;
    }
    for (Vertex v = 0; v < n; ++v) {
      auto first = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
      auto last = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
      std::sort(first, last);
      if (std::adjacent_find(first, last) != last) {
        throw GraphError(GraphErrorKind::kDuplicateEdge,
                         "duplicate edge at vertex " + std::to_string(v));
      }
      if (static_cast<std::size_t>(last - first) > d) {
        throw GraphError(GraphErrorKind::kDegreeBound,
                         "vertex " + std::to_string(v) + " has degree " +
                             std::to_string(last - first) + " > d=" + std::to_string(d));
      }
    }
    return g;
  }

  std::size_t num_vertices() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::uint32_t degree_bound() const { return d_; }
  std::size_t num_edges() const { return adjacency_.size() / 2; }

  // Counted oracle access.
  std::uint32_t degree(Vertex v) const {
    check_vertex(v);
    counter_.add(1);
    return degree_unchecked(v);
  }

  Vertex neighbor(Vertex v, std::uint32_t i) const {
    check_vertex(v);
    if (i >= degree_unchecked(v)) {
      throw std::out_of_range("neighbor index " + std::to_string(i) + " >= degree of " +
                              std::to_string(v));
    }
    counter_.add(1);
    return adjacency_[offsets_[v] + i];
  }

  // Uncounted full access for exact (desk-scale) computations. Sampled code
  // paths that use these must charge the counter themselves.
  std::span<const Vertex> neighbors(Vertex v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::uint32_t degree_unchecked(Vertex v) const {
    return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
  }
  std::uint32_t max_degree() const {
    std::uint32_t m = 0;
    for (Vertex v = 0; v < num_vertices(); ++v) m = std::max(m, degree_unchecked(v));
    return m;
  }
  bool has_edge(Vertex u, Vertex v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  // Canonical edge list, u < v, lexicographically sorted.
  std::vector<std::pair<Vertex, Vertex>> edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    out.reserve(num_edges());
    for (Vertex u = 0; u < num_vertices(); ++u) {
      for (Vertex v : neighbors(u)) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  const QueryCounter& counter() const { return counter_; }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.d_ == b.d_ && a.offsets_ == b.offsets_ && a.adjacency_ == b.adjacency_;
  }

 private:
  void check_vertex(Vertex v) const {
    if (v >= num_vertices()) {
      throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
    }
  }

  std::uint32_t d_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> adjacency_;
  QueryCounter counter_;
};

// |E(S, V \ S)|.
inline std::uint64_t crossing_edges(const Graph& g, const VertexSet& s) {
  std::uint64_t cut = 0;
  for (Vertex v : s) {
    for (Vertex u : g.neighbors(v)) {
      if (!s.contains(u)) ++cut;
    }
  }
  return cut;
}

// phi_G(S) = |E(S, V \ S)| / (d |S|).
inline double outer_conductance(const Graph& g, const VertexSet& s) {
  if (s.empty()) throw std::invalid_argument("outer_conductance of an empty set");
  if (s.ids().back() >= g.num_vertices()) throw std::out_of_range("vertex set exceeds graph");
  return static_cast<double>(crossing_edges(g, s)) /
         (static_cast<double>(g.degree_bound()) * static_cast<double>(s.size()));
}

// Subgraph induced on s, relabeled to 0..|s|-1 in sorted order, same bound d.
inline Graph induced_subgraph(const Graph& g, const VertexSet& s) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (Vertex u : g.neighbors(s[i])) {
      if (s[i] < u && s.contains(u)) {
        auto j = static_cast<Vertex>(std::lower_bound(s.begin(), s.end(), u) - s.begin());
        edges.emplace_back(static_cast<Vertex>(i), j);
      }
    }
  }
  return Graph::from_edges(s.size(), g.degree_bound(), edges);
}

namespace detail {

inline bool parse_pair(const std::string& line, long long& a, long long& b) {
  std::istringstream in(line);
  std::string extra;
  if (!(in >> a >> b)) return false;
  return !(in >> extra);
}

// Strips '#' comments and surrounding whitespace.
inline std::string strip_line(const std::string& raw) {
  std::string line = raw.substr(0, raw.find('#'));
  auto first = line.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  auto last = line.find_last_not_of(" \t\r");
  return line.substr(first, last - first + 1);
}

}  // namespace detail

// Text edge-list format: "n d" header, then "u v" lines with u < v.
inline Graph read_graph(std::istream& in) {
  std::string raw;
  std::size_t lineno = 0;
  long long n = -1, d = -1;
  std::vector<std::pair<Vertex, Vertex>> edges;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::strip_line(raw);
    if (line.empty()) continue;
    long long a = 0, b = 0;
    if (!detail::parse_pair(line, a, b) || a < 0 || b < 0) {
      throw GraphError(GraphErrorKind::kMalformed,
                       "line " + std::to_string(lineno) + ": expected two non-negative integers");
    }
    if (n < 0) {
      n = a;
      d = b;
      continue;
    }
    if (a >= n || b >= n) {
      throw GraphError(GraphErrorKind::kVertexOutOfRange,
                       "line " + std::to_string(lineno) + ": vertex out of range");
    }
    if (a == b) {
      throw GraphError(GraphErrorKind::kSelfLoop, "line " + std::to_string(lineno) + ": self-loop");
    }
    if (a > b) {
      throw GraphError(GraphErrorKind::kAsymmetric,
                       "line " + std::to_string(lineno) + ": edge must be written with u < v");
    }
    edges.emplace_back(static_cast<Vertex>(a), static_cast<Vertex>(b));
  }
  if (n < 0) throw GraphError(GraphErrorKind::kMalformed, "missing \"n d\" header");
  return Graph::from_edges(static_cast<std::size_t>(n), static_cast<std::uint32_t>(d), edges);
}

inline Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError(GraphErrorKind::kIo, "cannot open " + path);
  return read_graph(in);
}

inline void write_graph(const Graph& g, std::ostream& out) {
  out << g.num_vertices() << ' ' << g.degree_bound() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

inline void store_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GraphError(GraphErrorKind::kIo, "cannot write " + path);
  write_graph(g, out);
}

}  // namespace subcluster
