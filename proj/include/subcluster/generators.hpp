#pragma once

// Planted clusterable instances and intra-cluster perturbations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "subcluster/graph.hpp"
#include "subcluster/rng.hpp"

namespace subcluster {

class InfeasibleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class PerturbMode { kNone, kDeleteRandom, kDeleteTargetedCut, kInsertRandom, kMixed };

inline PerturbMode parse_perturb_mode(const std::string& s) {
  if (s == "none") return PerturbMode::kNone;
  if (s == "delete-random") return PerturbMode::kDeleteRandom;
  if (s == "delete-targeted-cut") return PerturbMode::kDeleteTargetedCut;
  if (s == "insert-random") return PerturbMode::kInsertRandom;
  if (s == "mixed") return PerturbMode::kMixed;
  throw std::invalid_argument("unknown perturbation mode: " + s);
}

inline std::string to_string(PerturbMode m) {
  switch (m) {
    case PerturbMode::kNone: return "none";
    case PerturbMode::kDeleteRandom: return "delete-random";
    case PerturbMode::kDeleteTargetedCut: return "delete-targeted-cut";
    case PerturbMode::kInsertRandom: return "insert-random";
    case PerturbMode::kMixed: return "mixed";
  }
  return "none";
}

struct PlantedInstance {
  Graph graph;
  std::vector<VertexSet> partition;  // planted clusters P_1..P_h
  std::vector<VertexSet> noise;      // per cluster: carved noise block B_i (may be empty)

  std::size_t n = 0;
  std::size_t k = 0;
  std::uint32_t d = 0;
  double inter_frac = 0.0;
  std::uint64_t seed = 0;

  double eps = 0.0;
  PerturbMode mode = PerturbMode::kNone;
  std::uint64_t budget = 0;      // floor(eps d n)
  std::uint64_t edits_used = 0;  // intra-cluster insertions + deletions

  // Cluster index of every vertex.
  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> out(n, 0);
    for (std::size_t i = 0; i < partition.size(); ++i) {
      for (Vertex v : partition[i]) out[v] = i;
    }
    return out;
  }
};

namespace detail {

inline std::uint64_t edge_key(Vertex u, Vertex v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

// Mutable simple graph used while generating.
class EdgeBuilder {
 public:
  EdgeBuilder(std::size_t n, std::uint32_t d) : d_(d), adj_(n) {}

  bool has(Vertex u, Vertex v) const { return keys_.count(edge_key(u, v)) != 0; }
  std::uint32_t degree(Vertex v) const { return static_cast<std::uint32_t>(adj_[v].size()); }
  bool can_add(Vertex u, Vertex v) const {
    return u != v && !has(u, v) && degree(u) < d_ && degree(v) < d_;
  }
  void add(Vertex u, Vertex v) {
    keys_.insert(edge_key(u, v));
    adj_[u].push_back(v);
    adj_[v].push_back(u);
  }
  void remove(Vertex u, Vertex v) {
    keys_.erase(edge_key(u, v));
    std::erase(adj_[u], v);
    std::erase(adj_[v], u);
  }
  const std::vector<Vertex>& adjacent(Vertex v) const { return adj_[v]; }

  static EdgeBuilder from_graph(const Graph& g) {
    EdgeBuilder b(g.num_vertices(), g.degree_bound());
    for (auto [u, v] : g.edges()) b.add(u, v);
    return b;
  }

  Graph build() const {
    std::vector<std::pair<Vertex, Vertex>> edges;
    edges.reserve(keys_.size());
    for (std::uint64_t key : keys_) {
      edges.emplace_back(static_cast<Vertex>(key >> 32), static_cast<Vertex>(key & 0xFFFFFFFFu));
    }
    std::sort(edges.begin(), edges.end());
    return Graph::from_edges(adj_.size(), d_, edges);
  }

 private:
  std::uint32_t d_;
  std::vector<std::vector<Vertex>> adj_;
  std::unordered_set<std::uint64_t> keys_;
};

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.below(static_cast<std::uint32_t>(i))]);
  }
}

// Configuration model on `members` with target degree `target`; invalid
// pairings are repaired by random edge switches, and dropped if no switch
// succeeds, so degrees land in [target - 1, target] for all but rare vertices.
inline void configuration_model(EdgeBuilder& b, const std::vector<Vertex>& members,
                                std::uint32_t target, Rng& rng) {
  std::vector<Vertex> stubs;
  stubs.reserve(members.size() * target);
  for (Vertex v : members) {
    for (std::uint32_t i = 0; i < target; ++i) stubs.push_back(v);
  }
  if (stubs.size() % 2 == 1) stubs.pop_back();
  shuffle(stubs, rng);
  std::vector<std::pair<Vertex, Vertex>> accepted, rejected;
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
    const Vertex u = stubs[i], v = stubs[i + 1];
    if (u != v && !b.has(u, v)) {
      b.add(u, v);
      accepted.emplace_back(u, v);
    } else {
      rejected.emplace_back(u, v);
    }
  }
  for (auto [a, c] : rejected) {
    for (int attempt = 0; attempt < 200 && !accepted.empty(); ++attempt) {
      auto& edge = accepted[rng.below(static_cast<std::uint32_t>(accepted.size()))];
      const Vertex x = edge.first, y = edge.second;
      // Switch (a,c) + (x,y) -> (a,x) + (c,y).
      if (a == x || a == y || c == x || c == y) continue;
      if (b.has(a, x) || b.has(c, y)) continue;
      b.remove(x, y);
      b.add(a, x);
      b.add(c, y);
      edge = {a, x};
      accepted.emplace_back(c, y);
      break;
    }
  }
}

}  // namespace detail

// k near-equal clusters, each a configuration-model graph of target degree
// d - 2, then inter-cluster edges until every cluster has at least
// ceil(inter_frac d |P_i|) crossing edges.
inline PlantedInstance gen_clusterable(std::size_t n, std::size_t k, std::uint32_t d,
                                       double inter_frac, std::uint64_t seed) {
  if (k < 1) throw InfeasibleError("gen_clusterable: k must be >= 1");
  if (d < 4) throw InfeasibleError("gen_clusterable: d must be >= 4");
  if (n / k < d) throw InfeasibleError("gen_clusterable: clusters need at least d vertices each");
  if (inter_frac < 0.0 || inter_frac > 1.0) throw InfeasibleError("gen_clusterable: inter_frac outside [0,1]");
  if (k == 1 && inter_frac > 0.0) throw InfeasibleError("gen_clusterable: one cluster has no crossing edges");

  PlantedInstance inst;
  inst.n = n;
  inst.k = k;
  inst.d = d;
  inst.inter_frac = inter_frac;
  inst.seed = seed;

  Rng rng = Rng::stream(seed, "gen-clusterable", 0, 0);
  detail::EdgeBuilder b(n, d);
  std::vector<std::size_t> label(n);
  Vertex start = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto size = static_cast<Vertex>(n / k + (i < n % k ? 1 : 0));
    std::vector<Vertex> members;
    for (Vertex v = start; v < start + size; ++v) {
      members.push_back(v);
      label[v] = i;
    }
    detail::configuration_model(b, members, d - 2, rng);
    inst.partition.push_back(VertexSet::range(start, start + size));
    start += size;
  }
  inst.noise.assign(k, VertexSet{});

  if (inter_frac > 0.0) {
    std::vector<std::uint64_t> need(k), have(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
      need[i] = static_cast<std::uint64_t>(
          std::ceil(inter_frac * d * static_cast<double>(inst.partition[i].size())));
    }
    for (std::size_t i = 0; i < k; ++i) {
      const auto& part = inst.partition[i];
      std::uint64_t attempts = 0;
      while (have[i] < need[i]) {
        if (++attempts > 1000 * (need[i] + 10)) {
          throw InfeasibleError("gen_clusterable: cannot place inter-cluster edges under degree bound");
        }
        const Vertex u = part[rng.below(static_cast<std::uint32_t>(part.size()))];
        const Vertex v = rng.below(static_cast<std::uint32_t>(n));
        if (label[v] == i || !b.can_add(u, v)) continue;
        b.add(u, v);
        ++have[i];
        ++have[label[v]];
      }
    }
  }
  inst.graph = b.build();
  return inst;
}

// Random d-bounded graph: `edges` attempted uniform pairs, kept when legal.
inline Graph gen_random_bounded(std::size_t n, std::uint32_t d, std::size_t edges,
                                std::uint64_t seed) {
  detail::EdgeBuilder b(n, d);
  Rng rng = Rng::stream(seed, "gen-random", 0, 0);
  for (std::size_t i = 0; i < edges && n > 1; ++i) {
    const Vertex u = rng.below(static_cast<std::uint32_t>(n));
    const Vertex v = rng.below(static_cast<std::uint32_t>(n));
    if (b.can_add(u, v)) b.add(u, v);
  }
  return b.build();
}

// Edits at most floor(eps d n) edges with both endpoints in one planted
// cluster; inter-cluster edges and the degree bound are preserved.
inline PlantedInstance perturb(const PlantedInstance& inst, double eps, PerturbMode mode,
                               std::uint64_t seed) {
  if (eps < 0.0) throw InfeasibleError("perturb: eps must be >= 0");
  PlantedInstance out = inst;
  out.eps = eps;
  out.mode = mode;
  out.budget = static_cast<std::uint64_t>(
      std::floor(eps * static_cast<double>(inst.d) * static_cast<double>(inst.n)));
  out.edits_used = 0;
  if (out.budget == 0 || mode == PerturbMode::kNone) return out;

  const auto label = inst.labels();
  auto b = detail::EdgeBuilder::from_graph(inst.graph);
  Rng rng = Rng::stream(seed, "perturb", 0, 0);

  std::vector<std::pair<Vertex, Vertex>> intra;
  for (auto [u, v] : inst.graph.edges()) {
    if (label[u] == label[v]) intra.emplace_back(u, v);
  }
  std::unordered_set<std::uint64_t> deleted;

  auto delete_random = [&](std::uint64_t count) {
    if (count > intra.size()) throw InfeasibleError("perturb: fewer intra-cluster edges than the budget");
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto j = i + rng.below(static_cast<std::uint32_t>(intra.size() - i));
      std::swap(intra[i], intra[j]);
      b.remove(intra[i].first, intra[i].second);
      deleted.insert(detail::edge_key(intra[i].first, intra[i].second));
      ++out.edits_used;
    }
  };

  auto insert_random = [&](std::uint64_t count) {
    std::uint64_t attempts = 0;
    for (std::uint64_t added = 0; added < count;) {
      if (++attempts > 1000 * (count + 10)) {
        throw InfeasibleError("perturb: cannot insert intra-cluster edges under degree bound");
      }
      const Vertex u = rng.below(static_cast<std::uint32_t>(inst.n));
      const auto& part = inst.partition[label[u]];
      const Vertex v = part[rng.below(static_cast<std::uint32_t>(part.size()))];
      if (!b.can_add(u, v) || deleted.count(detail::edge_key(u, v))) continue;
      b.add(u, v);
      ++added;
      ++out.edits_used;
    }
  };

  switch (mode) {
    case PerturbMode::kNone:
      break;
    case PerturbMode::kDeleteRandom:
      delete_random(out.budget);
      break;
    case PerturbMode::kInsertRandom:
      insert_random(out.budget);
      break;
    case PerturbMode::kMixed:
      delete_random(out.budget / 2);
      insert_random(out.budget - out.budget / 2);
      break;
    case PerturbMode::kDeleteTargetedCut: {
      // Carve a BFS ball B out of the largest cluster: take the longest BFS
      // prefix (|B| <= |P|/2) whose cut inside the cluster fits the budget,
      // then delete that cut.
      std::size_t target = 0;
      for (std::size_t i = 1; i < inst.partition.size(); ++i) {
        if (inst.partition[i].size() > inst.partition[target].size()) target = i;
      }
      const auto& part = inst.partition[target];
      const Vertex root = part[rng.below(static_cast<std::uint32_t>(part.size()))];
      std::vector<Vertex> order{root};
      std::vector<char> seen(inst.n, 0);
      seen[root] = 1;
      for (std::size_t head = 0; head < order.size(); ++head) {
        for (Vertex u : inst.graph.neighbors(order[head])) {
          if (!seen[u] && label[u] == target) {
            seen[u] = 1;
            order.push_back(u);
          }
        }
      }
      std::vector<char> in_block(inst.n, 0);
      std::int64_t cut = 0;
      std::size_t best = 0;
      for (std::size_t m = 0; m < order.size() && m + 1 <= part.size() / 2; ++m) {
        const Vertex x = order[m];
        std::int64_t inside = 0, deg_in_part = 0;
        for (Vertex u : inst.graph.neighbors(x)) {
          if (label[u] != target) continue;
          ++deg_in_part;
          if (in_block[u]) ++inside;
        }
        in_block[x] = 1;
        cut += deg_in_part - 2 * inside;
        if (cut <= static_cast<std::int64_t>(out.budget)) best = m + 1;
      }
      if (best == 0) throw InfeasibleError("perturb: budget too small to isolate any block");
      std::vector<Vertex> block(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best));
      VertexSet bset(block);
      for (Vertex x : bset) {
        for (Vertex u : inst.graph.neighbors(x)) {
          if (label[u] == target && !bset.contains(u)) {
            b.remove(x, u);
            ++out.edits_used;
          }
        }
      }
      out.noise[target] = std::move(bset);
      break;
    }
  }
  out.graph = b.build();
  return out;
}

// "PARTITION v1" then one line of vertex ids per part (blank line = empty part).
inline void write_partition(const std::vector<VertexSet>& parts, std::ostream& out) {
  out << "PARTITION v1\n";
  for (const auto& p : parts) {
    bool first = true;
    for (Vertex v : p) {
      if (!first) out << ' ';
      out << v;
      first = false;
    }
    out << '\n';
  }
}

inline std::vector<VertexSet> read_partition(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::strip_line(line) != "PARTITION v1") {
    throw GraphError(GraphErrorKind::kMalformed, "partition file must start with \"PARTITION v1\"");
  }
  std::vector<VertexSet> parts;
  while (std::getline(in, line)) {
    std::istringstream ls(detail::strip_line(line));
    std::vector<Vertex> ids;
    long long v = 0;
    while (ls >> v) {
      if (v < 0) throw GraphError(GraphErrorKind::kMalformed, "negative vertex id in partition");
      ids.push_back(static_cast<Vertex>(v));
    }
    if (!ls.eof()) throw GraphError(GraphErrorKind::kMalformed, "bad token in partition line");
    parts.emplace_back(std::move(ids));
  }
  return parts;
}

inline void store_partition(const std::vector<VertexSet>& parts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GraphError(GraphErrorKind::kIo, "cannot write " + path);
  write_partition(parts, out);
}

inline std::vector<VertexSet> load_partition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError(GraphErrorKind::kIo, "cannot open " + path);
  return read_partition(in);
}

}  // namespace subcluster
