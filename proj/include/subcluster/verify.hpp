#pragma once

// Exact desk-scale checks: conductances, spectra of cluster structure,
// stochastic complements and the induced chain's weighted graph, local mixing
// of walk distributions, strong-vertex census, and the outer-conductance merge
// procedure.

#include <Eigen/Dense>
#include <Eigen/LU>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "subcluster/graph.hpp"
#include "subcluster/spectral.hpp"
#include "subcluster/walks.hpp"

namespace subcluster {

inline constexpr std::size_t kExactConductanceLimit = 24;

class SingularBlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InnerMethod { kExact, kCheeger };
inline std::string to_string(InnerMethod m) { return m == InnerMethod::kExact ? "exact" : "cheeger"; }

struct InnerEstimate {
  double value = 1.0;  // exact value, or the Cheeger lower bound lambda2 / 2
  InnerMethod method = InnerMethod::kExact;
};

namespace detail {

inline Eigen::MatrixXd induced_weights(const Graph& g, const VertexSet& s) {
  const auto m = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Vertex u : g.neighbors(s[static_cast<std::size_t>(i)])) {
      auto it = std::lower_bound(s.begin(), s.end(), u);
      if (it != s.end() && *it == u) w(i, it - s.begin()) = 1.0;
    }
  }
  return w;
}

}  // namespace detail

// min over non-empty S with |S| <= m/2 of w(S, rest) / (d |S|) for a
// symmetric weight matrix on m <= 24 states (diagonal ignored). Gray-code
// enumeration; m = 1 gives 1.
inline double min_cut_ratio_exact(const Eigen::MatrixXd& w, double d) {
  const auto m = static_cast<std::size_t>(w.rows());
  if (m > kExactConductanceLimit) throw DeskLimitError("exact conductance needs at most 24 vertices");
  if (m <= 1) return 1.0;
  std::vector<double> row(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j) row[i] += w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  std::uint32_t mask = 0;
  std::size_t size = 0;
  double cut = 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::uint64_t total = 1ULL << m;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto x = static_cast<std::size_t>(std::countr_zero(step));
    double into = 0.0;
    for (std::uint32_t rest = mask & ~(1u << x); rest; rest &= rest - 1) {
      into += w(static_cast<Eigen::Index>(x), std::countr_zero(rest));
    }
    if (mask & (1u << x)) {
      mask &= ~(1u << x);
      --size;
      cut -= row[x] - 2.0 * into;
    } else {
      mask |= 1u << x;
      ++size;
      cut += row[x] - 2.0 * into;
    }
    if (2 * size <= m) best = std::min(best, std::max(0.0, cut) / (d * static_cast<double>(size)));
  }
  return best;
}

// Inner conductance of G[s] by exhaustive enumeration (|s| <= 24).
inline double inner_conductance_exact(const Graph& g, const VertexSet& s) {
  if (s.empty()) throw std::invalid_argument("inner conductance of an empty set");
  if (s.size() > kExactConductanceLimit) throw DeskLimitError("exact conductance needs at most 24 vertices");
  return min_cut_ratio_exact(detail::induced_weights(g, s), g.degree_bound());
}

// Exact for small parts, Cheeger lower bound lambda2 / 2 otherwise.
inline InnerEstimate measure_inner_weighted(const Eigen::MatrixXd& w, double d) {
  if (w.rows() <= 1) return {1.0, InnerMethod::kExact};
  if (static_cast<std::size_t>(w.rows()) <= kExactConductanceLimit) return {min_cut_ratio_exact(w, d), InnerMethod::kExact};
  const auto spec = symmetric_spectrum(weighted_laplacian(w, d), false);
  return {std::max(0.0, spec.eigenvalues[1]) / 2.0, InnerMethod::kCheeger};
}

inline InnerEstimate measure_inner(const Graph& g, const VertexSet& s) {
  if (s.empty()) throw std::invalid_argument("inner conductance of an empty set");
  if (s.size() > kDenseLimit) throw DeskLimitError("part too large for a dense eigensolve");
  return measure_inner_weighted(detail::induced_weights(g, s), g.degree_bound());
}

// ---- partitions ----

struct PartitionReport {
  std::vector<VertexSet> parts;
  std::vector<double> outer;
  std::vector<InnerEstimate> inner;  // empty unless requested
  std::size_t merges = 0;
};

inline void check_partition(const std::vector<VertexSet>& parts, std::size_t n) {
  std::vector<char> seen(n, 0);
  std::size_t covered = 0;
  for (const auto& p : parts) {
    for (Vertex v : p) {
      if (v >= n) throw std::invalid_argument("partition vertex out of range");
      if (seen[v]) throw std::invalid_argument("partition parts overlap");
      seen[v] = 1;
      ++covered;
    }
  }
  if (covered != n) throw std::invalid_argument("partition does not cover the vertex set");
}

inline PartitionReport measure_partition(const Graph& g, const std::vector<VertexSet>& parts,
                                         bool with_inner = true) {
  check_partition(parts, g.num_vertices());
  PartitionReport r;
  r.parts = parts;
  for (const auto& p : parts) {
    r.outer.push_back(p.empty() ? 0.0 : outer_conductance(g, p));
    if (with_inner) r.inner.push_back(p.empty() ? InnerEstimate{} : measure_inner(g, p));
  }
  return r;
}

struct SpectralCheck {
  std::size_t h = 0;
  double lambda_h = 0.0;       // h-th smallest eigenvalue
  double lambda_next = 0.0;    // (h+1)-th smallest, NaN when h = n
  double phi_in = 0.0;         // min over parts
  double phi_out = 0.0;        // max over parts
  InnerMethod inner_method = InnerMethod::kExact;
  bool upper_holds = false;    // lambda_h <= 2 phi_out
  bool lower_holds = false;    // lambda_{h+1} >= phi_in^2 / 2
  bool passed() const { return upper_holds && lower_holds; }
};

inline SpectralCheck check_cluster_spectral(const Graph& g, const std::vector<VertexSet>& parts,
                                            double tol = 1e-9) {
  const auto report = measure_partition(g, parts, true);
  const auto spec = laplacian_spectrum(g);
  SpectralCheck c;
  c.h = parts.size();
  if (c.h == 0) throw std::invalid_argument("empty partition");
  c.phi_in = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    c.phi_out = std::max(c.phi_out, report.outer[i]);
    if (report.inner[i].value < c.phi_in) c.phi_in = report.inner[i].value;
    if (report.inner[i].method == InnerMethod::kCheeger) c.inner_method = InnerMethod::kCheeger;
  }
  c.lambda_h = spec.eigenvalues[c.h - 1];
  c.upper_holds = c.lambda_h <= 2.0 * c.phi_out + tol;
  if (c.h < spec.eigenvalues.size()) {
    c.lambda_next = spec.eigenvalues[c.h];
    c.lower_holds = c.lambda_next >= c.phi_in * c.phi_in / 2.0 - tol;
  } else {
    c.lambda_next = std::numeric_limits<double>::quiet_NaN();
    c.lower_holds = true;
  }
  return c;
}

// ---- Markov chains ----

// Lazy walk matrix P = (I + A/d) / 2, rows are distributions.
inline Eigen::MatrixXd lazy_transition_matrix(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  if (g.num_vertices() > kDenseLimit) throw DeskLimitError("graph too large for a dense chain");
  if (g.degree_bound() == 0) return Eigen::MatrixXd::Identity(n, n);
  return Eigen::MatrixXd::Identity(n, n) - 0.5 * dense_laplacian(g);
}

inline double row_sum_deviation(const Eigen::MatrixXd& m) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) worst = std::max(worst, std::abs(m.row(i).sum() - 1.0));
  return worst;
}

inline bool is_row_stochastic(const Eigen::MatrixXd& m, double tol = 1e-12) {
  return m.minCoeff() >= -tol && row_sum_deviation(m) <= tol;
}

namespace detail {

inline std::vector<Eigen::Index> to_indices(const VertexSet& s) {
  return std::vector<Eigen::Index>(s.begin(), s.end());
}

// X solving (c I - M_B) X = rhs, with a residual check.
inline Eigen::MatrixXd solve_block(const Eigen::MatrixXd& mb, double c, const Eigen::MatrixXd& rhs,
                                   double residual_tol) {
  const Eigen::MatrixXd lhs = c * Eigen::MatrixXd::Identity(mb.rows(), mb.cols()) - mb;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
  if (!lu.isInvertible()) throw SingularBlockError("excursion block is singular");
  const Eigen::MatrixXd x = lu.solve(rhs);
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if (!x.allFinite() || (lhs * x - rhs).cwiseAbs().maxCoeff() > residual_tol * scale) {
    throw SingularBlockError("excursion block solve failed its residual check");
  }
  return x;
}

}  // namespace detail

// P' = P_D + P_1 (I - P_B)^{-1} P_2 over the states of dset (ascending).
inline Eigen::MatrixXd stochastic_complement(const Eigen::MatrixXd& p, const VertexSet& dset,
                                             double residual_tol = 1e-10) {
  const auto n = static_cast<std::size_t>(p.rows());
  if (p.rows() != p.cols()) throw std::invalid_argument("chain matrix must be square");
  if (dset.empty()) throw std::invalid_argument("stochastic complement onto an empty set");
  if (dset.ids().back() >= n) throw std::invalid_argument("state set out of range");
  const auto d_idx = detail::to_indices(dset);
  const auto b_idx = detail::to_indices(dset.complement(n));
  const Eigen::MatrixXd pd = p(d_idx, d_idx);
  if (b_idx.empty()) return pd;
  const Eigen::MatrixXd p1 = p(d_idx, b_idx);
  const Eigen::MatrixXd p2 = p(b_idx, d_idx);
  const Eigen::MatrixXd pb = p(b_idx, b_idx);
  return pd + p1 * detail::solve_block(pb, 1.0, p2, residual_tol);
}

// Weights of the graph whose lazy walk is the stochastic complement of G's
// lazy walk onto dset: W = A_D + A_1 (d I - A_B)^{-1} A_2, where A carries
// d - deg(v) loop weight. Rows sum to d and P' = (I + W/d) / 2.
inline Eigen::MatrixXd induced_chain_weights(const Graph& g, const VertexSet& dset,
                                             double residual_tol = 1e-10) {
  const std::size_t n = g.num_vertices();
  const double d = g.degree_bound();
  if (d == 0) throw std::invalid_argument("induced chain needs d >= 1");
  const Eigen::MatrixXd a = d * (Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) -
                                 dense_laplacian(g));
  const auto d_idx = detail::to_indices(dset);
  const auto b_idx = detail::to_indices(dset.complement(n));
  const Eigen::MatrixXd ad = a(d_idx, d_idx);
  if (b_idx.empty()) return ad;
  const Eigen::MatrixXd a1 = a(d_idx, b_idx);
  const Eigen::MatrixXd a2 = a(b_idx, d_idx);
  const Eigen::MatrixXd ab = a(b_idx, b_idx);
  return ad + a1 * detail::solve_block(ab, d, a2, residual_tol);
}

// Left eigenvector of P for eigenvalue 1, normalized to sum 1.
inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd m = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  m.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  return Eigen::FullPivLU<Eigen::MatrixXd>(m).solve(rhs);
}

struct ClusterQuality {
  InnerEstimate inner_graph;    // D_i inside G
  InnerEstimate inner_chain;    // D_i inside the induced chain's graph
  double outer_chain = 0.0;     // D_i against D \ D_i in the induced chain's graph
  double outer_cluster = 0.0;   // C_i = D_i + B_i in G
};

// clusters: C_1..C_h partitioning V; blocks: B_i subset of C_i (may be empty).
// D_i = C_i \ B_i, D = union of D_i.
inline std::vector<ClusterQuality> induced_cluster_quality(const Graph& g,
                                                           const std::vector<VertexSet>& clusters,
                                                           const std::vector<VertexSet>& blocks) {
  if (clusters.size() != blocks.size()) throw std::invalid_argument("one block per cluster expected");
  check_partition(clusters, g.num_vertices());
  std::vector<VertexSet> parts;
  std::vector<Vertex> all;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    std::vector<Vertex> di;
    for (Vertex v : clusters[i]) {
      if (!blocks[i].contains(v)) di.push_back(v);
    }
    for (Vertex v : blocks[i]) {
      if (!clusters[i].contains(v)) throw std::invalid_argument("block outside its cluster");
    }
    if (di.empty()) throw std::invalid_argument("cluster has no surviving part");
    all.insert(all.end(), di.begin(), di.end());
    parts.emplace_back(std::move(di));
  }
  const VertexSet dset(all);
  const Eigen::MatrixXd w = induced_chain_weights(g, dset);
  const double d = g.degree_bound();
  std::vector<ClusterQuality> out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::vector<Eigen::Index> idx;
    for (Vertex v : parts[i]) idx.push_back(std::lower_bound(dset.begin(), dset.end(), v) - dset.begin());
    std::vector<Eigen::Index> rest;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(dset.size()); ++j) {
      if (!parts[i].contains(dset[static_cast<std::size_t>(j)])) rest.push_back(j);
    }
    ClusterQuality q;
    q.inner_graph = measure_inner(g, parts[i]);
    q.inner_chain = measure_inner_weighted(w(idx, idx), d);
    q.outer_chain = rest.empty() ? 0.0 : w(idx, rest).sum() / (d * static_cast<double>(parts[i].size()));
    q.outer_cluster = outer_conductance(g, clusters[i]);
    out.push_back(q);
  }
  return out;
}

// ---- local mixing ----

enum class Kernel { kPlain, kAveraged };

// P^t by repeated squaring.
inline Eigen::MatrixXd walk_power_matrix(const Eigen::MatrixXd& p, std::uint64_t t) {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(p.rows(), p.cols());
  Eigen::MatrixXd base = p;
  for (; t; t >>= 1) {
    if (t & 1) result = result * base;
    if (t > 1) base = base * base;
  }
  return result;
}

// (1/t) sum_{l<t} P^l by binary doubling.
inline Eigen::MatrixXd walk_average_matrix(const Eigen::MatrixXd& p, std::uint64_t t) {
  if (t < 1) throw std::invalid_argument("averaged walk needs t >= 1");
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);       // sum_{l<m} P^l
  Eigen::MatrixXd pow = Eigen::MatrixXd::Identity(n, n);   // P^m
  for (int bit = 63 - std::countl_zero(t); bit >= 0; --bit) {
    sum += pow * sum;
    pow = pow * pow;
    if ((t >> bit) & 1) {
      sum += pow;
      pow = pow * p;
    }
  }
  return sum / static_cast<double>(t);
}

struct MixingRow {
  Vertex vertex = 0;
  std::size_t cluster = 0;
  double tv = 0.0;
};

// TV between each vertex's walk distribution and uniform on its own part.
inline std::vector<MixingRow> mixing_profile(const Graph& g, const std::vector<VertexSet>& parts,
                                             std::uint64_t t, Kernel kernel) {
  check_partition(parts, g.num_vertices());
  const Eigen::MatrixXd p = lazy_transition_matrix(g);
  const Eigen::MatrixXd m = kernel == Kernel::kPlain ? walk_power_matrix(p, t) : walk_average_matrix(p, t);
  std::vector<MixingRow> rows;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double mass = 1.0 / static_cast<double>(parts[i].size());
    for (Vertex v : parts[i]) {
      double s = 0.0;
      for (Eigen::Index w = 0; w < m.cols(); ++w) {
        const double target = parts[i].contains(static_cast<Vertex>(w)) ? mass : 0.0;
        s += std::abs(m(v, w) - target);
      }
      rows.push_back({v, i, 0.5 * s});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const MixingRow& a, const MixingRow& b) { return a.vertex < b.vertex; });
  return rows;
}

// Fraction of the vertices of part `cluster` with TV <= threshold.
inline double mixing_fraction(const std::vector<MixingRow>& rows, std::size_t cluster, double threshold) {
  std::size_t total = 0, good = 0;
  for (const auto& r : rows) {
    if (r.cluster != cluster) continue;
    ++total;
    if (r.tv <= threshold) ++good;
  }
  return total == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(total);
}

inline void write_mixing_csv(const std::vector<MixingRow>& rows, std::ostream& out) {
  out << "vertex,cluster,tv_distance\n";
  for (const auto& r : rows) out << r.vertex << ',' << r.cluster << ',' << r.tv << '\n';
}

// Fraction of v in c with TV(pbar_v^t, U_c) <= kappa.
inline double strong_census(const Graph& g, const VertexSet& c, std::uint64_t t, double kappa) {
  if (c.empty()) throw std::invalid_argument("census over an empty set");
  const auto uniform = WalkDistribution::uniform_on(g.num_vertices(), c);
  std::size_t strong = 0;
  for (Vertex v : c) {
    if (total_variation(exact_pbar(g, v, t), uniform) <= kappa) ++strong;
  }
  return static_cast<double>(strong) / static_cast<double>(c.size());
}

// ---- merging for outer conductance ----

// While some i != j has |C_i| <= |C_j| and |E(C_i, C_j)| >= nu d |C_i|,
// merge them (lexicographically first pair). Each merge removes one part.
inline PartitionReport merge_for_outer(const Graph& gp, std::vector<VertexSet> parts, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("merge threshold nu must be > 0");
  check_partition(parts, gp.num_vertices());
  std::erase_if(parts, [](const VertexSet& p) { return p.empty(); });
  const double d = gp.degree_bound();
  std::size_t merges = 0;
  for (;;) {
    const std::size_t h = parts.size();
    std::vector<std::size_t> label(gp.num_vertices());
    for (std::size_t i = 0; i < h; ++i) {
      for (Vertex v : parts[i]) label[v] = i;
    }
    std::vector<std::uint64_t> between(h * h, 0);
    for (auto [u, v] : gp.edges()) {
      if (label[u] != label[v]) {
        ++between[label[u] * h + label[v]];
        ++between[label[v] * h + label[u]];
      }
    }
    bool merged = false;
    for (std::size_t i = 0; i < h && !merged; ++i) {
      for (std::size_t j = 0; j < h && !merged; ++j) {
        if (i == j || parts[i].size() > parts[j].size()) continue;
        if (static_cast<double>(between[i * h + j]) >= nu * d * static_cast<double>(parts[i].size())) {
          std::vector<Vertex> joined(parts[i].begin(), parts[i].end());
          joined.insert(joined.end(), parts[j].begin(), parts[j].end());
          const std::size_t keep = std::min(i, j), drop = std::max(i, j);
          parts[keep] = VertexSet(std::move(joined));
          parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(drop));
          merged = true;
        }
      }
    }
    if (!merged) break;
    ++merges;
  }
  PartitionReport r = measure_partition(gp, parts, false);
  r.merges = merges;
  return r;
}

inline void write_partition_report(const PartitionReport& r, std::ostream& out) {
  out << "part,size,outer_conductance,inner_conductance,inner_method\n";
  for (std::size_t i = 0; i < r.parts.size(); ++i) {
    out << i << ',' << r.parts[i].size() << ',' << r.outer[i];
    if (i < r.inner.size()) {
      out << ',' << r.inner[i].value << ',' << to_string(r.inner[i].method);
    } else {
      out << ",,";
    }
    out << '\n';
  }
  out << "merges," << r.merges << '\n';
}

}  // namespace subcluster
