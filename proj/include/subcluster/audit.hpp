#pragma once

// Query-complexity audit: adjacency-list queries spent per clustering query
// as n grows, and the least-squares slope of log(queries) against log(n).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "subcluster/generators.hpp"
#include "subcluster/oracle.hpp"

namespace subcluster {

struct AuditRow {
  std::size_t n = 0;
  std::uint64_t t = 0;
  std::size_t sample = 0;
  std::size_t clusters = 0;  // 0 when learning failed
  double mean_queries = 0.0;
  double outlier_fraction = 0.0;
};

struct AuditResult {
  std::vector<AuditRow> rows;
  double slope = 0.0;
};

// Slope of the least-squares line through (log x_i, log y_i).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("log-log slope needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct AuditConfig {
  std::vector<std::size_t> sizes{1024, 2048, 4096, 8192, 16384};
  std::size_t queries = 50;
  std::size_t k = 2;
  std::uint32_t d = 10;
  double inter_frac = 1e-4;
  OracleParams params;  // n-independent fields; t is re-derived per size unless set
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// For each n: plant an instance, learn, warm the core members' walks, then
// count the queries issued by `queries` which_cluster calls on distinct
// vertices.
inline AuditResult run_audit(const AuditConfig& cfg) {
  AuditResult result;
  std::vector<double> xs, ys;
  for (std::size_t n : cfg.sizes) {
    const auto inst = gen_clusterable(n, cfg.k, cfg.d, cfg.inter_frac, cfg.seed + n);
    OracleParams p = cfg.params;
    p.master_seed = cfg.seed;
    auto state = learn_core(inst.graph, p, cfg.threads);
    AuditRow row;
    row.n = n;
    row.t = state.params.t;
    row.sample = state.h.size();
    row.clusters = state.num_clusters();
    ClusteringOracle oracle(inst.graph, std::move(state), cfg.threads);
    oracle.prepare();
    inst.graph.counter().reset();
    Rng rng = Rng::stream(cfg.seed, "audit-queries", n, 0);
    std::vector<char> used(n, 0);
    std::size_t outliers = 0;
    for (std::size_t q = 0; q < std::min(cfg.queries, n); ++q) {
      Vertex v = rng.below(static_cast<std::uint32_t>(n));
      while (used[v]) v = rng.below(static_cast<std::uint32_t>(n));
      used[v] = 1;
      if (oracle.which_cluster(v).is_outlier()) ++outliers;
    }
    row.mean_queries = static_cast<double>(inst.graph.counter().value()) / static_cast<double>(cfg.queries);
    row.outlier_fraction = static_cast<double>(outliers) / static_cast<double>(cfg.queries);
    result.rows.push_back(row);
    xs.push_back(static_cast<double>(n));
    ys.push_back(row.mean_queries);
  }
  bool positive = true;
  for (double y : ys) positive = positive && y > 0.0;
  result.slope = xs.size() >= 2 && positive ? loglog_slope(xs, ys) : std::nan("");
  return result;
}

inline void write_audit_csv(const AuditResult& r, std::ostream& out) {
  out << "n,t,sample,clusters,mean_queries,outlier_fraction\n";
  for (const auto& row : r.rows) {
    out << row.n << ',' << row.t << ',' << row.sample << ',' << row.clusters << ',' << row.mean_queries << ','
        << row.outlier_fraction << '\n';
  }
  out << "slope," << r.slope << '\n';
}

}  // namespace subcluster
