#pragma once

// Reduced collision probabilities.
//
// rcp_theta(u, v) = sum over w light for both u and v of pbar_u(w) pbar_v(w),
// where w is light for v when pbar_v^t(w) <= (1 - theta) / sqrt(n).
//
// estimate_rcp is the sampled estimator: C ln n independent trials, each one
// finding the empirically light set F_u (FindSet), collecting x walks that end
// in F_u and x walks that end in F_v, and counting cross collisions A. A trial
// fails when more than 20x walks were needed on either side. The result is the
// median of A / x^2 over successful trials, or Abort without a majority.
//
// Walks for one endpoint are drawn from streams keyed by (seed, vertex, trial),
// never by the partner vertex, so a vertex's walks can be generated once
// (a WalkBundle) and paired against many partners. When u == v the second
// side uses a disjoint stream so the two walk sets stay independent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subcluster/graph.hpp"
#include "subcluster/rng.hpp"
#include "subcluster/walks.hpp"

namespace subcluster {

struct RcpParams {
  double theta = 0.1;
  double delta = 0.1;
  std::uint64_t t = 1;
  double c_big = 4.0;
  std::uint64_t x = 1;

  static constexpr std::uint64_t kPracticalXCap = 1'000'000;

  // x = ceil(sqrt(n) / delta^2), optionally capped.
  static RcpParams derive(std::size_t n, double theta, double delta, std::uint64_t t,
                          double c_big = 4.0, std::optional<std::uint64_t> x_cap = kPracticalXCap) {
    RcpParams p;
    p.theta = theta;
    p.delta = delta;
    p.t = t;
    p.c_big = c_big;
    double x = std::ceil(std::sqrt(static_cast<double>(n)) / (delta * delta));
    if (x_cap && x > static_cast<double>(*x_cap)) x = static_cast<double>(*x_cap);
    p.x = static_cast<std::uint64_t>(std::max(1.0, x));
    p.validate();
    return p;
  }

  void validate() const {
    if (!(theta >= 0.0 && theta < 0.5)) throw std::invalid_argument("rcp: theta must lie in [0, 1/2)");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("rcp: delta must lie in (0, 1)");
    if (t < 1) throw std::invalid_argument("rcp: walk length t must be >= 1");
    if (!(c_big >= 1.0)) throw std::invalid_argument("rcp: C must be >= 1");
    if (x < 1) throw std::invalid_argument("rcp: x must be >= 1");
  }

  // Natural logarithm throughout; n = 1 still runs one trial.
  std::uint64_t trials(std::size_t n) const {
    return std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::ceil(c_big * std::log(static_cast<double>(n)))));
  }
  std::uint64_t find_set_walks(std::size_t n) const {
    const double nn = static_cast<double>(n);
    return std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::ceil(c_big * std::sqrt(nn) * std::log(nn))));
  }
  // A vertex hit by more than this many FindSet walks is heavy.
  double heavy_hits(std::size_t n) const {
    return c_big * (1.0 - theta / 2.0) * std::log(static_cast<double>(n));
  }
};

class RcpOutcome {
 public:
  static RcpOutcome estimate(double value) { return RcpOutcome(false, value); }
  static RcpOutcome abort() { return RcpOutcome(true, 0.0); }

  bool aborted() const { return aborted_; }
  // Precondition: !aborted().
  double value() const {
    if (aborted_) throw std::logic_error("RcpOutcome::value on an aborted estimate");
    return value_;
  }

  friend bool operator==(const RcpOutcome&, const RcpOutcome&) = default;

 private:
  RcpOutcome(bool aborted, double value) : aborted_(aborted), value_(value) {}
  bool aborted_;
  double value_;
};

namespace detail {

// Sorted heavy set of the empirical endpoint histogram.
inline std::vector<Vertex> heavy_vertices(const Graph& g, Vertex u, const RcpParams& p, Rng& rng,
                                          std::uint64_t& queries) {
  const std::size_t n = g.num_vertices();
  const std::uint64_t walks = p.find_set_walks(n);
  const auto kind = WalkKind::uniform_averaging(p.t);
  std::vector<Vertex> ends;
  ends.reserve(walks);
  for (std::uint64_t i = 0; i < walks; ++i) {
    ends.push_back(lazy_walk(g, u, draw_length(kind, rng), rng, queries));
  }
  std::sort(ends.begin(), ends.end());
  const double limit = p.heavy_hits(n);
  std::vector<Vertex> heavy;
  for (std::size_t i = 0; i < ends.size();) {
    std::size_t j = i;
    while (j < ends.size() && ends[j] == ends[i]) ++j;
    if (static_cast<double>(j - i) > limit) heavy.push_back(ends[i]);
    i = j;
  }
  return heavy;
}

}  // namespace detail

// F_u: vertices hit at most C(1 - theta/2) ln n times by C sqrt(n) ln n
// uniform-averaging walks from u (vertices never hit included).
inline VertexSet find_set(const Graph& g, Vertex u, double theta, std::uint64_t t,
                          std::uint64_t seed, double c_big = 4.0) {
  if (u >= g.num_vertices()) throw std::out_of_range("find_set: vertex out of range");
  RcpParams p;
  p.theta = theta;
  p.t = t;
  p.c_big = c_big;
  p.validate();
  Rng rng = Rng::stream(seed, "rcp-findset", u, 0);
  std::uint64_t queries = 0;
  auto heavy = detail::heavy_vertices(g, u, p, rng, queries);
  g.counter().add(queries);
  return VertexSet(std::move(heavy)).complement(g.num_vertices());
}

// Walk endpoints of one vertex for every trial of the estimator.
struct WalkBundle {
  struct Trial {
    bool ok = false;
    std::vector<Vertex> endpoints;  // sorted; exactly x entries when ok
  };

  Vertex source = 0;
  std::vector<Trial> trials;
  std::uint64_t queries = 0;  // adjacency queries spent building the bundle
};

// side 0 is the regular stream of u; side 1 is the independent partner
// stream used when u is paired with itself.
inline WalkBundle collect_bundle(const Graph& g, Vertex u, const RcpParams& p, std::uint64_t seed,
                                 std::uint32_t side = 0) {
  if (u >= g.num_vertices()) throw std::out_of_range("collect_bundle: vertex out of range");
  const std::size_t n = g.num_vertices();
  const auto kind = WalkKind::uniform_averaging(p.t);
  WalkBundle bundle;
  bundle.source = u;
  bundle.trials.resize(p.trials(n));
  for (std::uint64_t r = 0; r < bundle.trials.size(); ++r) {
    Rng find_rng = Rng::stream(seed, "rcp-findset", u, 2 * r + side + 1);
    const auto heavy = detail::heavy_vertices(g, u, p, find_rng, bundle.queries);
    Rng walk_rng = Rng::stream(seed, "rcp-collect", u, 2 * r + side + 1);
    auto& trial = bundle.trials[r];
    trial.endpoints.reserve(p.x);
    const std::uint64_t budget = 20 * p.x;
    for (std::uint64_t attempt = 0; attempt < budget && trial.endpoints.size() < p.x; ++attempt) {
      const Vertex end = lazy_walk(g, u, draw_length(kind, walk_rng), walk_rng, bundle.queries);
      if (!std::binary_search(heavy.begin(), heavy.end(), end)) trial.endpoints.push_back(end);
    }
    trial.ok = trial.endpoints.size() == p.x;
    if (trial.ok) {
      std::sort(trial.endpoints.begin(), trial.endpoints.end());
    } else {
      trial.endpoints = {};
    }
  }
  g.counter().add(bundle.queries);
  return bundle;
}

// Number of (walk from a, walk from b) pairs sharing an endpoint.
inline std::uint64_t count_collisions(const std::vector<Vertex>& a, const std::vector<Vertex>& b) {
  std::uint64_t total = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      const Vertex w = a[i];
      std::uint64_t ca = 0, cb = 0;
      while (i < a.size() && a[i] == w) ++i, ++ca;
      while (j < b.size() && b[j] == w) ++j, ++cb;
      total += ca * cb;
    }
  }
  return total;
}

// Median-of-successes rule. Lower median for an even count.
inline RcpOutcome median_outcome(std::vector<double> successes, std::size_t trials) {
  if (2 * successes.size() <= trials) return RcpOutcome::abort();
  const std::size_t mid = (successes.size() - 1) / 2;
  std::nth_element(successes.begin(), successes.begin() + static_cast<std::ptrdiff_t>(mid),
                   successes.end());
  return RcpOutcome::estimate(successes[mid]);
}

inline RcpOutcome combine_bundles(const WalkBundle& a, const WalkBundle& b, const RcpParams& p) {
  if (a.trials.size() != b.trials.size()) throw std::invalid_argument("bundle trial counts differ");
  const double x2 = static_cast<double>(p.x) * static_cast<double>(p.x);
  std::vector<double> successes;
  for (std::size_t r = 0; r < a.trials.size(); ++r) {
    if (!a.trials[r].ok || !b.trials[r].ok) continue;
    successes.push_back(static_cast<double>(count_collisions(a.trials[r].endpoints,
                                                             b.trials[r].endpoints)) /
                        x2);
  }
  return median_outcome(std::move(successes), a.trials.size());
}

inline RcpOutcome estimate_rcp(const Graph& g, Vertex u, Vertex v, const RcpParams& p,
                               std::uint64_t seed) {
  p.validate();
  const auto bu = collect_bundle(g, u, p, seed, 0);
  const auto bv = collect_bundle(g, v, p, seed, u == v ? 1 : 0);
  return combine_bundles(bu, bv, p);
}

// Exact rcp from precomputed pbar vectors.
inline double exact_rcp(const WalkDistribution& pu, const WalkDistribution& pv, double theta) {
  const double limit = (1.0 - theta) / std::sqrt(static_cast<double>(pu.size()));
  double s = 0.0;
  for (std::size_t w = 0; w < pu.size(); ++w) {
    if (pu[w] <= limit && pv[w] <= limit) s += pu[w] * pv[w];
  }
  return s;
}

inline double exact_rcp(const Graph& g, Vertex u, Vertex v, double theta, std::uint64_t t) {
  const auto pu = exact_pbar(g, u, t);
  if (u == v) return exact_rcp(pu, pu, theta);
  return exact_rcp(pu, exact_pbar(g, v, t), theta);
}

}  // namespace subcluster
