#pragma once

// Robust clustering oracle.
//
// Learning samples a vertex set S, estimates rcp for every pair of S to build
// a weighted similarity graph H, and extracts cores: large cliques of H whose
// edges all clear a level-dependent weight threshold. A query vertex belongs
// to core i when its rcp estimate against every member of core i clears that
// core's threshold, and to no other core; otherwise it is an outlier.
//
// Level j uses tau_j = 3 sqrt(6 eps / phi) (1 + kappa/3)^j for j = 0..J,
// J = max{j : tau_j <= 1}. At level j the weight threshold is
// (1 - kappa) / (tau_j n) and the core size floor is (1 - kappa) tau_j |S|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "subcluster/graph.hpp"
#include "subcluster/parallel.hpp"
#include "subcluster/rcp.hpp"
#include "subcluster/rng.hpp"
#include "subcluster/walks.hpp"

namespace subcluster {

enum class Profile { kPaper, kPractical };
enum class RcpMode { kSampled, kExact };

inline Profile parse_profile(const std::string& s) {
  if (s == "paper") return Profile::kPaper;
  if (s == "practical") return Profile::kPractical;
  throw std::invalid_argument("unknown profile: " + s);
}
inline std::string to_string(Profile p) { return p == Profile::kPaper ? "paper" : "practical"; }

inline RcpMode parse_rcp_mode(const std::string& s) {
  if (s == "sampled") return RcpMode::kSampled;
  if (s == "exact") return RcpMode::kExact;
  throw std::invalid_argument("unknown rcp mode: " + s);
}
inline std::string to_string(RcpMode m) { return m == RcpMode::kSampled ? "sampled" : "exact"; }

struct OracleParams {
  std::size_t k = 2;
  double phi = 0.5;
  double eps = 1e-3;
  double kappa = 0.05;
  double theta0 = 0.1;
  double delta0 = 0.1;
  std::uint64_t t = 0;  // 0: derived from the profile
  double c_sample = 0.05;
  double c_big = 4.0;        // C of the rcp estimator
  double beta = 20.0;        // practical walk-length constant
  double tau_growth = 3.0;   // ladder ratio is 1 + kappa / tau_growth
  std::size_t sample_min = 40;
  std::size_t sample_max = 400;
  std::uint64_t x_cap = RcpParams::kPracticalXCap;
  Profile profile = Profile::kPractical;
  RcpMode rcp_mode = RcpMode::kSampled;
  std::uint64_t master_seed = 0;

  // Filled by resolve().
  std::size_t n = 0;
  std::vector<double> tau;

  static OracleParams practical() { return OracleParams{}; }

  // Paper constants: kappa = 100 delta0^2, t = 960 ln n / (kappa phi^2),
  // uncapped x, no sample clamping.
  static OracleParams paper(double delta0 = 0.02) {
    OracleParams p;
    p.profile = Profile::kPaper;
    p.delta0 = delta0;
    p.kappa = 100.0 * delta0 * delta0;
    p.c_sample = 1.0;
    return p;
  }

  void validate() const {
    if (k < 1) throw std::invalid_argument("oracle: k must be >= 1");
    if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("oracle: phi must lie in (0, 1)");
    if (!(eps > 0.0)) throw std::invalid_argument("oracle: eps must be > 0");
    if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("oracle: kappa must lie in (0, 1)");
    if (!(theta0 >= 0.0 && theta0 < 0.5)) throw std::invalid_argument("oracle: theta0 must lie in [0, 1/2)");
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw std::invalid_argument("oracle: delta0 must lie in (0, 1)");
    if (!(c_sample > 0.0)) throw std::invalid_argument("oracle: c_sample must be > 0");
    if (!(c_big >= 1.0)) throw std::invalid_argument("oracle: C must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("oracle: beta must be > 0");
    if (!(tau_growth > 0.0)) throw std::invalid_argument("oracle: tau growth must be > 0");
    if (sample_min < 1 || sample_min > sample_max) throw std::invalid_argument("oracle: bad sample clamp");
    if (profile == Profile::kPaper && std::abs(kappa - 100.0 * delta0 * delta0) > 1e-12) {
      throw std::invalid_argument("oracle: paper profile requires kappa = 100 delta0^2");
    }
  }

  // Derives t (unless set) and the tau ladder for a graph on n vertices.
  void resolve(std::size_t num_vertices) {
    validate();
    if (num_vertices < 2) throw std::invalid_argument("oracle: graph needs at least 2 vertices");
    n = num_vertices;
    const double ln_n = std::log(static_cast<double>(n));
    if (t == 0) {
      const double raw = profile == Profile::kPaper ? 960.0 * ln_n / (kappa * phi * phi)
                                                    : beta * ln_n / (phi * phi);
      t = static_cast<std::uint64_t>(std::max(1.0, std::ceil(raw)));
    }
    tau.clear();
    const double ratio = 1.0 + kappa / tau_growth;
    for (double tj = 3.0 * std::sqrt(6.0 * eps / phi); tj <= 1.0; tj *= ratio) tau.push_back(tj);
  }

  bool ladder_empty() const { return tau.empty(); }
  std::size_t levels() const { return tau.size(); }  // J + 1

  // Paper profile only: learning refuses noise above phi kappa^2 / 100.
  bool noise_abort() const { return profile == Profile::kPaper && eps > phi * kappa * kappa / 100.0; }

  // Number of draws (with replacement) for S. ln k is taken at k >= 2 so
  // that k = 1 still samples.
  std::size_t sample_draws() const {
    const double kk = static_cast<double>(k);
    const double raw = c_sample * kk * kk * std::log(std::max(kk, 2.0)) *
                       std::log(static_cast<double>(n)) / std::sqrt(eps / phi);
    double m = std::ceil(raw);
    if (profile == Profile::kPractical) {
      m = std::clamp(m, static_cast<double>(sample_min), static_cast<double>(sample_max));
    }
    return static_cast<std::size_t>(std::max(1.0, m));
  }

  RcpParams rcp() const {
    std::optional<std::uint64_t> cap;
    if (profile == Profile::kPractical) cap = x_cap;
    return RcpParams::derive(n, theta0, delta0, t, c_big, cap);
  }

  double weight_threshold(std::size_t level) const {
    return (1.0 - kappa) / (tau.at(level) * static_cast<double>(n));
  }
  double size_floor(std::size_t level, std::size_t sample_size) const {
    return (1.0 - kappa) * tau.at(level) * static_cast<double>(sample_size);
  }
};

// Weighted graph on the sample; an absent edge means the estimate aborted.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  explicit SimilarityGraph(std::vector<Vertex> sample)
      : sample_(std::move(sample)),
        w_(sample_.size() * sample_.size(), std::numeric_limits<double>::quiet_NaN()) {}

  std::size_t size() const { return sample_.size(); }
  const std::vector<Vertex>& sample() const { return sample_; }

  std::optional<std::size_t> index_of(Vertex v) const {
    auto it = std::lower_bound(sample_.begin(), sample_.end(), v);
    if (it == sample_.end() || *it != v) return std::nullopt;
    return static_cast<std::size_t>(it - sample_.begin());
  }

  bool has_edge(std::size_t i, std::size_t j) const { return i != j && !std::isnan(w_[i * size() + j]); }
  double weight(std::size_t i, std::size_t j) const { return w_[i * size() + j]; }

  void set_weight(std::size_t i, std::size_t j, double w) {
    if (i == j) throw std::invalid_argument("similarity graph has no self-edges");
    if (!(w >= 0.0)) throw std::invalid_argument("similarity weight must be >= 0");
    w_[i * size() + j] = w;
    w_[j * size() + i] = w;
  }

  struct Edge {
    Vertex u, v;
    double weight;
  };
  // Edges with u < v in sample order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = i + 1; j < size(); ++j) {
        if (has_edge(i, j)) out.push_back({sample_[i], sample_[j], weight(i, j)});
      }
    }
    return out;
  }

 private:
  std::vector<Vertex> sample_;
  std::vector<double> w_;
};

struct Core {
  std::vector<Vertex> members;  // sorted vertex ids
  std::size_t level = 0;

  friend bool operator==(const Core&, const Core&) = default;
};

class ClusterAnswer {
 public:
  static ClusterAnswer outlier() { return ClusterAnswer(0); }
  // 1-based cluster index.
  static ClusterAnswer cluster(std::size_t index) {
    if (index == 0) throw std::invalid_argument("cluster index is 1-based");
    return ClusterAnswer(index);
  }

  bool is_outlier() const { return index_ == 0; }
  std::size_t index() const {
    if (index_ == 0) throw std::logic_error("outlier has no cluster index");
    return index_;
  }
  std::string to_string() const { return is_outlier() ? "OUTLIER" : std::to_string(index_); }

  friend bool operator==(const ClusterAnswer&, const ClusterAnswer&) = default;

 private:
  explicit ClusterAnswer(std::size_t index) : index_(index) {}
  std::size_t index_;
};

struct OracleState {
  OracleParams params;
  std::string graph_path;  // recorded for replay; may be empty
  SimilarityGraph h;
  std::vector<Core> cores;
  bool failed = false;
  std::string failure;

  std::size_t num_clusters() const { return failed ? 0 : cores.size(); }
};

// Greedy cores of H, levels ascending. Returns nullopt on 0 or > k cores.
inline std::optional<std::vector<Core>> find_core(const SimilarityGraph& h, const OracleParams& p) {
  const std::size_t s = h.size();
  std::vector<char> alive(s * s, 0);  // F: edges not yet removed
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) alive[i * s + j] = h.has_edge(i, j) ? 1 : 0;
  }
  std::vector<char> in_core(s, 0);
  std::vector<Core> cores;
  for (std::size_t level = 0; level < p.levels(); ++level) {
    const double threshold = p.weight_threshold(level);
    const double floor = p.size_floor(level, s);
    auto in_level = [&](std::size_t i, std::size_t j) {
      return alive[i * s + j] && h.weight(i, j) >= threshold;
    };
    for (std::size_t v = 0; v < s; ++v) {
      if (in_core[v]) continue;
      std::vector<std::size_t> clique{v};
      for (std::size_t u = 0; u < s; ++u) {
        if (u == v || !in_level(v, u)) continue;
        bool joins = true;
        for (std::size_t m : clique) {
          if (m != v && !in_level(m, u)) {
            joins = false;
            break;
          }
        }
        if (joins) clique.push_back(u);
      }
      if (static_cast<double>(clique.size()) < floor) continue;
      Core core;
      core.level = level;
      for (std::size_t m : clique) {
        core.members.push_back(h.sample()[m]);
        in_core[m] = 1;
        for (std::size_t x = 0; x < s; ++x) alive[m * s + x] = alive[x * s + m] = 0;
      }
      std::sort(core.members.begin(), core.members.end());
      cores.push_back(std::move(core));
      if (cores.size() > p.k) return std::nullopt;
    }
  }
  if (cores.empty()) return std::nullopt;
  return cores;
}

namespace detail {

inline std::uint64_t learn_seed(std::uint64_t master) { return derive_seed(master, tag_hash("learn"), 0, 0); }
inline std::uint64_t query_seed(std::uint64_t master, Vertex u) {
  return derive_seed(master, tag_hash("query"), u, 0);
}

// Sum over b's endpoints of a's endpoint histogram, per trial; the median rule
// then turns the per-trial counts into an outcome.
inline RcpOutcome combine_with_histogram(const std::vector<std::vector<std::uint32_t>>& hist_a,
                                         const WalkBundle& a, const WalkBundle& b,
                                         const RcpParams& p) {
  const double x2 = static_cast<double>(p.x) * static_cast<double>(p.x);
  std::vector<double> successes;
  for (std::size_t r = 0; r < a.trials.size(); ++r) {
    if (!a.trials[r].ok || !b.trials[r].ok) continue;
    std::uint64_t total = 0;
    for (Vertex e : b.trials[r].endpoints) total += hist_a[r][e];
    successes.push_back(static_cast<double>(total) / x2);
  }
  return median_outcome(std::move(successes), a.trials.size());
}

}  // namespace detail

// Preprocessing. `threads` only affects speed.
inline OracleState learn_core(const Graph& g, OracleParams params, unsigned threads = 1,
                              std::string graph_path = {}) {
  params.resolve(g.num_vertices());
  OracleState state;
  state.params = params;
  state.graph_path = std::move(graph_path);
  if (params.noise_abort()) {
    state.failed = true;
    state.failure = "noise above phi kappa^2 / 100";
    return state;
  }
  if (params.ladder_empty()) {
    state.failed = true;
    state.failure = "tau ladder is empty (3 sqrt(6 eps / phi) > 1)";
    return state;
  }

  const std::size_t n = g.num_vertices();
  std::vector<Vertex> sample;
  const std::size_t draws = params.sample_draws();
  if (draws >= n) {
    for (Vertex v = 0; v < n; ++v) sample.push_back(v);
  } else {
    Rng rng = Rng::stream(params.master_seed, "sample", 0, 0);
    for (std::size_t i = 0; i < draws; ++i) sample.push_back(rng.below(static_cast<std::uint32_t>(n)));
    std::sort(sample.begin(), sample.end());
    sample.erase(std::unique(sample.begin(), sample.end()), sample.end());
  }
  SimilarityGraph h(sample);
  const std::size_t s = sample.size();

  if (params.rcp_mode == RcpMode::kExact) {
    std::vector<WalkDistribution> pbar(s);
    parallel_for(s, threads, [&](std::size_t i) { pbar[i] = exact_pbar(g, sample[i], params.t); });
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = i + 1; j < s; ++j) h.set_weight(i, j, exact_rcp(pbar[i], pbar[j], params.theta0));
    }
  } else {
    const RcpParams rp = params.rcp();
    const std::uint64_t seed = detail::learn_seed(params.master_seed);
    std::vector<WalkBundle> bundles(s);
    parallel_for(s, threads, [&](std::size_t i) { bundles[i] = collect_bundle(g, sample[i], rp, seed); });
    std::vector<RcpOutcome> row(s * s, RcpOutcome::abort());
    parallel_for(s, threads, [&](std::size_t i) {
      std::vector<std::vector<std::uint32_t>> hist(bundles[i].trials.size());
      for (std::size_t r = 0; r < hist.size(); ++r) {
        if (!bundles[i].trials[r].ok) continue;
        hist[r].assign(n, 0);
        for (Vertex e : bundles[i].trials[r].endpoints) ++hist[r][e];
      }
      for (std::size_t j = i + 1; j < s; ++j) {
        row[i * s + j] = detail::combine_with_histogram(hist, bundles[i], bundles[j], rp);
      }
    });
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = i + 1; j < s; ++j) {
        if (!row[i * s + j].aborted()) h.set_weight(i, j, row[i * s + j].value());
      }
    }
  }
  state.h = std::move(h);

  auto cores = find_core(state.h, params);
  if (!cores) {
    state.failed = true;
    state.failure = "core extraction found no cores or more than k";
    return state;
  }
  state.cores = std::move(*cores);
  return state;
}

// Query phase over a learned state. Answers are memoized per vertex and
// depend only on (graph, state, vertex).
class ClusteringOracle {
 public:
  ClusteringOracle(const Graph& g, OracleState state, unsigned threads = 1)
      : g_(g), state_(std::move(state)), threads_(threads) {
    if (!state_.failed) {
      if (state_.params.n != g.num_vertices()) throw std::invalid_argument("oracle state was learned on a different graph size");
      rcp_ = state_.params.rcp();
    }
  }

  const OracleState& state() const { return state_; }
  const Graph& graph() const { return g_; }

  // Builds the core members' walk data up front so that later queries only
  // pay for the query vertex.
  void prepare() {
    std::call_once(prepared_, [this] { build_member_data(); });
  }

  ClusterAnswer check_core(Vertex u) {
    if (u >= g_.num_vertices()) throw std::out_of_range("query vertex out of range");
    if (state_.failed) return ClusterAnswer::outlier();
    {
      std::lock_guard lock(memo_mutex_);
      if (auto it = memo_.find(u); it != memo_.end()) return it->second;
    }
    prepare();
    const auto answer = compute(u);
    std::lock_guard lock(memo_mutex_);
    return memo_.emplace(u, answer).first->second;
  }

  bool is_outlier(Vertex w) { return check_core(w).is_outlier(); }
  ClusterAnswer which_cluster(Vertex w) { return check_core(w); }
  bool same_cluster(Vertex x, Vertex y) {
    const auto a = check_core(x);
    const auto b = check_core(y);
    return !a.is_outlier() && a == b;
  }

  std::size_t memo_size() const {
    std::lock_guard lock(memo_mutex_);
    return memo_.size();
  }

 private:
  void build_member_data() {
    if (state_.failed) return;
    std::vector<Vertex> members;
    for (const auto& c : state_.cores) members.insert(members.end(), c.members.begin(), c.members.end());
    if (state_.params.rcp_mode == RcpMode::kExact) {
      std::vector<WalkDistribution> pb(members.size());
      parallel_for(members.size(), threads_,
                   [&](std::size_t i) { pb[i] = exact_pbar(g_, members[i], state_.params.t); });
      for (std::size_t i = 0; i < members.size(); ++i) member_pbar_.emplace(members[i], std::move(pb[i]));
    } else {
      const std::uint64_t seed = detail::learn_seed(state_.params.master_seed);
      std::vector<WalkBundle> bs(members.size());
      parallel_for(members.size(), threads_,
                   [&](std::size_t i) { bs[i] = collect_bundle(g_, members[i], rcp_, seed); });
      for (std::size_t i = 0; i < members.size(); ++i) member_bundles_.emplace(members[i], std::move(bs[i]));
    }
  }

  ClusterAnswer compute(Vertex u) const {
    const auto& p = state_.params;
    std::vector<char> matches(state_.cores.size(), 0);
    if (p.rcp_mode == RcpMode::kExact) {
      const auto pu = exact_pbar(g_, u, p.t);
      for (std::size_t i = 0; i < state_.cores.size(); ++i) {
        const double thr = p.weight_threshold(state_.cores[i].level);
        bool all = true;
        for (Vertex v : state_.cores[i].members) {
          if (exact_rcp(pu, member_pbar_.at(v), p.theta0) < thr) {
            all = false;
            break;
          }
        }
        matches[i] = all;
      }
    } else {
      const auto bu = collect_bundle(g_, u, rcp_, detail::query_seed(p.master_seed, u));
      std::vector<std::vector<std::uint32_t>> hist(bu.trials.size());
      for (std::size_t r = 0; r < hist.size(); ++r) {
        if (!bu.trials[r].ok) continue;
        hist[r].assign(g_.num_vertices(), 0);
        for (Vertex e : bu.trials[r].endpoints) ++hist[r][e];
      }
      for (std::size_t i = 0; i < state_.cores.size(); ++i) {
        const double thr = p.weight_threshold(state_.cores[i].level);
        bool all = true;
        for (Vertex v : state_.cores[i].members) {
          const auto est = detail::combine_with_histogram(hist, bu, member_bundles_.at(v), rcp_);
          if (est.aborted() || est.value() < thr) {
            all = false;
            break;
          }
        }
        matches[i] = all;
      }
    }
    std::size_t found = 0, which = 0;
    for (std::size_t i = 0; i < matches.size(); ++i) {
      if (matches[i]) {
        ++found;
        which = i;
      }
    }
    return found == 1 ? ClusterAnswer::cluster(which + 1) : ClusterAnswer::outlier();
  }

  const Graph& g_;
  OracleState state_;
  unsigned threads_;
  RcpParams rcp_;
  std::once_flag prepared_;
  std::map<Vertex, WalkBundle> member_bundles_;
  std::map<Vertex, WalkDistribution> member_pbar_;
  mutable std::mutex memo_mutex_;
  std::unordered_map<Vertex, ClusterAnswer> memo_;
};

// ---- state files ----

inline void write_state(const OracleState& st, std::ostream& out) {
  const auto& p = st.params;
  auto real = [](double x) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
  };
  out << "SUBCLUSTER-ORACLE v1\n";
  out << "PARAMS\n";
  out << "graph " << (st.graph_path.empty() ? "-" : st.graph_path) << '\n';
  out << "n " << p.n << '\n';
  out << "k " << p.k << '\n';
  out << "phi " << real(p.phi) << '\n';
  out << "eps " << real(p.eps) << '\n';
  out << "kappa " << real(p.kappa) << '\n';
  out << "theta0 " << real(p.theta0) << '\n';
  out << "delta0 " << real(p.delta0) << '\n';
  out << "t " << p.t << '\n';
  out << "c_sample " << real(p.c_sample) << '\n';
  out << "c_big " << real(p.c_big) << '\n';
  out << "beta " << real(p.beta) << '\n';
  out << "tau_growth " << real(p.tau_growth) << '\n';
  out << "sample_min " << p.sample_min << '\n';
  out << "sample_max " << p.sample_max << '\n';
  out << "x_cap " << p.x_cap << '\n';
  out << "profile " << to_string(p.profile) << '\n';
  out << "rcp_mode " << to_string(p.rcp_mode) << '\n';
  out << "status " << (st.failed ? "failed" : "ok") << '\n';
  out << "SAMPLE " << st.h.size() << '\n';
  for (std::size_t i = 0; i < st.h.size(); ++i) out << (i ? " " : "") << st.h.sample()[i];
  out << '\n';
  const auto edges = st.h.edges();
  out << "EDGES " << edges.size() << '\n';
  for (const auto& e : edges) out << e.u << ' ' << e.v << ' ' << real(e.weight) << '\n';
  out << "CORES " << st.cores.size() << '\n';
  for (const auto& c : st.cores) {
    out << c.level;
    for (Vertex v : c.members) out << ' ' << v;
    out << '\n';
  }
  out << "SEED\n" << p.master_seed << '\n';
}

inline OracleState read_state(std::istream& in) {
  auto fail = [](const std::string& why) -> void {
    throw GraphError(GraphErrorKind::kMalformed, "oracle state: " + why);
  };
  std::string line;
  if (!std::getline(in, line) || line != "SUBCLUSTER-ORACLE v1") fail("missing header");
  if (!std::getline(in, line) || line != "PARAMS") fail("missing PARAMS");
  OracleState st;
  auto& p = st.params;
  std::map<std::string, std::string> kv;
  while (std::getline(in, line) && line.rfind("SAMPLE", 0) != 0) {
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key >> value)) fail("bad PARAMS line");
    kv[key] = value;
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw GraphError(GraphErrorKind::kMalformed, "oracle state: missing " + key);
    return it->second;
  };
  try {
    st.graph_path = get("graph") == "-" ? "" : get("graph");
    p.k = std::stoull(get("k"));
    p.phi = std::stod(get("phi"));
    p.eps = std::stod(get("eps"));
    p.kappa = std::stod(get("kappa"));
    p.theta0 = std::stod(get("theta0"));
    p.delta0 = std::stod(get("delta0"));
    p.t = std::stoull(get("t"));
    p.c_sample = std::stod(get("c_sample"));
    p.c_big = std::stod(get("c_big"));
    p.beta = std::stod(get("beta"));
    p.tau_growth = std::stod(get("tau_growth"));
    p.sample_min = std::stoull(get("sample_min"));
    p.sample_max = std::stoull(get("sample_max"));
    p.x_cap = std::stoull(get("x_cap"));
    p.profile = parse_profile(get("profile"));
    p.rcp_mode = parse_rcp_mode(get("rcp_mode"));
    st.failed = get("status") == "failed";
    const std::size_t n = std::stoull(get("n"));

    std::size_t count = 0;
    if (std::sscanf(line.c_str(), "SAMPLE %zu", &count) != 1) fail("bad SAMPLE header");
    std::vector<Vertex> sample(count);
    for (auto& v : sample) {
      if (!(in >> v)) fail("truncated SAMPLE");
    }
    if (!std::is_sorted(sample.begin(), sample.end())) fail("SAMPLE not sorted");
    st.h = SimilarityGraph(sample);

    in >> std::ws;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "EDGES %zu", &count) != 1) fail("bad EDGES header");
    for (std::size_t e = 0; e < count; ++e) {
      Vertex u = 0, v = 0;
      std::string w;
      if (!(in >> u >> v >> w)) fail("truncated EDGES");
      const auto i = st.h.index_of(u), j = st.h.index_of(v);
      if (!i || !j) fail("edge endpoint outside SAMPLE");
      st.h.set_weight(*i, *j, std::stod(w));
    }
    in >> std::ws;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "CORES %zu", &count) != 1) fail("bad CORES header");
    for (std::size_t c = 0; c < count; ++c) {
      if (!std::getline(in, line)) fail("truncated CORES");
      std::istringstream ls(line);
      Core core;
      if (!(ls >> core.level)) fail("bad core line");
      Vertex v = 0;
      while (ls >> v) core.members.push_back(v);
      st.cores.push_back(std::move(core));
    }
    in >> std::ws;
    if (!std::getline(in, line) || line != "SEED") fail("missing SEED");
    if (!(in >> p.master_seed)) fail("bad SEED");

    p.resolve(n);
    for (const auto& c : st.cores) {
      if (c.level >= p.levels()) fail("core level outside the tau ladder");
    }
  } catch (const std::logic_error& e) {
    throw GraphError(GraphErrorKind::kMalformed, std::string("oracle state: ") + e.what());
  }
  return st;
}

inline void store_state(const OracleState& st, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GraphError(GraphErrorKind::kIo, "cannot write " + path);
  write_state(st, out);
}

inline OracleState load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError(GraphErrorKind::kIo, "cannot open " + path);
  return read_state(in);
}

}  // namespace subcluster
