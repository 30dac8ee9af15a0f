#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "subcluster/generators.hpp"
#include "subcluster/oracle.hpp"
#include "support.hpp"

using namespace subcluster;
using subcluster::testing::planted_params;

namespace {

std::string serialize(const OracleState& st) {
  std::ostringstream out;
  write_state(st, out);
  return out.str();
}

// Planted cluster holding most members of the core, and that share.
std::pair<std::size_t, double> core_purity(const Core& core, const std::vector<std::size_t>& labels) {
  std::map<std::size_t, std::size_t> count;
  for (Vertex v : core.members) ++count[labels[v]];
  auto best = std::max_element(count.begin(), count.end(),
                               [](const auto& a, const auto& b) { return a.second < b.second; });
  return {best->first, static_cast<double>(best->second) / static_cast<double>(core.members.size())};
}

// H on `size` sample vertices with the given cliques at weight w.
SimilarityGraph cliques(std::size_t size, const std::vector<std::vector<std::size_t>>& groups, double w) {
  std::vector<Vertex> sample(size);
  std::iota(sample.begin(), sample.end(), 0);
  SimilarityGraph h(sample);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = i + 1; j < size; ++j) h.set_weight(i, j, 0.0);
  }
  for (const auto& g : groups) {
    for (std::size_t a = 0; a < g.size(); ++a) {
      for (std::size_t b = a + 1; b < g.size(); ++b) h.set_weight(g[a], g[b], w);
    }
  }
  return h;
}

struct Learned {
  PlantedInstance inst;
  OracleState state;
};

const Learned& exact_two_cluster() {
  static const Learned fixture = [] {
    Learned l;
    l.inst = gen_clusterable(400, 2, 10, 1e-4, 21);
    l.state = learn_core(l.inst.graph, planted_params(2, 5, RcpMode::kExact), 4);
    return l;
  }();
  return fixture;
}

}  // namespace

TEST(OracleParams, ResolveBuildsLadder) {
  OracleParams p;
  p.phi = 0.5;
  p.eps = 1e-3;
  p.kappa = 0.3;
  p.resolve(1000);
  ASSERT_FALSE(p.ladder_empty());
  EXPECT_NEAR(p.tau[0], 3.0 * std::sqrt(6.0 * 1e-3 / 0.5), 1e-15);
  EXPECT_NEAR(p.tau[1] / p.tau[0], 1.1, 1e-12);
  EXPECT_LE(p.tau.back(), 1.0);
  EXPECT_GT(p.tau.back() * 1.1, 1.0);
  EXPECT_EQ(p.t, static_cast<std::uint64_t>(std::ceil(20.0 * std::log(1000.0) / 0.25)));
  EXPECT_NEAR(p.weight_threshold(0), 0.7 / (p.tau[0] * 1000.0), 1e-18);
  EXPECT_NEAR(p.size_floor(0, 100), 0.7 * p.tau[0] * 100.0, 1e-12);
}

TEST(OracleParams, PaperProfileConstants) {
  auto p = OracleParams::paper(0.02);
  EXPECT_NEAR(p.kappa, 0.04, 1e-15);
  p.phi = 0.5;
  p.resolve(1000);
  EXPECT_EQ(p.t, static_cast<std::uint64_t>(std::ceil(960.0 * std::log(1000.0) / (0.04 * 0.25))));
  p.kappa = 0.05;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(OracleParams, SampleSizeFormula) {
  auto p = OracleParams::paper(0.02);
  p.k = 3;
  p.phi = 0.5;
  p.eps = 1e-4;
  p.resolve(2000);
  const double raw = 9.0 * std::log(3.0) * std::log(2000.0) / std::sqrt(1e-4 / 0.5);
  EXPECT_EQ(p.sample_draws(), static_cast<std::size_t>(std::ceil(raw)));
  OracleParams q;
  q.resolve(2000);
  EXPECT_GE(q.sample_draws(), q.sample_min);
  EXPECT_LE(q.sample_draws(), q.sample_max);
}

TEST(LearnCore, PaperNoiseAbort) {
  const auto inst = gen_clusterable(200, 2, 10, 0.0, 1);
  auto p = OracleParams::paper(0.05);
  p.phi = 0.5;
  p.eps = p.phi * p.kappa * p.kappa / 50.0;
  const auto st = learn_core(inst.graph, p);
  EXPECT_TRUE(st.failed);
  EXPECT_EQ(st.num_clusters(), 0u);
}

TEST(LearnCore, EmptyLadderFails) {
  const auto inst = gen_clusterable(200, 2, 10, 0.0, 1);
  OracleParams p;
  p.phi = 0.2;
  p.eps = 0.02;
  EXPECT_TRUE(learn_core(inst.graph, p).failed);
}

TEST(LearnCore, DeterministicForSeed) {
  const auto inst = gen_clusterable(300, 2, 10, 1e-4, 3);
  auto p = planted_params(2, 11);
  p.sample_min = p.sample_max = 40;
  EXPECT_EQ(serialize(learn_core(inst.graph, p, 1)), serialize(learn_core(inst.graph, p, 4)));
}

TEST(LearnCore, ExactModeFindsPlantedClusters) {
  const auto& f = exact_two_cluster();
  ASSERT_FALSE(f.state.failed) << f.state.failure;
  ASSERT_EQ(f.state.cores.size(), 2u);
  const auto labels = f.inst.labels();
  const auto a = core_purity(f.state.cores[0], labels), b = core_purity(f.state.cores[1], labels);
  EXPECT_NE(a.first, b.first);
  EXPECT_GE(a.second, 0.9);
  EXPECT_GE(b.second, 0.9);
}

TEST(LearnCore, SampledModeFindsThreeCores) {
  const auto inst = gen_clusterable(1500, 3, 10, 1e-4, 31);
  const auto labels = inst.labels();
  for (std::uint64_t seed : {1u, 2u}) {
    const auto st = learn_core(inst.graph, planted_params(3, seed), 8);
    ASSERT_FALSE(st.failed) << st.failure;
    ASSERT_EQ(st.cores.size(), 3u);
    std::vector<std::size_t> clusters;
    for (const auto& c : st.cores) {
      const auto [which, purity] = core_purity(c, labels);
      EXPECT_GE(purity, 0.9);
      clusters.push_back(which);
    }
    std::sort(clusters.begin(), clusters.end());
    EXPECT_EQ(clusters, (std::vector<std::size_t>{0, 1, 2}));
  }
}

TEST(FindCore, ZeroWeightsFail) {
  OracleParams p = planted_params(2, 0);
  p.resolve(1000);
  EXPECT_FALSE(find_core(cliques(40, {}, 0.0), p).has_value());
}

TEST(FindCore, TwoHeavyCliques) {
  OracleParams p = planted_params(2, 0);
  p.resolve(1000);
  std::vector<std::size_t> a(15), b(15);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 20);
  const auto cores = find_core(cliques(40, {a, b}, p.weight_threshold(0)), p);
  ASSERT_TRUE(cores.has_value());
  ASSERT_EQ(cores->size(), 2u);
  EXPECT_EQ((*cores)[0].members, std::vector<Vertex>(a.begin(), a.end()));
  EXPECT_EQ((*cores)[1].members, std::vector<Vertex>(b.begin(), b.end()));
  EXPECT_EQ((*cores)[0].level, 0u);
}

TEST(FindCore, TooManyCliquesFail) {
  OracleParams p = planted_params(2, 0);
  p.resolve(1000);
  std::vector<std::vector<std::size_t>> groups(3);
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t i = 0; i < 15; ++i) groups[g].push_back(15 * g + i);
  }
  EXPECT_FALSE(find_core(cliques(45, groups, 1.0), p).has_value());
}

TEST(FindCore, SmallCliqueBelowSizeFloor) {
  OracleParams p = planted_params(2, 0);
  p.resolve(1000);
  std::vector<std::size_t> a{0, 1, 2};
  EXPECT_FALSE(find_core(cliques(100, {a}, 1.0), p).has_value());
}

TEST(CheckCore, FailedStateMakesEveryVertexOutlier) {
  const auto inst = gen_clusterable(200, 2, 10, 0.0, 1);
  OracleParams p;
  p.phi = 0.2;
  p.eps = 0.02;
  ClusteringOracle oracle(inst.graph, learn_core(inst.graph, p));
  for (Vertex v = 0; v < 200; v += 13) {
    EXPECT_TRUE(oracle.is_outlier(v));
    EXPECT_TRUE(oracle.which_cluster(v).is_outlier());
    EXPECT_FALSE(oracle.same_cluster(v, v));
  }
}

TEST(CheckCore, NoMatchingCoreIsOutlier) {
  const auto inst = gen_clusterable(200, 2, 10, 0.0, 2);
  OracleState st;
  st.params = planted_params(1, 0, RcpMode::kExact);
  st.params.resolve(200);
  const std::size_t top = st.params.levels() - 1;
  st.cores = {Core{{0, 1, 2}, top}};
  ClusteringOracle oracle(inst.graph, st);
  EXPECT_TRUE(oracle.is_outlier(150));
  EXPECT_FALSE(oracle.is_outlier(5));
}

TEST(CheckCore, TwoMatchingCoresIsOutlier) {
  const auto inst = gen_clusterable(200, 2, 10, 0.0, 2);
  OracleState st;
  st.params = planted_params(2, 0, RcpMode::kExact);
  st.params.resolve(200);
  const std::size_t top = st.params.levels() - 1;
  st.cores = {Core{{0, 1}, top}, Core{{3, 4}, top}};
  ClusteringOracle oracle(inst.graph, st);
  st.cores.pop_back();
  ClusteringOracle single(inst.graph, st);
  EXPECT_FALSE(single.is_outlier(50));
  EXPECT_TRUE(oracle.is_outlier(50));
  EXPECT_TRUE(oracle.is_outlier(150));
}

TEST(CheckCore, MatchesPlantedCluster) {
  const auto& f = exact_two_cluster();
  ClusteringOracle oracle(f.inst.graph, f.state, 4);
  const auto labels = f.inst.labels();
  std::map<std::size_t, std::size_t> core_to_cluster;
  for (std::size_t i = 0; i < f.state.cores.size(); ++i) {
    core_to_cluster[i + 1] = core_purity(f.state.cores[i], labels).first;
  }
  std::size_t right = 0, total = 0;
  for (Vertex v = 0; v < f.inst.n; v += 4) {
    const auto a = oracle.which_cluster(v);
    ++total;
    right += !a.is_outlier() && core_to_cluster[a.index()] == labels[v];
  }
  EXPECT_GE(static_cast<double>(right) / static_cast<double>(total), 0.8);
}

TEST(CheckCore, AnswersAreStable) {
  const auto& f = exact_two_cluster();
  ClusteringOracle oracle(f.inst.graph, f.state);
  std::vector<ClusterAnswer> first;
  for (Vertex v = 0; v < 400; v += 37) first.push_back(oracle.which_cluster(v));
  std::size_t i = 0;
  for (Vertex v = 0; v < 400; v += 37) EXPECT_EQ(oracle.which_cluster(v), first[i++]);
  EXPECT_EQ(oracle.memo_size(), first.size());
}

TEST(SameCluster, Semantics) {
  const auto& f = exact_two_cluster();
  ClusteringOracle oracle(f.inst.graph, f.state);
  Vertex inside = 0;
  while (oracle.is_outlier(inside)) ++inside;
  EXPECT_TRUE(oracle.same_cluster(inside, inside));
  const auto labels = f.inst.labels();
  for (Vertex v = 0; v < 400; v += 9) {
    const bool same = oracle.same_cluster(inside, v);
    const auto a = oracle.which_cluster(inside), b = oracle.which_cluster(v);
    EXPECT_EQ(same, !b.is_outlier() && a == b);
  }
}

TEST(SameCluster, Transitive) {
  const auto& f = exact_two_cluster();
  ClusteringOracle oracle(f.inst.graph, f.state);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Vertex x = rng.below(400), y = rng.below(400), z = rng.below(400);
    if (oracle.same_cluster(x, y) && oracle.same_cluster(y, z)) {
      EXPECT_TRUE(oracle.same_cluster(x, z));
    }
  }
}

TEST(ClusteringOracle, PermutedBatchGivesSameAnswers) {
  const auto inst = gen_clusterable(400, 2, 10, 1e-4, 8);
  auto p = planted_params(2, 3);
  const auto st = learn_core(inst.graph, p, 4);
  ASSERT_FALSE(st.failed);
  std::vector<Vertex> batch;
  for (Vertex v = 0; v < 400; v += 7) batch.push_back(v);
  ClusteringOracle a(inst.graph, st);
  std::map<Vertex, ClusterAnswer> first;
  for (Vertex v : batch) first.emplace(v, a.which_cluster(v));
  std::reverse(batch.begin(), batch.end());
  std::rotate(batch.begin(), batch.begin() + 11, batch.end());
  ClusteringOracle b(inst.graph, st);
  for (Vertex v : batch) EXPECT_EQ(b.which_cluster(v), first.at(v));
}

TEST(ClusteringOracle, RejectsMismatchedGraph) {
  const auto& f = exact_two_cluster();
  const auto other = gen_clusterable(300, 2, 10, 0.0, 1);
  EXPECT_THROW(ClusteringOracle(other.graph, f.state), std::invalid_argument);
  ClusteringOracle oracle(f.inst.graph, f.state);
  EXPECT_THROW(oracle.which_cluster(400), std::out_of_range);
}

TEST(StateFile, RoundTrip) {
  const auto& f = exact_two_cluster();
  auto st = f.state;
  st.graph_path = "inst/graph.txt";
  std::istringstream in(serialize(st));
  const auto back = read_state(in);
  EXPECT_EQ(serialize(back), serialize(st));
  EXPECT_EQ(back.cores, st.cores);
  EXPECT_EQ(back.graph_path, "inst/graph.txt");
  EXPECT_EQ(back.params.t, st.params.t);
  EXPECT_EQ(back.params.tau, st.params.tau);
}

TEST(StateFile, FailedStateRoundTrip) {
  const auto inst = gen_clusterable(200, 2, 10, 0.0, 1);
  OracleParams p;
  p.phi = 0.2;
  p.eps = 0.02;
  const auto st = learn_core(inst.graph, p);
  std::istringstream in(serialize(st));
  const auto back = read_state(in);
  EXPECT_TRUE(back.failed);
  EXPECT_EQ(serialize(back), serialize(st));
}

TEST(StateFile, RejectsGarbage) {
  std::istringstream in("not a state\n");
  EXPECT_THROW(read_state(in), GraphError);
}

TEST(ClusterAnswer, Formatting) {
  EXPECT_EQ(ClusterAnswer::outlier().to_string(), "OUTLIER");
  EXPECT_EQ(ClusterAnswer::cluster(2).to_string(), "2");
  EXPECT_THROW(ClusterAnswer::cluster(0), std::invalid_argument);
  EXPECT_THROW(ClusterAnswer::outlier().index(), std::logic_error);
}
