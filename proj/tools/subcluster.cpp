// subcluster: generate planted instances, learn and query the clustering
// oracle, reconstruct, verify and audit.
//
// Exit codes: 0 success, 1 domain failure, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "subcluster/audit.hpp"
#include "subcluster/expander.hpp"
#include "subcluster/generators.hpp"
#include "subcluster/oracle.hpp"
#include "subcluster/reconstructor.hpp"
#include "subcluster/verify.hpp"

namespace {

using json = nlohmann::json;
using namespace subcluster;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  bool json = false;
  bool strict = false;
  unsigned threads = 1;
};

struct OracleFlags {
  std::size_t k = 2;
  double phi = 0.5;
  double eps = 1e-3;
  std::optional<double> kappa;
  double theta0 = 0.1;
  std::optional<double> delta0;
  std::uint64_t t = 0;
  double beta = 20.0;
  double c_sample = 0.05;
  double c_big = 4.0;
  std::size_t sample_min = 40;
  std::size_t sample_max = 400;
  std::string profile = "practical";
  std::string rcp_mode = "sampled";
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--k", k, "maximum number of clusters")->check(CLI::PositiveNumber);
    app->add_option("--phi", phi, "inner conductance target in (0,1)");
    app->add_option("--eps", eps, "perturbation budget the oracle assumes");
    app->add_option("--kappa", kappa, "kappa (practical default 0.05; paper: 100 delta0^2)");
    app->add_option("--theta0", theta0, "light-vertex slack theta0");
    app->add_option("--delta0", delta0, "rcp accuracy delta0 (practical default 0.1, paper 0.02)");
    app->add_option("--t", t, "walk length (0 derives it from the profile)");
    app->add_option("--beta", beta, "practical walk-length constant");
    app->add_option("--c-sample", c_sample, "sample-size constant c");
    app->add_option("--c-big", c_big, "repetition constant C of the rcp estimator");
    app->add_option("--sample-min", sample_min, "practical lower clamp on |S|");
    app->add_option("--sample-max", sample_max, "practical upper clamp on |S|");
    app->add_option("--profile", profile, "paper | practical (SUBCLUSTER_PROFILE overrides)")
        ->check(CLI::IsMember({"paper", "practical"}));
    app->add_option("--rcp-mode", rcp_mode, "sampled | exact")->check(CLI::IsMember({"sampled", "exact"}));
    app->add_option("--seed", seed, "master seed");
  }

  OracleParams build() const {
    std::string prof = profile;
    if (const char* env = std::getenv("SUBCLUSTER_PROFILE"); env && *env) prof = env;
    OracleParams p;
    try {
      p = parse_profile(prof) == Profile::kPaper ? OracleParams::paper(delta0.value_or(0.02)) : OracleParams::practical();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (p.profile == Profile::kPractical) {
      p.delta0 = delta0.value_or(0.1);
      p.kappa = kappa.value_or(0.05);
    } else if (kappa) {
      p.kappa = *kappa;
    }
    p.k = k;
    p.phi = phi;
    p.eps = eps;
    p.theta0 = theta0;
    p.t = t;
    p.beta = beta;
    p.c_sample = c_sample;
    p.c_big = c_big;
    p.sample_min = sample_min;
    p.sample_max = sample_max;
    p.rcp_mode = parse_rcp_mode(rcp_mode);
    p.master_seed = seed;
    return p;
  }
};

void emit(const Globals& g, const json& j, const std::string& text) {
  if (g.json) {
    std::cout << j.dump() << '\n';
  } else {
    std::cout << text;
  }
}

std::string yes_no(bool b) { return b ? "YES" : "NO"; }

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw UsageError("bad size list: " + s);
    }
  }
  if (out.empty()) throw UsageError("empty size list");
  return out;
}

Graph load_for_state(const OracleState& st, const std::string& graph_flag) {
  const std::string path = graph_flag.empty() ? st.graph_path : graph_flag;
  if (path.empty()) throw UsageError("state records no graph path; pass --graph");
  return load_graph(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust clustering oracle and local reconstruction for noisy clusterable graphs"};
  app.require_subcommand(1);
  Globals globals;
  app.add_flag("--json", globals.json, "structured output");
  app.add_flag("--strict", globals.strict, "exit 1 when learning fails or a check does not pass");
  app.add_option("--threads", globals.threads, "worker threads")->check(CLI::PositiveNumber);

  // gen
  auto* gen = app.add_subcommand("gen", "plant a clusterable instance and perturb it");
  std::size_t gen_n = 0, gen_k = 0;
  std::uint32_t gen_d = 10;
  double gen_inter = 0.0, gen_eps = 0.0;
  std::string gen_mode = "none", gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--n", gen_n, "vertices")->required();
  gen->add_option("--k", gen_k, "clusters")->required();
  gen->add_option("--d", gen_d, "degree bound");
  gen->add_option("--inter", gen_inter, "crossing edges per cluster as a fraction of d|P_i|");
  gen->add_option("--eps", gen_eps, "perturbation budget fraction of dn");
  gen->add_option("--mode", gen_mode, "none | delete-random | delete-targeted-cut | insert-random | mixed")
      ->check(CLI::IsMember({"none", "delete-random", "delete-targeted-cut", "insert-random", "mixed"}));
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--out", gen_out, "output directory")->required();

  // learn
  auto* learn = app.add_subcommand("learn", "learn the oracle state");
  OracleFlags learn_flags;
  std::string learn_graph, learn_out;
  learn->add_option("--graph", learn_graph, "graph file")->required();
  learn->add_option("--out", learn_out, "state file")->required();
  learn_flags.attach(learn);

  // query
  auto* query = app.add_subcommand("query", "answer clustering queries from a state file");
  std::string query_state, query_graph, query_op, query_batch;
  std::optional<Vertex> query_u, query_v;
  query->add_option("--state", query_state, "state file")->required();
  query->add_option("--graph", query_graph, "graph file (defaults to the one recorded in the state)");
  query->add_option("--op", query_op, "is-outlier | which-cluster | same-cluster")
      ->check(CLI::IsMember({"is-outlier", "which-cluster", "same-cluster"}));
  query->add_option("--u", query_u, "query vertex");
  query->add_option("--v", query_v, "second vertex for same-cluster");
  query->add_option("--batch", query_batch, "file of queries: '<op> <u> [v]' per line");

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "query or materialize the reconstructed graph");
  std::string recon_state, recon_graph, recon_out;
  std::optional<Vertex> recon_vertex;
  bool recon_materialize = false;
  recon->add_option("--state", recon_state, "state file")->required();
  recon->add_option("--graph", recon_graph, "graph file (defaults to the one recorded in the state)");
  recon->add_option("--vertex", recon_vertex, "vertex whose new neighbor list is printed");
  recon->add_flag("--materialize", recon_materialize, "build the whole reconstructed graph");
  recon->add_option("--out", recon_out, "graph file for --materialize");

  // verify
  auto* verify = app.add_subcommand("verify", "exact desk-scale checks");
  std::string verify_kind, verify_graph, verify_partition, verify_blocks, verify_csv, verify_kernel = "averaged";
  std::uint64_t verify_t = 0;
  double verify_nu = 0.1, verify_threshold = 0.25;
  verify->add_option("--kind", verify_kind, "spectral | mixing | complement | merge")
      ->required()
      ->check(CLI::IsMember({"spectral", "mixing", "complement", "merge"}));
  verify->add_option("--graph", verify_graph, "graph file")->required();
  verify->add_option("--partition", verify_partition, "partition file")->required();
  verify->add_option("--blocks", verify_blocks, "noise blocks file (complement)");
  verify->add_option("--t", verify_t, "walk length (mixing)");
  verify->add_option("--kernel", verify_kernel, "plain | averaged (mixing)")->check(CLI::IsMember({"plain", "averaged"}));
  verify->add_option("--threshold", verify_threshold, "TV threshold for the mixing summary");
  verify->add_option("--nu", verify_nu, "merge threshold nu");
  verify->add_option("--csv", verify_csv, "write the per-vertex or per-part CSV here");

  // audit
  auto* audit = app.add_subcommand("audit", "adjacency queries per clustering query versus n");
  std::string audit_sizes = "1024,2048,4096,8192,16384", audit_csv;
  std::size_t audit_queries = 50;
  OracleFlags audit_flags;
  audit_flags.k = 2;
  audit_flags.phi = 0.8;
  audit_flags.eps = 5e-4;
  audit_flags.kappa = 0.2;
  audit_flags.sample_min = audit_flags.sample_max = 30;
  audit->add_option("--graph-sizes", audit_sizes, "comma-separated n values");
  audit->add_option("--queries", audit_queries, "clustering queries per size");
  audit->add_option("--csv", audit_csv, "also write the CSV here");
  audit_flags.attach(audit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) {
      const auto base = gen_clusterable(gen_n, gen_k, gen_d, gen_inter, gen_seed);
      const auto inst = perturb(base, gen_eps, parse_perturb_mode(gen_mode), gen_seed);
      std::filesystem::create_directories(gen_out);
      const auto dir = std::filesystem::path(gen_out);
      store_graph(inst.graph, (dir / "graph.txt").string());
      store_partition(inst.partition, (dir / "partition.txt").string());
      store_partition(inst.noise, (dir / "blocks.txt").string());
      json j = {{"n", inst.n},          {"k", inst.k},           {"d", inst.d},
                {"edges", inst.graph.num_edges()},              {"mode", to_string(inst.mode)},
                {"budget", inst.budget}, {"edits", inst.edits_used}, {"dir", gen_out}};
      std::ostringstream text;
      text << "graph " << (dir / "graph.txt").string() << "\npartition " << (dir / "partition.txt").string()
           << "\nblocks " << (dir / "blocks.txt").string() << "\nedges " << inst.graph.num_edges() << "\nbudget "
           << inst.budget << "\nedits " << inst.edits_used << '\n';
      emit(globals, j, text.str());
      return 0;
    }

    if (*learn) {
      const Graph g = load_graph(learn_graph);
      OracleParams p;
      try {
        p = learn_flags.build();
        p.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto state = learn_core(g, p, globals.threads, std::filesystem::absolute(learn_graph).string());
      store_state(state, learn_out);
      json j = {{"status", state.failed ? "failed" : "ok"},
                {"clusters", state.num_clusters()},
                {"sample", state.h.size()},
                {"t", state.params.t},
                {"levels", state.params.levels()}};
      if (state.failed) j["reason"] = state.failure;
      std::ostringstream text;
      text << "status " << (state.failed ? "failed" : "ok") << "\nclusters " << state.num_clusters() << "\nsample "
           << state.h.size() << "\nt " << state.params.t << '\n';
      if (state.failed) text << "reason " << state.failure << '\n';
      emit(globals, j, text.str());
      return state.failed && globals.strict ? 1 : 0;
    }

    if (*query) {
      const auto state = load_state(query_state);
      const Graph g = load_for_state(state, query_graph);
      ClusteringOracle oracle(g, state, globals.threads);
      auto answer = [&](const std::string& op, Vertex u, std::optional<Vertex> v) -> std::pair<std::string, json> {
        if (u >= g.num_vertices() || (v && *v >= g.num_vertices())) throw UsageError("query vertex out of range");
        if (op == "is-outlier") {
          const bool r = oracle.is_outlier(u);
          return {yes_no(r), json{{"op", op}, {"u", u}, {"answer", r}}};
        }
        if (op == "which-cluster") {
          const auto r = oracle.which_cluster(u);
          json a = r.is_outlier() ? json("outlier") : json(r.index());
          return {r.to_string(), json{{"op", op}, {"u", u}, {"answer", a}}};
        }
        if (op == "same-cluster") {
          if (!v) throw UsageError("same-cluster needs a second vertex");
          const bool r = oracle.same_cluster(u, *v);
          return {yes_no(r), json{{"op", op}, {"u", u}, {"v", *v}, {"answer", r}}};
        }
        throw UsageError("unknown query op: " + op);
      };
      if (!query_batch.empty()) {
        std::ifstream in(query_batch);
        if (!in) throw GraphError(GraphErrorKind::kIo, "cannot open " + query_batch);
        std::string line;
        while (std::getline(in, line)) {
          std::istringstream ls(line);
          std::string op;
          long long u = -1, v = -1;
          if (!(ls >> op)) continue;
          if (!(ls >> u) || u < 0) throw UsageError("bad batch line: " + line);
          std::optional<Vertex> second;
          if (ls >> v) {
            if (v < 0) throw UsageError("bad batch line: " + line);
            second = static_cast<Vertex>(v);
          }
          auto [text, j] = answer(op, static_cast<Vertex>(u), second);
          emit(globals, j, text + "\n");
        }
        return 0;
      }
      if (query_op.empty() || !query_u) throw UsageError("query needs --op and --u, or --batch");
      auto [text, j] = answer(query_op, *query_u, query_v);
      emit(globals, j, text + "\n");
      return 0;
    }

    if (*recon) {
      const auto state = load_state(recon_state);
      const Graph g = load_for_state(state, recon_graph);
      ClusteringOracle oracle(g, state, globals.threads);
      Reconstructor rec(oracle);
      if (recon_materialize) {
        const Graph gp = rec.materialize();
        if (!recon_out.empty()) store_graph(gp, recon_out);
        std::size_t outliers = 0;
        for (Vertex v = 0; v < g.num_vertices(); ++v) outliers += oracle.is_outlier(v) ? 1 : 0;
        json j = {{"vertices", gp.num_vertices()},      {"degree_bound", gp.degree_bound()},
                  {"edges", gp.num_edges()},            {"added", gp.num_edges() - g.num_edges()},
                  {"max_degree", gp.max_degree()},      {"outliers", outliers}};
        std::ostringstream text;
        text << "edges " << gp.num_edges() << "\nadded " << gp.num_edges() - g.num_edges() << "\nmax_degree "
             << gp.max_degree() << "\noutliers " << outliers << '\n';
        if (recon_out.empty() && !globals.json) write_graph(gp, std::cout);
        emit(globals, j, recon_out.empty() ? "" : text.str());
        return 0;
      }
      if (!recon_vertex) throw UsageError("reconstruct needs --vertex or --materialize");
      if (*recon_vertex >= g.num_vertices()) throw UsageError("vertex out of range");
      const auto nb = rec.new_neighbors(*recon_vertex);
      std::ostringstream text;
      for (std::size_t i = 0; i < nb.size(); ++i) text << (i ? " " : "") << nb[i];
      text << '\n';
      emit(globals, json{{"vertex", *recon_vertex}, {"neighbors", nb}}, text.str());
      return 0;
    }

    if (*verify) {
      const Graph g = load_graph(verify_graph);
      const auto parts = load_partition(verify_partition);
      if (verify_kind == "spectral") {
        const auto c = check_cluster_spectral(g, parts);
        json j = {{"h", c.h},
                  {"lambda_h", c.lambda_h},
                  {"lambda_next", std::isnan(c.lambda_next) ? json(nullptr) : json(c.lambda_next)},
                  {"phi_in", c.phi_in},
                  {"phi_in_method", to_string(c.inner_method)},
                  {"phi_out", c.phi_out},
                  {"upper_holds", c.upper_holds},
                  {"lower_holds", c.lower_holds}};
        std::ostringstream text;
        text << "h " << c.h << "\nlambda_h " << c.lambda_h << "\nlambda_next " << c.lambda_next << "\nphi_in "
             << c.phi_in << " (" << to_string(c.inner_method) << ")\nphi_out " << c.phi_out << "\nupper "
             << (c.upper_holds ? "PASS" : "FAIL") << "\nlower " << (c.lower_holds ? "PASS" : "FAIL") << '\n';
        emit(globals, j, text.str());
        return !c.passed() && globals.strict ? 1 : 0;
      }
      if (verify_kind == "mixing") {
        if (verify_t == 0) throw UsageError("mixing needs --t");
        const auto rows = mixing_profile(g, parts, verify_t,
                                         verify_kernel == "plain" ? Kernel::kPlain : Kernel::kAveraged);
        if (!verify_csv.empty()) {
          std::ofstream out(verify_csv);
          write_mixing_csv(rows, out);
        }
        json j = json::array();
        std::ostringstream text;
        for (std::size_t i = 0; i < parts.size(); ++i) {
          const double f = mixing_fraction(rows, i, verify_threshold);
          j.push_back({{"cluster", i}, {"size", parts[i].size()}, {"fraction_within", f}});
          text << "cluster " << i << " size " << parts[i].size() << " fraction_within " << f << '\n';
        }
        if (verify_csv.empty() && !globals.json) write_mixing_csv(rows, std::cout);
        emit(globals, json{{"threshold", verify_threshold}, {"t", verify_t}, {"clusters", j}}, text.str());
        return 0;
      }
      if (verify_kind == "complement") {
        std::vector<VertexSet> blocks(parts.size());
        if (!verify_blocks.empty()) blocks = load_partition(verify_blocks);
        const auto q = induced_cluster_quality(g, parts, blocks);
        json j = json::array();
        std::ostringstream text;
        text << "cluster,inner_graph,inner_chain,inner_method,outer_chain,outer_cluster\n";
        for (std::size_t i = 0; i < q.size(); ++i) {
          j.push_back({{"cluster", i},
                       {"inner_graph", q[i].inner_graph.value},
                       {"inner_chain", q[i].inner_chain.value},
                       {"inner_method", to_string(q[i].inner_chain.method)},
                       {"outer_chain", q[i].outer_chain},
                       {"outer_cluster", q[i].outer_cluster}});
          text << i << ',' << q[i].inner_graph.value << ',' << q[i].inner_chain.value << ','
               << to_string(q[i].inner_chain.method) << ',' << q[i].outer_chain << ',' << q[i].outer_cluster << '\n';
        }
        emit(globals, j, text.str());
        return 0;
      }
      const auto report = merge_for_outer(g, parts, verify_nu);
      if (!verify_csv.empty()) {
        std::ofstream out(verify_csv);
        write_partition_report(report, out);
      }
      json j = {{"merges", report.merges}, {"parts", report.parts.size()}, {"outer", report.outer}};
      std::ostringstream text;
      write_partition_report(report, text);
      emit(globals, j, text.str());
      return 0;
    }

    if (*audit) {
      AuditConfig cfg;
      cfg.sizes = parse_sizes(audit_sizes);
      cfg.queries = audit_queries;
      cfg.k = audit_flags.k;
      cfg.threads = globals.threads;
      try {
        cfg.params = audit_flags.build();
        cfg.params.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      cfg.seed = audit_flags.seed;
      const auto r = run_audit(cfg);
      if (!audit_csv.empty()) {
        std::ofstream out(audit_csv);
        write_audit_csv(r, out);
      }
      json rows = json::array();
      for (const auto& row : r.rows) {
        rows.push_back({{"n", row.n}, {"t", row.t}, {"clusters", row.clusters}, {"mean_queries", row.mean_queries}});
      }
      std::ostringstream text;
      write_audit_csv(r, text);
      emit(globals, json{{"rows", rows}, {"slope", r.slope}}, text.str());
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
