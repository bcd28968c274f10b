#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "distsim/augpath.hpp"
#include "distsim/graph_io.hpp"
#include "distsim/lineagg.hpp"
#include "distsim/maxis.hpp"
#include "distsim/nmis.hpp"
#include "distsim/oracles.hpp"
#include "distsim/report_json.hpp"
#include "distsim/traversal.hpp"

using json = nlohmann::ordered_json;
using namespace distsim;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

std::string resolve_out(const std::string& out, const std::string& fallback) {
  std::string path = out.empty() ? fallback : out;
  if (std::filesystem::path(path).is_absolute()) return path;
  const char* dir = std::getenv("DISTSIM_OUT_DIR");
  if (dir && *dir) return (std::filesystem::path(dir) / path).string();
  return path;
}

struct RunParams {
  std::uint64_t seed = 0;
  double eps = 0.5;
  std::uint32_t k = 0;       // 0: per-algorithm default
  double delta = 0.0;        // 0: per-algorithm default
  double beta = 10.0;
  int rounds = 0;            // nmis T / proposal round override
  int na = 0;                // left side size for proposal runs
  Model model = Model::congest;
  int bandwidth_mult = 4;
  int max_rounds = 200000;
};

struct AlgoOutcome {
  json solution;
  Weight value = 0;
  bool valid = false;
  int engine_rounds = 0;
  int protocol_rounds = 0;
  int cap = 0;
  json congestion;
  json extra;
};

json congestion_json(const RunReport& r) { return report_to_json(r)["congestion"]; }

json is_json(const IndependentSet& is) {
  json nodes = json::array();
  for (NodeId v : is.nodes) nodes.push_back(v);
  return json{{"type", "independent_set"}, {"nodes", nodes}};
}

json matching_json(const Matching& m) {
  json edges = json::array();
  for (const auto& e : m.edges) edges.push_back({e.u, e.v});
  return json{{"type", "matching"}, {"edges", edges}};
}

EngineConfig engine_cfg(const RunParams& p) {
  EngineConfig cfg;
  cfg.seed = p.seed;
  cfg.model = p.model;
  cfg.bandwidth_mult = p.bandwidth_mult;
  cfg.max_rounds = p.max_rounds;
  return cfg;
}

NmisParams nmis_params(const RunParams& p) {
  NmisParams np;
  if (p.k) np.k = p.k;
  if (p.delta > 0) np.delta = p.delta;
  np.beta = p.beta;
  np.rounds = p.rounds;
  return np;
}

// Registered algorithms, names mirroring the operations they expose.
const std::vector<std::string> kAlgorithms = {
    "dist_maxis",   "coloring_maxis", "seq_local_ratio", "luby_mis",         "mwm_2approx_mis",
    "mwm_2approx_coloring", "nmis",   "mcm_2eps",        "mwm_2eps",         "mcm_1eps_local",
    "mcm_1eps_congest",     "proposal_2eps",             "mcm_2eps_alt"};

AlgoOutcome run_algorithm(const std::string& algo, const Graph& g, const EdgeWeights* ew, const RunParams& p) {
  AlgoOutcome out;
  EdgeWeights unit;
  const EdgeWeights& weights = ew ? *ew : unit;
  if (algo == "dist_maxis" || algo == "coloring_maxis") {
    auto run = algo == "dist_maxis" ? dist_maxis(g, engine_cfg(p)) : coloring_maxis(g, engine_cfg(p));
    auto check = validate_solution(g, run.is);
    out = {is_json(run.is), check.weight, check.valid, run.report.rounds_used, run.report.protocol_rounds,
           run.report.bandwidth_cap, congestion_json(run.report), json::object()};
  } else if (algo == "seq_local_ratio") {
    auto selector = [](const Graph& graph, const std::map<NodeId, Weight>& w, const std::set<NodeId>& alive) {
      std::vector<NodeId> order(alive.begin(), alive.end());
      std::sort(order.begin(), order.end(),
                [&](NodeId a, NodeId b) { return std::make_pair(w.at(a), a) > std::make_pair(w.at(b), b); });
      std::vector<NodeId> chosen;
      for (NodeId v : order) {
        bool ok = true;
        for (NodeId c : chosen)
          if (graph.has_edge(c, v)) ok = false;
        if (ok) chosen.push_back(v);
      }
      return chosen;
    };
    auto is = seq_local_ratio(g, selector);
    auto check = validate_solution(g, is);
    out = {is_json(is), check.weight, check.valid, 0, 0, 0, json::object(), json::object()};
  } else if (algo == "luby_mis") {
    auto [is, rounds] = luby_mis(g, p.seed, p.max_rounds);
    auto check = validate_solution(g, is);
    out = {is_json(is), check.weight, check.valid, rounds, rounds, 0, json::object(),
           json{{"maximal", is_maximal(g, is)}}};
  } else if (algo == "mwm_2approx_mis" || algo == "mwm_2approx_coloring") {
    auto variant = algo == "mwm_2approx_mis" ? MaxisVariant::layered : MaxisVariant::coloring;
    auto run = mwm_2approx(g, weights, variant, engine_cfg(p));
    auto check = validate_solution(g, run.matching, &weights);
    out = {matching_json(run.matching), check.weight, check.valid, run.report.rounds_used, run.report.protocol_rounds,
           run.report.bandwidth_cap, congestion_json(run.report), json::object()};
  } else if (algo == "nmis") {
    auto run = nmis_run(g, nmis_params(p), p.seed);
    auto check = validate_solution(g, run.is);
    json residual = json::array();
    for (NodeId v : run.residual) residual.push_back(v);
    double frac = g.node_count() ? static_cast<double>(run.residual.size()) / static_cast<double>(g.node_count()) : 0.0;
    out = {is_json(run.is), check.weight, check.valid, run.report.rounds_used, run.report.protocol_rounds,
           run.report.bandwidth_cap, congestion_json(run.report),
           json{{"residual", residual}, {"residual_fraction", frac}}};
  } else if (algo == "mcm_2eps") {
    auto run = mcm_2eps(g, p.eps, p.seed, nmis_params(p));
    auto check = validate_solution(g, run.matching);
    json residual = json::array();
    for (const auto& e : run.residual_edges) residual.push_back({e.u, e.v});
    out = {matching_json(run.matching), check.weight, check.valid, run.report.rounds_used,
           run.report.protocol_rounds, run.report.bandwidth_cap, congestion_json(run.report),
           json{{"residual_edges", residual}}};
  } else if (algo == "mwm_2eps") {
    auto run = mwm_2eps(g, weights, p.eps, p.seed, nmis_params(p));
    auto check = validate_solution(g, run.matching, &weights);
    out = {matching_json(run.matching), check.weight, check.valid, 0, 0, 0, json::object(),
           json{{"augment_iterations", run.augment_iterations}}};
  } else if (algo == "mcm_1eps_local") {
    HgParams hp;
    if (p.k) hp.k = p.k;
    if (p.delta > 0) hp.delta = p.delta;
    auto run = mcm_1eps_local(g, p.eps, p.seed, hp);
    auto check = validate_solution(g, run.matching);
    json lens = json::array(), rounds = json::array();
    for (int d : run.phase_lengths) lens.push_back(d);
    for (int r : run.phase_rounds) rounds.push_back(r);
    int total = 0;
    for (int r : run.phase_rounds) total += r;
    out = {matching_json(run.matching), check.weight, check.valid, total, total, 0, json::object(),
           json{{"phase_lengths", lens}, {"phase_rounds", rounds},
                {"deactivated_count", run.deactivated.size()}, {"completed", run.completed}}};
  } else if (algo == "mcm_1eps_congest") {
    PhaseParams pp;
    if (p.k) pp.k = p.k;
    if (p.delta > 0) pp.delta = p.delta;
    auto run = mcm_1eps_congest(g, p.eps, p.seed, pp);
    auto check = validate_solution(g, run.matching);
    int total = 0;
    for (int it : run.phase_iterations) total += it;
    out = {matching_json(run.matching), check.weight, check.valid, total, total, 0, json::object(),
           json{{"stages", run.stages}, {"total_phase_iterations", total},
                {"deactivated_count", run.deactivated.size()}, {"completed", run.completed}}};
  } else if (algo == "proposal_2eps") {
    if (p.na <= 0) throw ValidationError("bad_parameter", "--na (left side size) required for proposal_2eps");
    std::map<NodeId, Side> side;
    for (NodeId v : g.nodes()) side[v] = v < static_cast<NodeId>(p.na) ? Side::A : Side::B;
    BipartiteGraph bg = BipartiteGraph::build(g, side);
    std::uint32_t k = p.k ? p.k : 4;
    int rounds = p.rounds > 0 ? p.rounds : proposal_rounds_for(k, p.eps, g.max_degree());
    auto m = proposal_2eps_bipartite(bg, k, rounds, p.seed);
    auto check = validate_solution(g, m);
    out = {matching_json(m), check.weight, check.valid, rounds, rounds, 0, json::object(), json::object()};
  } else if (algo == "mcm_2eps_alt") {
    std::uint32_t k = p.k ? p.k : 4;
    auto m = mcm_2eps_alt(g, p.eps, p.seed, k);
    auto check = validate_solution(g, m);
    out = {matching_json(m), check.weight, check.valid, 0, 0, 0, json::object(), json::object()};
  } else {
    throw ValidationError("unknown_algorithm", algo);
  }
  return out;
}

json make_report(const std::string& algo, const std::string& graph_file, const Graph& g, const EdgeWeights* ew,
                 const RunParams& p) {
  AlgoOutcome r = run_algorithm(algo, g, ew, p);
  json report;
  report["algorithm"] = algo;
  report["graph"] = {{"file", graph_file},
                     {"n", g.node_count()},
                     {"m", g.edge_count()},
                     {"max_degree", g.max_degree()},
                     {"max_weight", g.max_weight()}};
  report["params"] = {{"seed", p.seed},       {"eps", p.eps},
                      {"k", p.k},             {"delta", p.delta},
                      {"beta", p.beta},       {"rounds", p.rounds},
                      {"model", p.model == Model::congest ? "congest" : "local"},
                      {"bandwidth_mult", p.bandwidth_mult}};
  report["seed"] = p.seed;
  report["solution"] = r.solution;
  report["value"] = r.value;
  report["valid"] = r.valid;
  report["rounds"] = {{"engine", r.engine_rounds}, {"protocol", r.protocol_rounds}};
  report["congestion"] = r.congestion;
  report["extra"] = r.extra;
  return report;
}

int cmd_generate(const std::string& kind, int n, int nb, int arms, double prob, Weight max_weight,
                 const std::string& weights_csv, const std::vector<std::string>& edge_weight_specs,
                 Weight edge_weight_max, std::uint64_t seed, const std::string& out) {
  GenSpec spec;
  if (kind == "erdos_renyi")
    spec = {.kind = GraphKind::erdos_renyi, .n = n, .p = prob, .max_weight = max_weight};
  else if (kind == "bipartite")
    spec = {.kind = GraphKind::bipartite, .n = n, .n_b = nb, .p = prob, .max_weight = max_weight};
  else if (kind == "star")
    spec = {.kind = GraphKind::star, .arms = arms, .max_weight = max_weight};
  else if (kind == "path")
    spec = {.kind = GraphKind::path, .n = n, .max_weight = max_weight};
  else if (kind == "cycle")
    spec = {.kind = GraphKind::cycle, .n = n, .max_weight = max_weight};
  else {
    std::cerr << "error: unknown kind " << kind << "\n";
    return kExitError;
  }

  Graph g = generate(spec, seed);
  if (!weights_csv.empty()) {
    std::map<NodeId, Weight> w;
    std::istringstream in(weights_csv);
    std::string tok;
    std::size_t i = 0;
    while (std::getline(in, tok, ',')) {
      if (i >= g.node_count()) throw ValidationError("weights_override", "too many weights");
      w[g.nodes()[i++]] = std::stoll(tok);
    }
    if (i != g.node_count()) throw ValidationError("weights_override", "expected one weight per node");
    std::vector<std::pair<NodeId, NodeId>> es;
    for (const auto& e : g.edges()) es.emplace_back(e.u, e.v);
    g = Graph::build(es, w);
  }
  std::optional<EdgeWeights> ew;
  if (edge_weight_max > 0) ew = generate_edge_weights(g, edge_weight_max, seed);
  for (const auto& s : edge_weight_specs) {
    unsigned u = 0, v = 0;
    long long w = 0;
    if (std::sscanf(s.c_str(), "%u,%u,%lld", &u, &v, &w) != 3) throw ValidationError("edge_weight_spec", s);
    if (!ew) ew.emplace();
    (*ew)[EdgeId(u, v)] = w;
  }
  write_graph_file(out, g, ew ? &*ew : nullptr);
  std::cout << "wrote " << out << " (n=" << g.node_count() << ", m=" << g.edge_count() << ")\n";
  return kExitPass;
}

int cmd_run(const std::string& algo, const std::string& graph_file, const RunParams& p, const std::string& out) {
  ParsedGraph parsed = read_graph_file(graph_file);
  json report = make_report(algo, graph_file, parsed.g, parsed.edge_weights ? &*parsed.edge_weights : nullptr, p);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ValidationError("io_error", out);
  f << report.dump(2) << "\n";
  std::cout << "algorithm " << algo << " value " << report["value"] << " valid " << report["valid"] << " -> " << out
            << "\n";
  return kExitPass;
}

int cmd_verify(const std::string& report_file, const std::string& graph_file) {
  std::ifstream rf(report_file, std::ios::binary);
  if (!rf) throw ValidationError("io_error", report_file);
  json report = json::parse(rf);
  ParsedGraph parsed = read_graph_file(graph_file);
  const Graph& g = parsed.g;
  const std::string algo = report.at("algorithm");
  const double eps = report.at("params").at("eps");
  const std::string type = report.at("solution").at("type");

  Weight value = 0;
  bool valid = false;
  Weight opt = 0;
  double bound_factor = 1.0;
  std::string bound_name;
  if (type == "independent_set") {
    IndependentSet is;
    for (const auto& v : report.at("solution").at("nodes")) is.nodes.insert(v.get<NodeId>());
    auto check = validate_solution(g, is);
    valid = check.valid;
    value = check.weight;
    if (!valid) {
      std::cout << "FAIL invalid solution: " << check.reason << "\n";
      return kExitFail;
    }
    if (algo == "luby_mis") {
      bool maximal = is_maximal(g, is);
      std::cout << (maximal ? "PASS" : "FAIL") << " maximal independent set, size " << is.nodes.size() << "\n";
      return maximal ? kExitPass : kExitFail;
    }
    if (algo == "nmis") {
      // Every node outside the reported residual set is in the set or covered.
      std::set<NodeId> residual;
      for (const auto& v : report.at("extra").at("residual")) residual.insert(v.get<NodeId>());
      for (NodeId v : g.nodes()) {
        if (residual.count(v) || is.nodes.count(v)) continue;
        bool covered = false;
        for (NodeId u : g.neighbors(v))
          if (is.nodes.count(u)) covered = true;
        if (!covered) {
          std::cout << "FAIL node " << v << " neither residual, in the set, nor covered\n";
          return kExitFail;
        }
      }
      std::cout << "PASS near-maximality bookkeeping, residual fraction "
                << report.at("extra").at("residual_fraction") << "\n";
      return kExitPass;
    }
    opt = brute_is(g).value;
    bound_factor = std::max(1, g.max_degree());
    bound_name = "Delta=" + std::to_string(g.max_degree());
  } else {
    Matching m;
    for (const auto& e : report.at("solution").at("edges"))
      m.edges.insert(EdgeId(e.at(0).get<NodeId>(), e.at(1).get<NodeId>()));
    const EdgeWeights* ew = parsed.edge_weights ? &*parsed.edge_weights : nullptr;
    auto check = validate_solution(g, m, ew);
    valid = check.valid;
    value = check.weight;
    if (!valid) {
      std::cout << "FAIL invalid solution: " << check.reason << "\n";
      return kExitFail;
    }
    opt = brute_matching(g, ew).value;
    if (algo == "mwm_2approx_mis" || algo == "mwm_2approx_coloring") {
      bound_factor = 2.0;
      bound_name = "2";
    } else if (algo == "mcm_1eps_local" || algo == "mcm_1eps_congest") {
      bound_factor = 1.0 + eps;
      bound_name = "1+eps";
    } else {
      bound_factor = 2.0 + eps;
      bound_name = "2+eps";
    }
  }
  if (opt == 0) {
    std::cout << "PASS empty optimum\n";
    return kExitPass;
  }
  double ratio = static_cast<double>(value) / static_cast<double>(opt);
  bool pass = static_cast<double>(value) * bound_factor >= static_cast<double>(opt) - 1e-9;
  std::cout << (pass ? "PASS" : "FAIL") << " achieved/optimal = " << value << "/" << opt << " = " << ratio
            << ", required factor " << bound_name << "\n";
  return pass ? kExitPass : kExitFail;
}

int cmd_sweep(const std::string& algo, const std::string& graph_file, std::vector<std::uint64_t> seeds,
              std::vector<std::uint32_t> ks, std::vector<double> epss, std::vector<double> deltas,
              const RunParams& base, const std::string& out) {
  ParsedGraph parsed = read_graph_file(graph_file);
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  if (ks.empty()) ks.push_back(base.k);
  if (epss.empty()) epss.push_back(base.eps);
  if (deltas.empty()) deltas.push_back(base.delta);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ValidationError("io_error", out);
  f << "algorithm,k,eps,delta,seed,value,engine_rounds,residual_fraction\n";
  if (seeds.empty()) {
    std::cout << "wrote " << out << "\n";
    return kExitPass;
  }
  for (std::uint32_t k : ks)
    for (double eps : epss)
      for (double delta : deltas)
        for (std::uint64_t seed : seeds) {
          RunParams p = base;
          p.k = k;
          p.eps = eps;
          p.delta = delta;
          p.seed = seed;
          AlgoOutcome r = run_algorithm(algo, parsed.g, parsed.edge_weights ? &*parsed.edge_weights : nullptr, p);
          double residual = r.extra.contains("residual_fraction") ? r.extra["residual_fraction"].get<double>() : 0.0;
          f << algo << "," << k << "," << eps << "," << delta << "," << seed << "," << r.value << ","
            << r.engine_rounds << "," << residual << "\n";
        }
  std::cout << "wrote " << out << "\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Round-synchronous CONGEST/LOCAL simulator with approximation algorithms for maximum weight "
               "independent set and matching"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "write a graph file");
  std::string kind = "erdos_renyi", weights_csv, gen_out;
  std::vector<std::string> edge_weight_specs;
  int gen_n = 0, gen_nb = 0, gen_arms = 0;
  double gen_p = 0.0;
  Weight gen_w = 1, gen_ew_max = 0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kind", kind, "erdos_renyi|bipartite|star|path|cycle");
  gen->add_option("--n", gen_n, "node count (left side for bipartite)");
  gen->add_option("--nb", gen_nb, "right side size (bipartite)");
  gen->add_option("--arms", gen_arms, "leaf count (star)");
  gen->add_option("--p", gen_p, "edge probability");
  gen->add_option("--max-weight", gen_w, "node weights uniform in [1, W]");
  gen->add_option("--weights", weights_csv, "explicit node weights, comma separated");
  gen->add_option("--edge-weights-max", gen_ew_max, "attach uniform edge weights in [1, W]");
  gen->add_option("--edge-weight", edge_weight_specs, "explicit edge weight u,v,w (repeatable)");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output file");

  auto* run = app.add_subcommand("run", "run an algorithm, write a JSON report");
  std::string run_algo, run_graph, run_out, run_model = "congest";
  RunParams rp;
  run->add_option("--algo", run_algo, "algorithm id")->required();
  run->add_option("--graph", run_graph, "graph file")->required();
  run->add_option("--seed", rp.seed, "run seed");
  run->add_option("--eps", rp.eps, "approximation parameter");
  run->add_option("--k", rp.k, "probability base (0: per-algorithm default)");
  run->add_option("--delta", rp.delta, "failure parameter (0: per-algorithm default)");
  run->add_option("--beta", rp.beta, "round-count scaling constant");
  run->add_option("--rounds", rp.rounds, "round override where applicable");
  run->add_option("--na", rp.na, "left side size (proposal_2eps)");
  run->add_option("--model", run_model, "congest|local");
  run->add_option("--bandwidth-mult", rp.bandwidth_mult, "cap multiplier c in c*ceil(log2 n)");
  run->add_option("--max-rounds", rp.max_rounds, "engine round budget");
  run->add_option("--out", run_out, "report file");

  auto* verify = app.add_subcommand("verify", "check a report against the oracle bound");
  std::string ver_report, ver_graph;
  verify->add_option("--report", ver_report, "report file")->required();
  verify->add_option("--graph", ver_graph, "graph file")->required();

  auto* sweep = app.add_subcommand("sweep", "parameter grid to CSV");
  std::string sw_algo, sw_graph, sw_out;
  std::vector<std::uint64_t> sw_seeds;
  std::vector<std::uint32_t> sw_ks;
  std::vector<double> sw_epss, sw_deltas;
  RunParams sp;
  sweep->add_option("--algo", sw_algo, "algorithm id")->required();
  sweep->add_option("--graph", sw_graph, "graph file")->required();
  sweep->add_option("--seeds", sw_seeds, "seed list (empty grid writes the header only)");
  sweep->add_option("--k-list", sw_ks, "K values");
  sweep->add_option("--eps-list", sw_epss, "eps values");
  sweep->add_option("--delta-list", sw_deltas, "delta values");
  sweep->add_option("--na", sp.na, "left side size (proposal_2eps)");
  sweep->add_option("--out", sw_out, "CSV file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate(kind, gen_n, gen_nb, gen_arms, gen_p, gen_w, weights_csv, edge_weight_specs, gen_ew_max,
                          gen_seed, resolve_out(gen_out, "graph.txt"));
    if (run->parsed()) {
      if (std::find(kAlgorithms.begin(), kAlgorithms.end(), run_algo) == kAlgorithms.end()) {
        std::cerr << "error: unknown algorithm " << run_algo << "\n";
        return kExitError;
      }
      rp.model = run_model == "local" ? Model::local : Model::congest;
      return cmd_run(run_algo, run_graph, rp, resolve_out(run_out, "report.json"));
    }
    if (verify->parsed()) return cmd_verify(ver_report, ver_graph);
    if (sweep->parsed())
      return cmd_sweep(sw_algo, sw_graph, sw_seeds, sw_ks, sw_epss, sw_deltas, sp, resolve_out(sw_out, "sweep.csv"));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
