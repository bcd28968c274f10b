#pragma once

#include <cmath>

#include "distsim/graph.hpp"
#include "distsim/krational.hpp"
#include "distsim/oracles.hpp"
#include "distsim/rng.hpp"

namespace distsim {

// Augmenting path: odd-length alternating path between two unmatched nodes.
// Canonical form keeps the smaller endpoint first.
struct AugPath {
  std::vector<NodeId> nodes;

  AugPath() = default;
  explicit AugPath(std::vector<NodeId> ns) : nodes(std::move(ns)) {
    if (!nodes.empty() && nodes.front() > nodes.back()) std::reverse(nodes.begin(), nodes.end());
  }
  int length() const { return static_cast<int>(nodes.size()) - 1; }
  auto operator<=>(const AugPath&) const = default;
};

inline void validate_aug_path(const Graph& g, const Matching& m, const AugPath& p) {
  if (p.nodes.size() < 2 || p.length() % 2 == 0) throw ValidationError("invalid_path", "length must be odd");
  std::set<NodeId> seen(p.nodes.begin(), p.nodes.end());
  if (seen.size() != p.nodes.size()) throw ValidationError("invalid_path", "repeated node");
  if (m.covers(p.nodes.front()) || m.covers(p.nodes.back()))
    throw ValidationError("invalid_path", "endpoint already matched");
  for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
    EdgeId e(p.nodes[i], p.nodes[i + 1]);
    if (!g.has_edge(e.u, e.v)) throw ValidationError("invalid_path", "missing edge " + e.to_string());
    const bool should_be_matched = i % 2 == 1;
    if (m.edges.count(e) != static_cast<std::size_t>(should_be_matched))
      throw ValidationError("invalid_path", "alternation broken at " + e.to_string());
  }
}

// M xor P: erase the matched edges of the path, add the unmatched ones.
// The result has exactly one more edge.
inline Matching flip(const Graph& g, const Matching& m, const AugPath& p) {
  validate_aug_path(g, m, p);
  Matching out = m;
  for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
    EdgeId e(p.nodes[i], p.nodes[i + 1]);
    if (out.edges.count(e))
      out.edges.erase(e);
    else
      out.edges.insert(e);
  }
  return out;
}

// Exhaustive enumeration of augmenting paths of exactly `length` edges,
// optionally restricted to a node subset. Oracle-grade.
inline std::vector<AugPath> enumerate_aug_paths(const Graph& g, const Matching& m, int length,
                                                const std::set<NodeId>* allowed = nullptr) {
  std::vector<AugPath> out;
  for (auto& nodes : detail::enumerate_aug_paths_impl(g, m, length, allowed)) out.push_back(AugPath(std::move(nodes)));
  std::sort(out.begin(), out.end());
  return out;
}

// Hypergraph of rank <= d: hyperedges are vertex sets of bounded size.
struct Hypergraph {
  std::size_t n = 0;                                // vertices 0..n-1
  std::vector<std::vector<std::uint32_t>> edges;    // vertex lists
};

struct HgParams {
  std::uint32_t k = 2;
  double delta = 0.05;
  double cap_constant = 10.0;  // good-round cap = ceil(cap_constant * d * K^2 * ln(1/delta))
  int max_rounds = 0;          // 0 derives a generous bound from the parameters
};

struct HgResult {
  std::vector<std::uint32_t> matched;  // hyperedge indices, pairwise vertex-disjoint
  std::set<std::uint32_t> deactivated;
  int rounds = 0;
  bool completed = true;
};

// Nearly-maximal matching in a low-rank hypergraph. Each alive hyperedge
// marks itself with probability p, joins when no intersecting hyperedge is
// marked, and halves or raises p by the intersecting-mass rule. A vertex is
// deactivated once its count of good rounds (light mass through it at least
// 1/(2dK^2)) exceeds the cap. Terminates with no hyperedge whose vertices are
// all active and unmatched; that guarantee is deterministic.
inline HgResult hypergraph_nm_matching(const Hypergraph& h, int rank_d, const HgParams& params, std::uint64_t seed) {
  const std::size_t m = h.edges.size();
  const std::uint32_t k = params.k;
  HgResult result;
  for (const auto& e : h.edges)
    if (static_cast<int>(e.size()) > rank_d)
      throw ValidationError("rank_exceeded", std::to_string(e.size()) + " > " + std::to_string(rank_d));

  std::vector<std::vector<std::uint32_t>> intersecting(m);
  for (std::uint32_t a = 0; a < m; ++a)
    for (std::uint32_t b = a + 1; b < m; ++b) {
      bool share = false;
      for (auto v : h.edges[a])
        for (auto w : h.edges[b])
          if (v == w) share = true;
      if (share) {
        intersecting[a].push_back(b);
        intersecting[b].push_back(a);
      }
    }

  std::vector<std::int32_t> p_exp(m, 1);
  std::vector<bool> edge_alive(m, true);
  std::vector<bool> vertex_matched(h.n, false), vertex_deactivated(h.n, false);
  std::vector<int> good_count(h.n, 0);
  const int cap = static_cast<int>(std::ceil(params.cap_constant * rank_d * k * k * std::log(1.0 / params.delta)));
  int max_rounds = params.max_rounds;
  if (max_rounds == 0)
    max_rounds = 200 + 12 * rank_d *
                           (cap + rank_d * (4 + ceil_log2(std::max<std::size_t>(m, 2))));

  auto kill_edges_at = [&](std::uint32_t vertex) {
    for (std::uint32_t e = 0; e < m; ++e)
      if (edge_alive[e])
        for (auto v : h.edges[e])
          if (v == vertex) edge_alive[e] = false;
  };

  std::size_t alive_count = m;
  for (int round = 1; round <= max_rounds && alive_count > 0; ++round) {
    result.rounds = round;
    // Intersecting probability mass (self included) and light flags.
    std::vector<KRat> mass(m, KRat::zero(k));
    std::vector<bool> light(m, false);
    for (std::uint32_t e = 0; e < m; ++e) {
      if (!edge_alive[e]) continue;
      KRat s = KRat::inv_pow(k, static_cast<std::uint64_t>(p_exp[e]));
      for (auto o : intersecting[e])
        if (edge_alive[o]) s += KRat::inv_pow(k, static_cast<std::uint64_t>(p_exp[o]));
      light[e] = s.cmp_ratio(2, 1) == std::strong_ordering::less;
      mass[e] = std::move(s);
    }
    // Good rounds per vertex: light mass through v at least 1/(2dK^2).
    std::vector<KRat> light_mass(h.n, KRat::zero(k));
    for (std::uint32_t e = 0; e < m; ++e)
      if (edge_alive[e] && light[e])
        for (auto v : h.edges[e]) light_mass[v] += KRat::inv_pow(k, static_cast<std::uint64_t>(p_exp[e]));

    // Marks and joins.
    std::vector<bool> marked(m, false);
    for (std::uint32_t e = 0; e < m; ++e)
      if (edge_alive[e])
        marked[e] = CounterRng::at(seed, e, static_cast<std::uint64_t>(round)).coin_inv_pow(k, static_cast<std::uint32_t>(p_exp[e]));
    std::vector<std::uint32_t> joiners;
    for (std::uint32_t e = 0; e < m; ++e) {
      if (!edge_alive[e] || !marked[e]) continue;
      bool blocked = false;
      for (auto o : intersecting[e])
        if (edge_alive[o] && marked[o]) blocked = true;
      if (!blocked) joiners.push_back(e);
    }
    for (auto e : joiners) {
      result.matched.push_back(e);
      for (auto v : h.edges[e]) {
        vertex_matched[v] = true;
        kill_edges_at(v);
      }
    }

    // Deactivation bookkeeping.
    const std::uint64_t good_den = 2ULL * static_cast<std::uint64_t>(rank_d) * k * k;
    for (std::uint32_t v = 0; v < h.n; ++v) {
      if (vertex_matched[v] || vertex_deactivated[v]) continue;
      if (light_mass[v].cmp_ratio(1, good_den) != std::strong_ordering::less) {
        if (++good_count[v] > cap) {
          vertex_deactivated[v] = true;
          result.deactivated.insert(v);
          kill_edges_at(v);
        }
      }
    }

    // Probability updates for the survivors.
    for (std::uint32_t e = 0; e < m; ++e) {
      if (!edge_alive[e]) continue;
      if (mass[e].cmp_ratio(2, 1) != std::strong_ordering::less)
        p_exp[e] += 1;
      else
        p_exp[e] = std::max(1, p_exp[e] - 1);
    }
    alive_count = static_cast<std::size_t>(std::count(edge_alive.begin(), edge_alive.end(), true));
  }
  result.completed = alive_count == 0;
  return result;
}

struct Mcm1EpsRun {
  Matching matching;
  std::set<NodeId> deactivated;
  std::vector<int> phase_lengths;   // the odd path lengths processed
  std::vector<int> phase_rounds;    // hypergraph rounds per phase
  bool completed = true;
};

// Nodes usable for augmenting-path search: not deactivated, and matched nodes
// only when their mate is usable too (a frozen matched edge blocks its ends).
inline std::set<NodeId> path_eligible_nodes(const Graph& g, const Matching& m, const std::set<NodeId>& deactivated) {
  std::set<NodeId> eligible;
  for (NodeId v : g.nodes()) {
    if (deactivated.count(v)) continue;
    auto mate = m.mate(v);
    if (mate && deactivated.count(*mate)) continue;
    eligible.insert(v);
  }
  return eligible;
}

using PhaseObserver = std::function<void(int, const Matching&, const std::set<NodeId>&)>;

// (1+eps)-approximate maximum cardinality matching in the LOCAL style: for
// each odd length d up to 2*ceil(1/eps)+1, build the conflict structure of
// length-d augmenting paths as a hypergraph, find a nearly-maximal matching of
// paths, and flip them all. The observer runs after each completed phase.
inline Mcm1EpsRun mcm_1eps_local(const Graph& g, double eps, std::uint64_t seed, HgParams params = {},
                                 const PhaseObserver& observer = {}) {
  if (eps <= 0) throw ValidationError("bad_parameter", "eps must be positive");
  Mcm1EpsRun run;
  const int max_len = 2 * static_cast<int>(std::ceil(1.0 / eps)) + 1;
  for (int d = 1; d <= max_len; d += 2) {
    run.phase_lengths.push_back(d);
    auto eligible = path_eligible_nodes(g, run.matching, run.deactivated);
    auto paths = enumerate_aug_paths(g, run.matching, d, &eligible);
    if (paths.empty()) {
      run.phase_rounds.push_back(0);
      if (observer) observer(d, run.matching, run.deactivated);
      continue;
    }
    std::vector<NodeId> involved(eligible.begin(), eligible.end());
    std::map<NodeId, std::uint32_t> index;
    for (std::uint32_t i = 0; i < involved.size(); ++i) index[involved[i]] = i;
    Hypergraph h;
    h.n = involved.size();
    for (const auto& p : paths) {
      std::vector<std::uint32_t> e;
      for (NodeId v : p.nodes) e.push_back(index.at(v));
      h.edges.push_back(std::move(e));
    }
    auto hg = hypergraph_nm_matching(h, d + 1, params, splitmix64(seed ^ static_cast<std::uint64_t>(d)));
    run.completed = run.completed && hg.completed;
    run.phase_rounds.push_back(hg.rounds);
    for (auto e : hg.matched) run.matching = flip(g, run.matching, paths[e]);
    for (auto v : hg.deactivated) run.deactivated.insert(involved[v]);
    if (observer) observer(d, run.matching, run.deactivated);
  }
  return run;
}

}  // namespace distsim
