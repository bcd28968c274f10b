#pragma once

#include <cmath>

#include "distsim/augpath.hpp"
#include "distsim/graph.hpp"
#include "distsim/krational.hpp"

namespace distsim {

// Numeric policies for the traversal sums: exact rationals by default, long
// doubles for the audited float mode.
struct ExactNum {
  using T = KRat;
  static T zero(std::uint32_t k) { return KRat::zero(k); }
  static T one(std::uint32_t k) { return KRat::integer(k, 1); }
  static T alpha(std::uint32_t k, std::uint64_t exp) { return KRat::inv_pow(k, exp); }
  static T add(const T& a, const T& b) { return a + b; }
  static T mul(const T& a, const T& b) { return a * b; }
  static bool is_zero(const T& v) { return v.is_zero(); }
  static bool at_least_ratio(const T& v, std::uint64_t p, std::uint64_t q) {
    return v.cmp_ratio(p, q) != std::strong_ordering::less;
  }
  static long double to_ld(const T& v) { return v.to_long_double(); }
};

struct FloatNum {
  using T = long double;
  static T zero(std::uint32_t) { return 0.0L; }
  static T one(std::uint32_t) { return 1.0L; }
  static T alpha(std::uint32_t k, std::uint64_t exp) {
    return std::pow(1.0L / static_cast<long double>(k), static_cast<long double>(exp));
  }
  static T add(const T& a, const T& b) { return a + b; }
  static T mul(const T& a, const T& b) { return a * b; }
  static bool is_zero(const T& v) { return v == 0.0L; }
  static bool at_least_ratio(const T& v, std::uint64_t p, std::uint64_t q) {
    return v >= static_cast<long double>(p) / static_cast<long double>(q);
  }
  static long double to_ld(const T& v) { return v; }
};

// Distributed representation of augmenting-path probabilities: one attenuation
// per node; the probability of a path is the product of its nodes'
// attenuations. Attenuations are powers of 1/K floored at K^-floor_exp (the
// largest power of K not above Delta^(-20/eps)), so all arithmetic stays
// exact. Matched B-nodes carry no attenuation (fixed at 1).
struct PathState {
  std::uint32_t k = 2;
  std::uint64_t floor_exp = 40;
  std::map<NodeId, std::uint64_t> alpha_exp;  // A-nodes and unmatched B-nodes
  std::map<NodeId, std::uint64_t> cap_exp;    // initial exponent; raises stop here

  static PathState init(const BipartiteGraph& bg, const Matching& m, double eps, std::uint32_t k) {
    PathState st;
    st.k = k;
    double dd = std::max(2, bg.g.max_degree());
    st.floor_exp = std::max<std::uint64_t>(
        8, static_cast<std::uint64_t>(std::floor(20.0 / eps * std::log(dd) / std::log(static_cast<double>(k)))));
    for (NodeId v : bg.g.nodes()) {
      bool matched = m.covers(v);
      if (bg.is_a(v)) {
        st.cap_exp[v] = matched ? 0 : 1;  // unmatched A starts at 1/K, matched A at 1
        st.alpha_exp[v] = st.cap_exp[v];
      } else if (!matched) {
        st.cap_exp[v] = 0;  // unmatched B starts at 1
        st.alpha_exp[v] = 0;
      }
    }
    return st;
  }

  std::uint64_t exp_of(NodeId v) const {
    auto it = alpha_exp.find(v);
    return it == alpha_exp.end() ? 0 : it->second;
  }
};

// Traversal record: layered depths, per-B-node first-round contributions,
// prefix sums f, and after the backward pass the per-node path mass.
template <class Num = ExactNum>
struct Traversal {
  using T = typename Num::T;
  std::map<NodeId, int> depth;
  std::map<NodeId, T> value;                                    // f(v), own attenuation included
  std::map<NodeId, std::vector<std::pair<NodeId, T>>> contrib;  // at B-nodes: (A-sender, value sent)
  std::map<NodeId, T> through;                                  // path mass through v (backward pass)

  T value_or_zero(std::uint32_t k, NodeId v) const {
    auto it = value.find(v);
    return it == value.end() ? Num::zero(k) : it->second;
  }
  T through_or_zero(std::uint32_t k, NodeId v) const {
    auto it = through.find(v);
    return it == through.end() ? Num::zero(k) : it->second;
  }
};

// d rounds of hop-by-hop forwarding: unmatched A-nodes start with their
// attenuation, B-nodes sum their first-round receipts, a matched B-node
// forwards the sum to its mate exactly once, the mate applies its attenuation.
// After round d every unmatched B-node reached holds the probability mass of
// the length-d augmenting paths ending there. Exact when the shortest
// augmenting path among the active nodes has length >= d.
template <class Num = ExactNum>
Traversal<Num> forward_traversal(const BipartiteGraph& bg, const Matching& m, int d, const PathState& st,
                                 const std::set<NodeId>* active = nullptr) {
  if (d < 1 || d % 2 == 0) throw ValidationError("bad_parameter", "path length must be odd");
  using T = typename Num::T;
  Traversal<Num> tr;
  auto ok = [&](NodeId v) { return !active || active->count(v); };
  std::map<NodeId, NodeId> mate;
  for (const auto& e : m.edges) {
    mate[e.u] = e.v;
    mate[e.v] = e.u;
  }
  std::map<NodeId, T> raw;  // at B-nodes: sum before the node's own attenuation

  for (NodeId v : bg.g.nodes())
    if (ok(v) && bg.is_a(v) && !mate.count(v)) {
      tr.depth[v] = 0;
      tr.value[v] = Num::alpha(st.k, st.exp_of(v));
    }
  for (int t = 1; t <= d; ++t) {
    if (t % 2 == 1) {
      // A -> B over unmatched edges; only first-round receipts count.
      std::vector<NodeId> senders;
      for (const auto& [v, dep] : tr.depth)
        if (dep == t - 1 && bg.is_a(v)) senders.push_back(v);
      for (NodeId a : senders) {
        for (NodeId b : bg.g.neighbors(a)) {
          if (!ok(b)) continue;
          auto im = mate.find(a);
          if (im != mate.end() && im->second == b) continue;
          auto it = tr.depth.find(b);
          if (it != tr.depth.end() && it->second != t) continue;
          tr.depth[b] = t;
          const T& va = tr.value.at(a);
          tr.contrib[b].emplace_back(a, va);
          auto rit = raw.find(b);
          if (rit == raw.end())
            raw.emplace(b, va);
          else
            rit->second = Num::add(rit->second, va);
        }
      }
    } else {
      // Matched B -> its mate, exactly once.
      std::vector<std::pair<NodeId, T>> handoffs;
      for (const auto& [b, dep] : tr.depth) {
        if (dep != t - 1 || bg.is_a(b)) continue;
        auto im = mate.find(b);
        if (im == mate.end() || !ok(im->second)) continue;
        handoffs.emplace_back(im->second, raw.at(b));
      }
      for (auto& [a, sum] : handoffs) {
        tr.depth[a] = t;
        tr.value[a] = Num::mul(sum, Num::alpha(st.k, st.exp_of(a)));
      }
    }
  }
  for (const auto& [b, dep] : tr.depth) {
    if (bg.is_a(b)) continue;
    if (!mate.count(b) && dep == d)
      tr.value[b] = Num::mul(raw.at(b), Num::alpha(st.k, st.exp_of(b)));
    else if (mate.count(b))
      tr.value[b] = raw.at(b);  // attenuation of a matched B-node is 1
  }
  return tr;
}

// Backward pass: suffix sums g(v) over the layered structure (the suffix
// excludes the node's own attenuation), then the path mass through v as
// f(v)*g(v). This equals the proportional-split message passing value: the
// split at a B-node returns each A-sender exactly alpha_b * f(a) of its mass,
// which telescopes to this product.
template <class Num = ExactNum>
void backward_traversal(const BipartiteGraph& bg, const Matching& m, int d, const PathState& st, Traversal<Num>& tr) {
  using T = typename Num::T;
  std::map<NodeId, NodeId> mate;
  for (const auto& e : m.edges) {
    mate[e.u] = e.v;
    mate[e.v] = e.u;
  }
  std::map<NodeId, std::vector<NodeId>> succ;
  for (const auto& [b, ins] : tr.contrib)
    for (const auto& [a, v] : ins) succ[a].push_back(b);

  std::map<NodeId, T> g;
  for (const auto& [b, dep] : tr.depth)
    if (dep == d && !bg.is_a(b) && !mate.count(b)) g.emplace(b, Num::one(st.k));
  for (int t = d - 1; t >= 0; --t) {
    for (const auto& [v, dep] : tr.depth) {
      if (dep != t) continue;
      T sum = Num::zero(st.k);
      if (bg.is_a(v)) {
        auto its = succ.find(v);
        if (its != succ.end())
          for (NodeId b : its->second) {
            auto ig = g.find(b);
            if (ig != g.end() && tr.depth.at(b) == t + 1)
              sum = Num::add(sum, Num::mul(Num::alpha(st.k, st.exp_of(b)), ig->second));
          }
      } else {
        auto im = mate.find(v);
        if (im != mate.end()) {
          auto idp = tr.depth.find(im->second);
          auto ig = g.find(im->second);
          if (idp != tr.depth.end() && idp->second == t + 1 && ig != g.end())
            sum = Num::mul(Num::alpha(st.k, st.exp_of(im->second)), ig->second);
        }
      }
      g[v] = std::move(sum);
    }
  }
  for (const auto& [v, dep] : tr.depth) {
    auto iv = tr.value.find(v);
    auto ig = g.find(v);
    if (iv == tr.value.end() || ig == g.end()) continue;
    tr.through[v] = Num::mul(iv->second, ig->second);
  }
}

// Heavy node: path mass through it at least 1/(10d).
template <class Num = ExactNum>
std::set<NodeId> heavy_nodes(const Traversal<Num>& tr, int d) {
  std::set<NodeId> heavy;
  for (const auto& [v, sum] : tr.through)
    if (Num::at_least_ratio(sum, 1, 10 * static_cast<std::uint64_t>(d))) heavy.insert(v);
  return heavy;
}

// Attenuation update: heavy nodes divide by K^(2d) down to the floor
// ("stuck to the bottom"), everyone else multiplies by K up to its start
// value. Matched B-nodes stay at 1.
inline void update_attenuations(PathState& st, const Traversal<ExactNum>& tr, int d) {
  for (auto& [v, exp] : st.alpha_exp) {
    auto it = tr.through.find(v);
    bool heavy = it != tr.through.end() && ExactNum::at_least_ratio(it->second, 1, 10 * static_cast<std::uint64_t>(d));
    if (heavy)
      exp = std::min(exp + 2 * static_cast<std::uint64_t>(d), st.floor_exp);
    else
      exp = exp > st.cap_exp.at(v) ? exp - 1 : st.cap_exp.at(v);
  }
}

namespace detail {

// Coin with exact rational probability z (up to the 2^-64 resolution of one
// 64-bit draw): heads iff u < z * 2^64.
inline bool coin_krat(const KRat& z, CounterRng& rng) {
  if (z.is_zero()) return false;
  std::uint64_t u = rng.next();
  BigUint lhs(u);
  lhs.mul_pow(z.base(), z.exp());
  BigUint rhs = z.num();
  rhs.shift_left(64);
  return lhs < rhs;
}

}  // namespace detail

// Token-based marking: every non-heavy unmatched B-node reached at depth d
// tosses a coin with probability equal to its path-mass sum and, on heads,
// walks a token backwards link by link, choosing each predecessor with
// probability proportional to the forward contributions. Tokens colliding at a
// node all die; survivors that reach an unmatched A-node mark vertex-disjoint
// augmenting paths.
inline std::vector<AugPath> mark_and_extract(const BipartiteGraph& bg, const Matching& m, int d, const PathState& st,
                                             const Traversal<ExactNum>& tr, std::uint64_t seed, int iteration) {
  std::map<NodeId, NodeId> mate;
  for (const auto& e : m.edges) {
    mate[e.u] = e.v;
    mate[e.v] = e.u;
  }
  struct Token {
    NodeId origin;
    NodeId at;
    std::vector<NodeId> trace;
    bool alive = true;
  };
  std::vector<Token> tokens;
  for (const auto& [b, dep] : tr.depth) {
    if (dep != d || bg.is_a(b) || mate.count(b)) continue;
    const KRat& z = tr.value.at(b);
    if (ExactNum::at_least_ratio(z, 1, 10 * static_cast<std::uint64_t>(d))) continue;  // heavy: no initiation
    CounterRng rng = CounterRng::at(seed, b, static_cast<std::uint64_t>(iteration) * 64);
    if (detail::coin_krat(z, rng)) tokens.push_back({b, b, {b}, true});
  }
  for (int hop = 1; hop <= d; ++hop) {
    // Each live token computes its next node.
    std::map<NodeId, std::vector<std::size_t>> arrivals;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      auto& tok = tokens[i];
      if (!tok.alive) continue;
      NodeId next;
      if (!bg.is_a(tok.at)) {
        // B-node: pick an A-predecessor proportional to forward contributions.
        const auto& ins = tr.contrib.at(tok.at);
        long double total = 0;
        for (const auto& [a, val] : ins) total += ExactNum::to_ld(val);
        CounterRng rng = CounterRng::at(seed, tok.at, static_cast<std::uint64_t>(iteration) * 64 + static_cast<std::uint64_t>(hop));
        long double r = static_cast<long double>(rng.unit()) * total;
        std::size_t pick = 0;
        for (; pick + 1 < ins.size(); ++pick) {
          r -= ExactNum::to_ld(ins[pick].second);
          if (r < 0) break;
        }
        next = ins[pick].first;
      } else {
        next = mate.at(tok.at);  // matched A passes the token to its mate
      }
      tok.trace.push_back(next);
      tok.at = next;
      arrivals[next].push_back(i);
    }
    for (const auto& [node, idxs] : arrivals)
      if (idxs.size() > 1)
        for (auto i : idxs) tokens[i].alive = false;  // collision: all die
  }
  std::vector<AugPath> out;
  for (const auto& tok : tokens) {
    if (!tok.alive) continue;
    // Successful tokens have reached an unmatched A-node after d hops.
    if (static_cast<int>(tok.trace.size()) != d + 1) continue;
    out.push_back(AugPath(tok.trace));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct PhaseParams {
  std::uint32_t k = 2;
  double delta = 0.05;
  double eps = 0.5;           // sets the attenuation floor
  double cap_constant = 10.0;  // good-iteration cap = ceil(c * d * K^(2d) * ln(1/delta))
  int max_iterations = 20000;
};

// Per-iteration bookkeeping, recorded for inspection: how much probability
// mass sat on heavy nodes, what got extracted, who got deactivated.
struct PhaseIterationRecord {
  int iteration = 0;
  int heavy_nodes = 0;
  int extracted_paths = 0;
  int newly_deactivated = 0;
  KRat endpoint_mass;  // total mass held by unmatched B-nodes at depth d
};

struct PhaseResult {
  int iterations = 0;
  std::set<NodeId> deactivated;
  bool completed = true;  // false: iteration budget exhausted with paths left
  std::vector<PhaseIterationRecord> trace;
};

// One length class of the bipartite augmenting-path search: loop
// forward/backward traversals, token marking, augmentation and attenuation
// updates until no length-d augmenting path remains among active nodes.
// Good-iteration counters deactivate nodes that stay heavy-adjacent too long.
inline PhaseResult bipartite_phase(const BipartiteGraph& bg, Matching& m, int d, const PhaseParams& params,
                                   std::uint64_t seed, std::set<NodeId>* deactivated_inout = nullptr) {
  PhaseResult result;
  std::set<NodeId> active;
  for (NodeId v : bg.g.nodes())
    if (!deactivated_inout || !deactivated_inout->count(v)) active.insert(v);
  PathState st = PathState::init(bg, m, params.eps, params.k);
  std::map<NodeId, int> good_count;
  std::uint64_t k2d = 1;
  for (int i = 0; i < 2 * d && k2d < (1ULL << 50); ++i) k2d *= params.k;
  const double cap_raw = params.cap_constant * d * static_cast<double>(k2d) * std::log(1.0 / params.delta);
  const int cap = cap_raw > 1e9 ? INT32_MAX : static_cast<int>(std::ceil(cap_raw));

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    auto tr = forward_traversal<ExactNum>(bg, m, d, st, &active);
    backward_traversal<ExactNum>(bg, m, d, st, tr);
    KRat endpoint_mass = KRat::zero(params.k);
    for (const auto& [b, dep] : tr.depth)
      if (dep == d && !bg.is_a(b) && !m.covers(b)) endpoint_mass += tr.value.at(b);
    if (endpoint_mass.is_zero()) {
      result.iterations = iter - 1;
      return result;
    }
    result.iterations = iter;
    PhaseIterationRecord rec;
    rec.iteration = iter;
    rec.endpoint_mass = endpoint_mass;

    // Light-path mass: rerun the traversal through non-heavy nodes only.
    auto heavy = heavy_nodes(tr, d);
    rec.heavy_nodes = static_cast<int>(heavy.size());
    std::set<NodeId> light_active;
    for (NodeId v : active)
      if (!heavy.count(v)) light_active.insert(v);
    auto tr_light = forward_traversal<ExactNum>(bg, m, d, st, &light_active);
    backward_traversal<ExactNum>(bg, m, d, st, tr_light);
    std::vector<NodeId> newly_deactivated;
    for (NodeId v : active) {
      auto it = tr_light.through.find(v);
      if (it == tr_light.through.end()) continue;
      if (ExactNum::at_least_ratio(it->second, 1, static_cast<std::uint64_t>(d) * k2d)) {
        if (++good_count[v] > cap) newly_deactivated.push_back(v);
      }
    }
    for (NodeId v : newly_deactivated) {
      active.erase(v);
      result.deactivated.insert(v);
      if (deactivated_inout) deactivated_inout->insert(v);
    }
    rec.newly_deactivated = static_cast<int>(newly_deactivated.size());

    auto paths = mark_and_extract(bg, m, d, st, tr, seed, iter);
    for (const auto& p : paths) {
      m = flip(bg.g, m, p);
      for (NodeId v : p.nodes) active.erase(v);  // removed from the problem for this phase
    }
    rec.extracted_paths = static_cast<int>(paths.size());
    result.trace.push_back(std::move(rec));
    update_attenuations(st, tr, d);
  }
  result.completed = false;
  return result;
}

struct CongestRun {
  Matching matching;
  std::set<NodeId> deactivated;
  int stages = 0;
  std::vector<int> phase_iterations;
  bool completed = true;
};

// (1+eps)-approximate maximum cardinality matching in the CONGEST style:
// repeated random 2-colorings give bipartite subgraphs (unmatched nodes plus
// bichromatically matched pairs over bichromatic edges); each stage drains
// augmenting paths of odd lengths up to 2*ceil(1/eps)-1.
inline CongestRun mcm_1eps_congest(const Graph& g, double eps, std::uint64_t seed, PhaseParams params = {}) {
  if (eps <= 0) throw ValidationError("bad_parameter", "eps must be positive");
  params.eps = eps;
  CongestRun run;
  const int per_eps = static_cast<int>(std::ceil(1.0 / eps));
  const int stages = 4 * (1 << per_eps);
  const int max_len = 2 * per_eps - 1;
  for (int stage = 1; stage <= stages; ++stage) {
    run.stages = stage;
    BipartiteGraph bg = random_bichromatic_subgraph(g, run.matching, run.deactivated, seed, static_cast<std::uint64_t>(stage));
    for (int d = 1; d <= max_len; d += 2) {
      auto pr = bipartite_phase(bg, run.matching, d, params, detail::mix_seed(seed, static_cast<std::uint64_t>(stage), static_cast<std::uint64_t>(d), 77),
                                &run.deactivated);
      run.phase_iterations.push_back(pr.iterations);
      run.completed = run.completed && pr.completed;
    }
  }
  return run;
}

// Proposal matching on a bipartite graph: every unmatched A-node proposes on a
// uniformly random remaining edge, every B-node accepts the highest proposer
// id, matched pairs leave with their edges.
inline Matching proposal_2eps_bipartite(const BipartiteGraph& bg, std::uint32_t /*K*/, int rounds, std::uint64_t seed) {
  if (rounds < 1) throw ValidationError("bad_parameter", "rounds must be >= 1");
  Matching m;
  std::map<NodeId, std::vector<NodeId>> remaining;  // per A-node, usable B-neighbors
  std::set<NodeId> matched;
  for (NodeId v : bg.g.nodes())
    if (bg.is_a(v)) {
      auto nbrs = bg.g.neighbors(v);
      remaining[v] = std::vector<NodeId>(nbrs.begin(), nbrs.end());
    }
  for (int round = 1; round <= rounds; ++round) {
    std::map<NodeId, NodeId> best;  // B-node -> highest proposer
    for (auto& [a, nbrs] : remaining) {
      if (matched.count(a) || nbrs.empty()) continue;
      std::erase_if(nbrs, [&](NodeId b) { return matched.count(b); });
      if (nbrs.empty()) continue;
      NodeId pick = nbrs[CounterRng::at(seed, a, static_cast<std::uint64_t>(round)).below(nbrs.size())];
      auto it = best.find(pick);
      if (it == best.end() || it->second < a) best[pick] = a;
    }
    for (const auto& [b, a] : best) {
      m.edges.insert(EdgeId(a, b));
      matched.insert(a);
      matched.insert(b);
    }
  }
  return m;
}

inline int proposal_rounds_for(std::uint32_t k, double eps, int max_degree) {
  double dd = std::max(2, max_degree);
  return static_cast<int>(
      std::ceil(k * std::log(2.0 / eps) + std::log(dd) / std::log(static_cast<double>(k))));
}

// (2+eps)-approximate maximum cardinality matching on general graphs: repeat a
// random left/right split, run the proposal algorithm on the induced bipartite
// subgraph of still-unmatched nodes, keep the found edges.
inline Matching mcm_2eps_alt(const Graph& g, double eps, std::uint64_t seed, std::uint32_t k = 4) {
  if (eps <= 0) throw ValidationError("bad_parameter", "eps must be positive");
  Matching m;
  std::set<NodeId> matched;
  const int reps = std::max(1, static_cast<int>(std::ceil(8.0 * std::log(2.0 / eps))));
  const int rounds = proposal_rounds_for(k, eps, g.max_degree());
  for (int rep = 1; rep <= reps; ++rep) {
    std::map<NodeId, Side> side;
    std::map<NodeId, Weight> nodes;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v : g.nodes()) {
      if (matched.count(v)) continue;
      side[v] = CounterRng::at(seed, v, 5000 + static_cast<std::uint64_t>(rep)).below(2) == 0 ? Side::A : Side::B;
      nodes[v] = 1;
    }
    for (const auto& e : g.edges())
      if (nodes.count(e.u) && nodes.count(e.v) && side[e.u] != side[e.v]) edges.emplace_back(e.u, e.v);
    BipartiteGraph bg = BipartiteGraph::build(Graph::build(edges, nodes), side);
    Matching found = proposal_2eps_bipartite(bg, k, rounds, detail::mix_seed(seed, static_cast<std::uint64_t>(rep), 0, 13));
    for (const auto& e : found.edges) {
      m.edges.insert(e);
      matched.insert(e.u);
      matched.insert(e.v);
    }
  }
  return m;
}

}  // namespace distsim
