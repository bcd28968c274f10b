#pragma once

#include <functional>
#include <map>
#include <optional>

#include "distsim/graph.hpp"
#include "distsim/krational.hpp"

namespace distsim {

struct IsOracleResult {
  Weight value = 0;
  IndependentSet witness;
  std::uint64_t optimum_count = 0;
};

struct MatchingOracleResult {
  Weight value = 0;
  Matching witness;
  std::uint64_t optimum_count = 0;
};

// Exact maximum weight independent set by include/exclude search, n <= 24.
inline IsOracleResult brute_is(const Graph& g) {
  if (g.node_count() > 24) throw ValidationError("oracle_size_guard", "n=" + std::to_string(g.node_count()));
  const auto& nodes = g.nodes();
  IsOracleResult best;
  std::vector<NodeId> chosen;
  std::vector<Weight> suffix_sum(nodes.size() + 1, 0);
  for (std::size_t i = nodes.size(); i-- > 0;) suffix_sum[i] = suffix_sum[i + 1] + g.weight(nodes[i]);

  std::function<void(std::size_t, Weight)> rec = [&](std::size_t i, Weight cur) {
    if (i == nodes.size()) {
      if (best.optimum_count == 0 || cur > best.value) {
        best.value = cur;
        best.witness.nodes = std::set<NodeId>(chosen.begin(), chosen.end());
        best.optimum_count = 1;
      } else if (cur == best.value) {
        ++best.optimum_count;
      }
      return;
    }
    if (cur + suffix_sum[i] < best.value) return;  // cannot reach the optimum
    NodeId v = nodes[i];
    bool free = true;
    for (NodeId c : chosen)
      if (g.has_edge(c, v)) {
        free = false;
        break;
      }
    if (free) {
      chosen.push_back(v);
      rec(i + 1, cur + g.weight(v));
      chosen.pop_back();
    }
    rec(i + 1, cur);
  };
  rec(0, 0);
  return best;
}

// Exact maximum (weight) matching by include/exclude over edges, m <= 24.
inline MatchingOracleResult brute_matching(const Graph& g, const EdgeWeights* w = nullptr) {
  auto es = g.edges();
  if (es.size() > 24) throw ValidationError("oracle_size_guard", "m=" + std::to_string(es.size()));
  MatchingOracleResult best;
  best.optimum_count = 1;  // empty matching attains 0 on edgeless graphs
  std::vector<EdgeId> chosen;
  std::set<NodeId> used;
  auto edge_w = [&](const EdgeId& e) -> Weight {
    if (!w) return 1;
    auto it = w->find(e);
    return it == w->end() ? 1 : it->second;
  };
  std::vector<Weight> suffix(es.size() + 1, 0);
  for (std::size_t i = es.size(); i-- > 0;) suffix[i] = suffix[i + 1] + edge_w(es[i]);

  std::function<void(std::size_t, Weight)> rec = [&](std::size_t i, Weight cur) {
    if (i == es.size()) {
      if (cur > best.value) {
        best.value = cur;
        best.witness.edges = std::set<EdgeId>(chosen.begin(), chosen.end());
        best.optimum_count = 1;
      } else if (cur == best.value) {
        ++best.optimum_count;
      }
      return;
    }
    if (cur + suffix[i] < best.value) return;
    const EdgeId& e = es[i];
    if (!used.count(e.u) && !used.count(e.v)) {
      used.insert(e.u);
      used.insert(e.v);
      chosen.push_back(e);
      rec(i + 1, cur + edge_w(e));
      chosen.pop_back();
      used.erase(e.u);
      used.erase(e.v);
    }
    rec(i + 1, cur);
  };
  rec(0, 0);
  return best;
}

inline bool is_maximal(const Graph& g, const IndependentSet& s) {
  for (NodeId v : g.nodes()) {
    if (s.nodes.count(v)) continue;
    bool blocked = false;
    for (NodeId u : g.neighbors(v))
      if (s.nodes.count(u)) {
        blocked = true;
        break;
      }
    if (!blocked) return false;
  }
  return true;
}

inline bool is_maximal(const Graph& g, const Matching& m) {
  std::set<NodeId> used;
  for (const auto& e : m.edges) {
    used.insert(e.u);
    used.insert(e.v);
  }
  for (const auto& e : g.edges())
    if (!used.count(e.u) && !used.count(e.v)) return false;
  return true;
}

namespace detail {

// Enumerates all simple augmenting paths of exactly `length` edges, restricted
// to `allowed` nodes when given. Paths are canonicalized: smaller endpoint first.
inline std::vector<std::vector<NodeId>> enumerate_aug_paths_impl(const Graph& g, const Matching& m, int length,
                                                                 const std::set<NodeId>* allowed) {
  std::vector<std::vector<NodeId>> out;
  if (length < 1 || length % 2 == 0) return out;
  auto ok = [&](NodeId v) { return !allowed || allowed->count(v); };
  std::map<NodeId, NodeId> mate;
  for (const auto& e : m.edges) {
    mate[e.u] = e.v;
    mate[e.v] = e.u;
  }
  std::vector<NodeId> path;
  std::set<NodeId> on_path;
  std::function<void(NodeId, int, bool)> extend = [&](NodeId v, int remaining, bool need_matched) {
    if (remaining == 0) {
      if (!mate.count(v) && path.front() < path.back()) out.push_back(path);
      return;
    }
    if (need_matched) {
      auto it = mate.find(v);
      if (it == mate.end()) return;
      NodeId u = it->second;
      if (on_path.count(u) || !ok(u)) return;
      path.push_back(u);
      on_path.insert(u);
      extend(u, remaining - 1, false);
      path.pop_back();
      on_path.erase(u);
      return;
    }
    for (NodeId u : g.neighbors(v)) {
      if (on_path.count(u) || !ok(u)) continue;
      if (mate.count(v) && mate.at(v) == u) continue;  // would be a matched edge
      if (remaining == 1 && mate.count(u)) continue;   // must end unmatched
      path.push_back(u);
      on_path.insert(u);
      extend(u, remaining - 1, remaining > 1);
      path.pop_back();
      on_path.erase(u);
    }
  };
  for (NodeId v : g.nodes()) {
    if (mate.count(v) || !ok(v)) continue;
    path.assign(1, v);
    on_path = {v};
    extend(v, length, false);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// Exact shortest augmenting path length; nullopt when none exists.
inline std::optional<int> shortest_aug_len(const Graph& g, const Matching& m, const std::set<NodeId>* allowed = nullptr) {
  for (int len = 1; len <= static_cast<int>(g.node_count()); len += 2)
    if (!detail::enumerate_aug_paths_impl(g, m, len, allowed).empty()) return len;
  return std::nullopt;
}

// Per-node sum over length-d augmenting paths through the node of the product
// of attenuations along the path. alpha maps node -> K^-exponent; absent
// entries mean attenuation 1. Exact rational arithmetic.
inline std::map<NodeId, KRat> path_stats(const BipartiteGraph& bg, const Matching& m, int d,
                                         const std::map<NodeId, std::uint64_t>& alpha_exp, std::uint32_t k) {
  std::map<NodeId, KRat> sums;
  for (NodeId v : bg.g.nodes()) sums[v] = KRat::zero(k);
  for (const auto& path : detail::enumerate_aug_paths_impl(bg.g, m, d, nullptr)) {
    // Augmenting paths here run from an unmatched A-node to an unmatched B-node.
    NodeId a_end = bg.is_a(path.front()) ? path.front() : path.back();
    if (!bg.is_a(a_end)) continue;
    KRat p = KRat::integer(k, 1);
    for (NodeId v : path) {
      auto it = alpha_exp.find(v);
      if (it != alpha_exp.end()) p.mul_inv_pow(it->second);
    }
    for (NodeId v : path) sums[v] += p;
  }
  return sums;
}

// Exact maximum cardinality matching through repeated augmentation; the
// independent cross-check for brute_matching on unit weights.
inline Matching exact_mcm_by_augmentation(const Graph& g) {
  Matching m;
  while (true) {
    auto len = shortest_aug_len(g, m);
    if (!len) return m;
    auto paths = detail::enumerate_aug_paths_impl(g, m, *len, nullptr);
    const auto& p = paths.front();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      EdgeId e(p[i], p[i + 1]);
      if (m.edges.count(e))
        m.edges.erase(e);
      else
        m.edges.insert(e);
    }
  }
}

}  // namespace distsim
