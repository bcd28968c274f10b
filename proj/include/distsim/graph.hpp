#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "distsim/rng.hpp"

namespace distsim {

using NodeId = std::uint32_t;
using Weight = std::int64_t;

constexpr Weight kDefaultMaxWeight = 1 << 20;

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string kind, std::string offender)
      : std::runtime_error(kind + ": " + offender), kind_(std::move(kind)), offender_(std::move(offender)) {}
  const std::string& kind() const { return kind_; }
  const std::string& offender() const { return offender_; }

 private:
  std::string kind_;
  std::string offender_;
};

// Canonical unordered pair with u < v.
struct EdgeId {
  NodeId u = 0, v = 0;
  EdgeId() = default;
  EdgeId(NodeId a, NodeId b) : u(std::min(a, b)), v(std::max(a, b)) {}
  auto operator<=>(const EdgeId&) const = default;
  NodeId other(NodeId x) const { return x == u ? v : u; }
  std::string to_string() const { return "(" + std::to_string(u) + "," + std::to_string(v) + ")"; }
};

using EdgeWeights = std::map<EdgeId, Weight>;

// Undirected weighted graph with stable, not necessarily contiguous node ids.
// Immutable after construction; safe to share read-only across threads.
class Graph {
 public:
  Graph() = default;

  static Graph build(const std::vector<std::pair<NodeId, NodeId>>& edge_list, const std::map<NodeId, Weight>& weights) {
    Graph g;
    g.nodes_.reserve(weights.size());
    for (const auto& [id, w] : weights) {
      if (w < 1) throw ValidationError("non_positive_weight", "node " + std::to_string(id) + " weight " + std::to_string(w));
      g.nodes_.push_back(id);
      g.weights_.push_back(w);
    }
    g.adj_.assign(g.nodes_.size(), {});
    std::set<EdgeId> seen;
    for (const auto& [a, b] : edge_list) {
      if (a == b) throw ValidationError("self_loop", "node " + std::to_string(a));
      auto ia = g.find_index(a), ib = g.find_index(b);
      if (!ia) throw ValidationError("dangling_endpoint", "node " + std::to_string(a));
      if (!ib) throw ValidationError("dangling_endpoint", "node " + std::to_string(b));
      EdgeId e(a, b);
      if (!seen.insert(e).second) throw ValidationError("duplicate_edge", e.to_string());
      g.adj_[*ia].push_back(b);
      g.adj_[*ib].push_back(a);
    }
    for (auto& nbrs : g.adj_) std::sort(nbrs.begin(), nbrs.end());
    return g;
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const {
    std::size_t deg_sum = 0;
    for (const auto& a : adj_) deg_sum += a.size();
    return deg_sum / 2;
  }

  const std::vector<NodeId>& nodes() const { return nodes_; }

  bool has_node(NodeId v) const { return find_index(v).has_value(); }

  std::size_t index_of(NodeId v) const {
    auto i = find_index(v);
    if (!i) throw ValidationError("unknown_node", std::to_string(v));
    return *i;
  }
  NodeId node_at(std::size_t idx) const { return nodes_[idx]; }

  std::span<const NodeId> neighbors(NodeId v) const {
    const auto& a = adj_[index_of(v)];
    return {a.data(), a.size()};
  }

  int degree(NodeId v) const { return static_cast<int>(adj_[index_of(v)].size()); }

  Weight weight(NodeId v) const { return weights_[index_of(v)]; }

  int max_degree() const {
    std::size_t d = 0;
    for (const auto& a : adj_) d = std::max(d, a.size());
    return static_cast<int>(d);
  }

  Weight max_weight() const {
    Weight w = 1;
    for (Weight x : weights_) w = std::max(w, x);
    return w;
  }

  bool has_edge(NodeId a, NodeId b) const {
    if (a == b) return false;
    auto ia = find_index(a);
    if (!ia || !has_node(b)) return false;
    const auto& nbrs = adj_[*ia];
    return std::binary_search(nbrs.begin(), nbrs.end(), b);
  }

  std::vector<EdgeId> edges() const {
    std::vector<EdgeId> es;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      for (NodeId nbr : adj_[i])
        if (nodes_[i] < nbr) es.emplace_back(nodes_[i], nbr);
    std::sort(es.begin(), es.end());
    return es;
  }

  // Subgraph induced by `keep`, node ids and weights preserved.
  Graph induced(const std::set<NodeId>& keep) const {
    std::map<NodeId, Weight> w;
    std::vector<std::pair<NodeId, NodeId>> es;
    for (NodeId v : keep)
      if (has_node(v)) w[v] = weight(v);
    for (const auto& e : edges())
      if (keep.count(e.u) && keep.count(e.v)) es.emplace_back(e.u, e.v);
    return build(es, w);
  }

 private:
  std::optional<std::size_t> find_index(NodeId v) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), v);
    if (it == nodes_.end() || *it != v) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
  }

  std::vector<NodeId> nodes_;             // sorted
  std::vector<Weight> weights_;           // by index
  std::vector<std::vector<NodeId>> adj_;  // by index, sorted neighbor ids
};

struct IndependentSet {
  std::set<NodeId> nodes;
  bool operator==(const IndependentSet&) const = default;
};

struct Matching {
  std::set<EdgeId> edges;
  bool operator==(const Matching&) const = default;

  bool covers(NodeId v) const {
    for (const auto& e : edges)
      if (e.u == v || e.v == v) return true;
    return false;
  }
  std::optional<NodeId> mate(NodeId v) const {
    for (const auto& e : edges) {
      if (e.u == v) return e.v;
      if (e.v == v) return e.u;
    }
    return std::nullopt;
  }
};

struct SolutionCheck {
  bool valid = true;
  Weight weight = 0;
  std::string reason;
};

inline SolutionCheck validate_solution(const Graph& g, const IndependentSet& s) {
  SolutionCheck c;
  for (NodeId v : s.nodes) {
    if (!g.has_node(v)) return {false, 0, "member not in graph: " + std::to_string(v)};
    c.weight += g.weight(v);
  }
  for (NodeId v : s.nodes)
    for (NodeId u : g.neighbors(v))
      if (u > v && s.nodes.count(u)) return {false, 0, "edge inside set: " + EdgeId(v, u).to_string()};
  return c;
}

inline SolutionCheck validate_solution(const Graph& g, const Matching& m, const EdgeWeights* w = nullptr) {
  SolutionCheck c;
  std::set<NodeId> used;
  for (const auto& e : m.edges) {
    if (!g.has_edge(e.u, e.v)) return {false, 0, "edge not in graph: " + e.to_string()};
    if (!used.insert(e.u).second) return {false, 0, "shared endpoint: " + std::to_string(e.u)};
    if (!used.insert(e.v).second) return {false, 0, "shared endpoint: " + std::to_string(e.v)};
    if (w) {
      auto it = w->find(e);
      c.weight += (it == w->end() ? 1 : it->second);
    } else {
      c.weight += 1;
    }
  }
  return c;
}

// One line-graph vertex per original edge. The primary endpoint simulates the
// edge vertex; two edge vertices are adjacent iff they share an endpoint.
struct LineGraphMap {
  std::vector<EdgeId> edge_of;                     // line vertex id -> original edge (sorted order)
  std::vector<NodeId> primary, secondary;          // per line vertex
  std::vector<std::vector<std::uint32_t>> adj;     // line-graph adjacency, sorted

  std::size_t vertex_count() const { return edge_of.size(); }

  std::uint32_t vertex_of(EdgeId e) const {
    auto it = std::lower_bound(edge_of.begin(), edge_of.end(), e);
    if (it == edge_of.end() || !(*it == e)) throw ValidationError("unknown_edge", e.to_string());
    return static_cast<std::uint32_t>(it - edge_of.begin());
  }

  int degree(std::uint32_t lv) const { return static_cast<int>(adj[lv].size()); }

  // Explicit line graph as a node-weighted Graph; line vertex ids become node ids.
  Graph to_graph(const std::vector<Weight>& vertex_weights) const {
    std::map<NodeId, Weight> w;
    for (std::uint32_t i = 0; i < vertex_count(); ++i) w[i] = vertex_weights.empty() ? 1 : vertex_weights[i];
    std::vector<std::pair<NodeId, NodeId>> es;
    for (std::uint32_t i = 0; i < vertex_count(); ++i)
      for (std::uint32_t j : adj[i])
        if (i < j) es.emplace_back(i, j);
    return Graph::build(es, w);
  }
};

// Primary endpoint = smaller node id.
inline LineGraphMap line_graph(const Graph& g) {
  LineGraphMap lg;
  lg.edge_of = g.edges();
  lg.adj.assign(lg.edge_of.size(), {});
  for (std::uint32_t i = 0; i < lg.edge_of.size(); ++i) {
    lg.primary.push_back(lg.edge_of[i].u);
    lg.secondary.push_back(lg.edge_of[i].v);
  }
  // Edges sharing an endpoint: group line vertices per original node.
  std::map<NodeId, std::vector<std::uint32_t>> incident;
  for (std::uint32_t i = 0; i < lg.edge_of.size(); ++i) {
    incident[lg.edge_of[i].u].push_back(i);
    incident[lg.edge_of[i].v].push_back(i);
  }
  for (const auto& [node, group] : incident)
    for (std::size_t a = 0; a < group.size(); ++a)
      for (std::size_t b = a + 1; b < group.size(); ++b) {
        lg.adj[group[a]].push_back(group[b]);
        lg.adj[group[b]].push_back(group[a]);
      }
  for (auto& nbrs : lg.adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return lg;
}

enum class Side : std::uint8_t { A, B };

struct BipartiteGraph {
  Graph g;
  std::map<NodeId, Side> side;

  static BipartiteGraph build(Graph graph, std::map<NodeId, Side> sides) {
    for (NodeId v : graph.nodes())
      if (!sides.count(v)) throw ValidationError("missing_side", std::to_string(v));
    for (const auto& e : graph.edges())
      if (sides.at(e.u) == sides.at(e.v)) throw ValidationError("monochromatic_edge", e.to_string());
    return {std::move(graph), std::move(sides)};
  }

  bool is_a(NodeId v) const { return side.at(v) == Side::A; }
};

enum class GraphKind { erdos_renyi, bipartite, star, path, cycle };

struct GenSpec {
  GraphKind kind = GraphKind::erdos_renyi;
  int n = 0;        // nodes (erdos_renyi, path, cycle) or left side size (bipartite)
  int n_b = 0;      // right side size (bipartite)
  int arms = 0;     // leaves (star)
  double p = 0.0;   // edge probability
  Weight max_weight = 1;
};

// Deterministic per seed: same (spec, seed) gives an identical graph.
inline Graph generate(const GenSpec& spec, std::uint64_t seed) {
  if (spec.max_weight < 1 || spec.max_weight > kDefaultMaxWeight)
    throw ValidationError("weight_range", std::to_string(spec.max_weight));
  std::vector<std::pair<NodeId, NodeId>> edges;
  int n = 0;
  switch (spec.kind) {
    case GraphKind::erdos_renyi: {
      n = spec.n;
      for (NodeId u = 0; u + 1 < static_cast<NodeId>(n); ++u)
        for (NodeId v = u + 1; v < static_cast<NodeId>(n); ++v)
          if (CounterRng::at(seed, (static_cast<std::uint64_t>(u) << 32) | v, 0).unit() < spec.p)
            edges.emplace_back(u, v);
      break;
    }
    case GraphKind::bipartite: {
      n = spec.n + spec.n_b;
      for (NodeId u = 0; u < static_cast<NodeId>(spec.n); ++u)
        for (NodeId v = static_cast<NodeId>(spec.n); v < static_cast<NodeId>(n); ++v)
          if (CounterRng::at(seed, (static_cast<std::uint64_t>(u) << 32) | v, 0).unit() < spec.p)
            edges.emplace_back(u, v);
      break;
    }
    case GraphKind::star: {
      n = spec.arms + 1;
      for (NodeId leaf = 1; leaf <= static_cast<NodeId>(spec.arms); ++leaf) edges.emplace_back(0, leaf);
      break;
    }
    case GraphKind::path: {
      n = spec.n;
      for (NodeId v = 0; v + 1 < static_cast<NodeId>(n); ++v) edges.emplace_back(v, v + 1);
      break;
    }
    case GraphKind::cycle: {
      n = spec.n;
      for (NodeId v = 0; v + 1 < static_cast<NodeId>(n); ++v) edges.emplace_back(v, v + 1);
      if (n >= 3) edges.emplace_back(0, static_cast<NodeId>(n - 1));
      break;
    }
  }
  std::map<NodeId, Weight> weights;
  for (NodeId v = 0; v < static_cast<NodeId>(n); ++v)
    weights[v] = 1 + static_cast<Weight>(CounterRng::at(seed, v, 1).below(static_cast<std::uint64_t>(spec.max_weight)));
  return Graph::build(edges, weights);
}

// Deterministic uniform edge weights in [1, max_weight], keyed by edge.
inline EdgeWeights generate_edge_weights(const Graph& g, Weight max_weight, std::uint64_t seed) {
  EdgeWeights w;
  for (const auto& e : g.edges())
    w[e] = 1 + static_cast<Weight>(
                   CounterRng::at(seed, (static_cast<std::uint64_t>(e.u) << 32) | e.v, 2).below(static_cast<std::uint64_t>(max_weight)));
  return w;
}

// The bipartite view used by the traversal algorithms: unmatched nodes plus
// matched pairs whose edge crosses the 2-coloring, restricted to crossing edges.
inline BipartiteGraph random_bichromatic_subgraph(const Graph& g, const Matching& m, const std::set<NodeId>& excluded,
                                                  std::uint64_t seed, std::uint64_t stage) {
  std::map<NodeId, Side> color;
  for (NodeId v : g.nodes())
    color[v] = CounterRng::at(seed, v, 1000 + stage).below(2) == 0 ? Side::A : Side::B;
  std::set<NodeId> keep;
  for (NodeId v : g.nodes()) {
    if (excluded.count(v)) continue;
    auto mate = m.mate(v);
    if (!mate) {
      keep.insert(v);
    } else if (!excluded.count(*mate) && color[v] != color[*mate]) {
      keep.insert(v);
    }
  }
  std::map<NodeId, Weight> w;
  std::vector<std::pair<NodeId, NodeId>> es;
  for (NodeId v : keep) w[v] = g.weight(v);
  for (const auto& e : g.edges())
    if (keep.count(e.u) && keep.count(e.v) && color[e.u] != color[e.v]) es.emplace_back(e.u, e.v);
  std::map<NodeId, Side> sides;
  for (NodeId v : keep) sides[v] = color[v];
  return BipartiteGraph::build(Graph::build(es, w), sides);
}

}  // namespace distsim
