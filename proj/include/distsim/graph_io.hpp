#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "distsim/graph.hpp"

namespace distsim {

// Text edge-list format:
//   n m W
//   u v          (m lines, sorted by (u,v), u < v)
//   v w          (n lines, sorted by v)
//   e u v w      (optional edge-weight lines, sorted; present only when set)
inline std::string to_edge_list_text(const Graph& g, const EdgeWeights* ew = nullptr) {
  std::ostringstream out;
  auto es = g.edges();
  out << g.node_count() << " " << es.size() << " " << g.max_weight() << "\n";
  for (const auto& e : es) out << e.u << " " << e.v << "\n";
  for (NodeId v : g.nodes()) out << v << " " << g.weight(v) << "\n";
  if (ew)
    for (const auto& [e, w] : *ew) out << "e " << e.u << " " << e.v << " " << w << "\n";
  return out.str();
}

struct ParsedGraph {
  Graph g;
  std::optional<EdgeWeights> edge_weights;
};

inline ParsedGraph parse_edge_list_text(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0, m = 0;
  Weight w_cap = 0;
  if (!(in >> n >> m >> w_cap)) throw ValidationError("parse_error", "missing header");
  std::vector<std::pair<NodeId, NodeId>> edges(m);
  for (auto& [u, v] : edges)
    if (!(in >> u >> v)) throw ValidationError("parse_error", "truncated edge list");
  std::map<NodeId, Weight> weights;
  for (std::size_t i = 0; i < n; ++i) {
    NodeId v;
    Weight w;
    if (!(in >> v >> w)) throw ValidationError("parse_error", "truncated weight list");
    if (w > w_cap) throw ValidationError("weight_range", "node " + std::to_string(v));
    weights[v] = w;
  }
  ParsedGraph out;
  std::string tag;
  while (in >> tag) {
    if (tag != "e") throw ValidationError("parse_error", "unexpected token " + tag);
    NodeId u, v;
    Weight w;
    if (!(in >> u >> v >> w)) throw ValidationError("parse_error", "truncated edge weight line");
    if (!out.edge_weights) out.edge_weights.emplace();
    (*out.edge_weights)[EdgeId(u, v)] = w;
  }
  out.g = Graph::build(edges, weights);
  if (out.edge_weights)
    for (const auto& [e, w] : *out.edge_weights) {
      if (!out.g.has_edge(e.u, e.v)) throw ValidationError("unknown_edge", e.to_string());
      if (w < 1) throw ValidationError("non_positive_weight", "edge " + e.to_string());
    }
  return out;
}

inline void write_graph_file(const std::string& path, const Graph& g, const EdgeWeights* ew = nullptr) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("io_error", path);
  f << to_edge_list_text(g, ew);
}

inline ParsedGraph read_graph_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("io_error", path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_edge_list_text(buf.str());
}

}  // namespace distsim
