#pragma once

#include "distsim/aggregate.hpp"
#include "distsim/maxis.hpp"

namespace distsim {

struct MwmRun {
  Matching matching;
  RunReport report;
  AggTrace<MaxisState> trace;
};

inline Matching matching_from_outputs(const LineGraphMap& lg, const std::map<std::uint32_t, std::int64_t>& outputs) {
  Matching m;
  for (const auto& [e, out] : outputs)
    if (out == MaxisProtocol::kOutInIS) m.edges.insert(lg.edge_of[e]);
  return m;
}

inline std::vector<Weight> line_vertex_weights(const LineGraphMap& lg, const EdgeWeights& ew) {
  std::vector<Weight> w(lg.vertex_count(), 1);
  for (std::uint32_t i = 0; i < lg.vertex_count(); ++i) {
    auto it = ew.find(lg.edge_of[i]);
    if (it != ew.end()) w[i] = it->second;
  }
  return w;
}

// 2-approximate maximum weight matching: the chosen MaxIS variant, run on the
// line graph through the aggregation simulation. Edge weights become line
// vertex weights.
inline MwmRun mwm_2approx(const Graph& g, const EdgeWeights& ew, MaxisVariant variant, const EngineConfig& cfg,
                          MisRule rule = {}) {
  LineGraphMap lg = line_graph(g);
  MwmRun run;
  if (lg.vertex_count() == 0) {
    run.report.seed = cfg.seed;
    return run;
  }
  auto weights = line_vertex_weights(lg, ew);
  Weight max_w = 1;
  int max_deg = 0;
  for (Weight w : weights) max_w = std::max(max_w, w);
  for (std::uint32_t i = 0; i < lg.vertex_count(); ++i) max_deg = std::max(max_deg, lg.degree(i));
  MaxisProtocol proto(variant, lg.vertex_count(), max_deg, max_w, rule);
  run.report = simulate_on_line_graph(g, lg, proto, cfg, weights, &run.trace);
  run.matching = matching_from_outputs(lg, run.report.outputs);
  return run;
}

}  // namespace distsim
