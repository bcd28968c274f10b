#pragma once

#include "json.hpp"

#include "distsim/engine.hpp"

namespace distsim {

// Structured JSON view of a run report: rounds, outputs, congestion audit.
inline nlohmann::ordered_json report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["rounds"] = {{"engine", r.rounds_used}, {"protocol", r.protocol_rounds}};
  j["completed"] = r.completed;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  for (const auto& [id, v] : r.outputs) outputs[std::to_string(id)] = v;
  j["outputs"] = outputs;
  nlohmann::ordered_json non_terminal = nlohmann::ordered_json::array();
  for (NodeId v : r.non_terminal) non_terminal.push_back(v);
  j["non_terminal"] = non_terminal;
  int max_bits = 0;
  for (int b : r.per_round_max_bits_per_edge) max_bits = std::max(max_bits, b);
  nlohmann::ordered_json violations = nlohmann::ordered_json::array();
  for (const auto& x : r.violations)
    violations.push_back({{"round", x.round}, {"from", x.from}, {"to", x.to}, {"bits", x.bits}});
  j["congestion"] = {{"cap_bits", r.bandwidth_cap}, {"max_bits_per_edge", max_bits}, {"violations", violations}};
  return j;
}

}  // namespace distsim
