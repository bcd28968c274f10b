#pragma once

#include <functional>
#include <memory>
#include <thread>

#include "distsim/graph.hpp"
#include "distsim/rng.hpp"

namespace distsim {

enum class Model : std::uint8_t { congest, local };

struct Message {
  std::uint8_t tag = 0;
  std::vector<std::int64_t> payload;
  int bits = 0;
};

struct EngineConfig {
  Model model = Model::congest;
  int bandwidth_mult = 4;   // c in cap = c * ceil(log2 entities)
  int bandwidth_bits = 0;   // explicit cap; 0 derives from bandwidth_mult
  int max_rounds = 100000;
  std::uint64_t seed = 0;
  bool audit_bits = true;
  bool parallel = false;    // same results required either way

  int cap_for(std::size_t entities) const {
    if (model == Model::local) return 0;  // unbounded
    if (bandwidth_bits > 0) return bandwidth_bits;
    return bandwidth_mult * std::max(1, ceil_log2(entities));
  }
};

struct Violation {
  int round = 0;
  NodeId from = 0, to = 0;
  int bits = 0;
  auto operator<=>(const Violation&) const = default;
};

struct BitLogEntry {
  int round = 0;
  NodeId from = 0, to = 0;
  int bits = 0;
};

struct RunReport {
  int rounds_used = 0;
  int protocol_rounds = 0;  // logical rounds when an executor layers them over engine rounds
  bool completed = true;
  std::vector<NodeId> non_terminal;
  std::vector<int> per_round_max_bits_per_edge;
  std::map<std::uint32_t, std::int64_t> outputs;  // entity -> terminal value
  std::uint64_t seed = 0;
  int bandwidth_cap = 0;
  std::vector<Violation> violations;
  std::vector<BitLogEntry> bit_log;  // populated when auditing
};

// Re-audits a recorded run against a different bandwidth cap.
inline std::vector<Violation> congestion_audit(const RunReport& report, int bandwidth_bits) {
  std::map<std::tuple<int, NodeId, NodeId>, int> totals;
  for (const auto& e : report.bit_log) totals[{e.round, e.from, e.to}] += e.bits;
  std::vector<Violation> out;
  for (const auto& [key, bits] : totals)
    if (bandwidth_bits > 0 && bits > bandwidth_bits)
      out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), bits});
  return out;
}

namespace detail {

// Per-round, per-directed-edge bit accounting shared by all executors.
class BitAuditor {
 public:
  BitAuditor(bool enabled, int cap) : enabled_(enabled), cap_(cap) {}

  void begin_round() { current_.clear(); }

  void add(int round, NodeId from, NodeId to, int bits) {
    if (!enabled_) return;
    current_[{from, to}] += bits;
    log_.push_back({round, from, to, bits});
  }

  void end_round(int round, RunReport& report) {
    int mx = 0;
    for (const auto& [edge, bits] : current_) {
      mx = std::max(mx, bits);
      if (cap_ > 0 && bits > cap_) report.violations.push_back({round, edge.first, edge.second, bits});
    }
    report.per_round_max_bits_per_edge.push_back(mx);
  }

  void finish(RunReport& report) { report.bit_log = std::move(log_); }

 private:
  bool enabled_;
  int cap_;
  std::map<std::pair<NodeId, NodeId>, int> current_;
  std::vector<BitLogEntry> log_;
};

}  // namespace detail

// Handle the engine passes to a node each round. A node sees only its own
// state, its static attributes, and the current inbox.
class NodeContext {
 public:
  NodeContext(NodeId id, int degree, Weight weight, std::span<const NodeId> neighbors, std::uint64_t seed, int round)
      : id_(id), degree_(degree), weight_(weight), neighbors_(neighbors), seed_(seed), round_(round) {}

  NodeId id() const { return id_; }
  int degree() const { return degree_; }
  Weight weight() const { return weight_; }
  std::span<const NodeId> neighbors() const { return neighbors_; }
  int round() const { return round_; }

  CounterRng rng() const { return CounterRng::at(seed_, id_, static_cast<std::uint64_t>(round_)); }

  void send(NodeId to, Message m) { outbox_.emplace_back(to, std::move(m)); }
  void broadcast(const Message& m) {
    for (NodeId to : neighbors_) outbox_.emplace_back(to, m);
  }
  void output(std::int64_t value) { output_ = value; }

  std::vector<std::pair<NodeId, Message>>& outbox() { return outbox_; }
  const std::optional<std::int64_t>& terminal() const { return output_; }

 private:
  NodeId id_;
  int degree_;
  Weight weight_;
  std::span<const NodeId> neighbors_;
  std::uint64_t seed_;
  int round_;
  std::vector<std::pair<NodeId, Message>> outbox_;
  std::optional<std::int64_t> output_;
};

class NodeProcess {
 public:
  virtual ~NodeProcess() = default;
  virtual void init(NodeContext&) {}
  // inbox: messages sent to this node in the previous round, ordered by sender id.
  virtual void on_round(NodeContext&, const std::vector<std::pair<NodeId, Message>>& inbox) = 0;
};

using ProtocolFactory = std::function<std::unique_ptr<NodeProcess>(NodeId)>;

// Runs a per-node protocol in synchronous rounds. Message delivery is exactly
// next-round; per-node randomness is keyed by (seed, node, round) so results
// do not depend on execution order.
inline RunReport run_protocol(const Graph& g, const ProtocolFactory& factory, const EngineConfig& cfg) {
  const auto& nodes = g.nodes();
  const std::size_t n = nodes.size();
  RunReport report;
  report.seed = cfg.seed;
  report.bandwidth_cap = cfg.cap_for(n);
  detail::BitAuditor audit(cfg.audit_bits, report.bandwidth_cap);

  std::vector<std::unique_ptr<NodeProcess>> procs(n);
  std::vector<bool> alive(n, true);
  std::vector<std::vector<std::pair<NodeId, Message>>> inboxes(n);

  for (std::size_t i = 0; i < n; ++i) {
    procs[i] = factory(nodes[i]);
    NodeContext ctx(nodes[i], g.degree(nodes[i]), g.weight(nodes[i]), g.neighbors(nodes[i]), cfg.seed, 0);
    procs[i]->init(ctx);
    if (ctx.terminal()) {
      alive[i] = false;
      report.outputs[nodes[i]] = *ctx.terminal();
    }
  }

  std::size_t alive_count = static_cast<std::size_t>(std::count(alive.begin(), alive.end(), true));
  for (int round = 1; round <= cfg.max_rounds && alive_count > 0; ++round) {
    report.rounds_used = round;
    audit.begin_round();

    std::vector<std::optional<NodeContext>> ctxs(n);
    auto step = [&](std::size_t i) {
      if (!alive[i]) return;
      ctxs[i].emplace(nodes[i], g.degree(nodes[i]), g.weight(nodes[i]), g.neighbors(nodes[i]), cfg.seed, round);
      procs[i]->on_round(*ctxs[i], inboxes[i]);
    };
    if (cfg.parallel && n > 1) {
      const std::size_t workers = 2;
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          for (std::size_t i = w; i < n; i += workers) step(i);
        });
      for (auto& t : pool) t.join();
    } else {
      for (std::size_t i = 0; i < n; ++i) step(i);
    }

    for (auto& box : inboxes) box.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (!ctxs[i]) continue;
      for (auto& [to, msg] : ctxs[i]->outbox()) {
        if (!g.has_edge(nodes[i], to)) throw ValidationError("illegal_send", EdgeId(nodes[i], to).to_string());
        audit.add(round, nodes[i], to, msg.bits);
        std::size_t ti = g.index_of(to);
        if (alive[ti]) inboxes[ti].emplace_back(nodes[i], std::move(msg));
      }
      if (ctxs[i]->terminal()) {
        alive[i] = false;
        --alive_count;
        report.outputs[nodes[i]] = *ctxs[i]->terminal();
      }
    }
    for (auto& box : inboxes)
      std::stable_sort(box.begin(), box.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    audit.end_round(round, report);
  }

  report.protocol_rounds = report.rounds_used;
  report.completed = alive_count == 0;
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) report.non_terminal.push_back(nodes[i]);
  audit.finish(report);
  return report;
}

}  // namespace distsim
