#pragma once

#include <variant>

#include "distsim/engine.hpp"
#include "distsim/graph.hpp"
#include "distsim/krational.hpp"

namespace distsim {

// Values of the aggregate alphabet. Integers cover booleans, maxima and
// bounded sums; exact rationals carry probability mass sums.
using AggValue = std::variant<std::int64_t, KRat>;

inline bool agg_equal(const AggValue& a, const AggValue& b) {
  if (a.index() != b.index()) return false;
  if (a.index() == 0) return std::get<0>(a) == std::get<0>(b);
  return std::get<1>(a) == std::get<1>(b);
}

inline std::int64_t agg_int(const AggValue& v) { return std::get<std::int64_t>(v); }
inline const KRat& agg_rat(const AggValue& v) { return std::get<KRat>(v); }

// Order invariance plus the partition-join law, checked on explicit samples.
inline bool check_aggregate(const std::function<AggValue(const AggValue&, const AggValue&)>& join, const AggValue& identity,
                            const std::vector<std::vector<AggValue>>& samples, std::uint64_t seed = 7) {
  auto fold = [&](const std::vector<AggValue>& xs) {
    if (xs.empty()) return identity;
    AggValue acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc = join(acc, xs[i]);
    return acc;
  };
  CounterRng rng = CounterRng::at(seed, 0, 0);
  for (const auto& xs : samples) {
    AggValue ref = fold(xs);
    if (!agg_equal(join(identity, ref), ref)) return false;
    std::vector<AggValue> shuffled = xs;
    for (int trial = 0; trial < 8; ++trial) {
      for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
      if (!agg_equal(fold(shuffled), ref)) return false;
      // Random disjoint bipartition.
      std::vector<AggValue> x1, x2;
      for (const auto& v : xs) (rng.below(2) == 0 ? x1 : x2).push_back(v);
      if (!agg_equal(join(fold(x1), fold(x2)), ref)) return false;
    }
  }
  return true;
}

template <class State>
struct StepResult {
  State next;
  std::optional<std::int64_t> output;
};

template <class State>
struct AggTrace {
  std::vector<std::vector<State>> rounds;  // post-step snapshot per protocol round
};

namespace detail {

constexpr int kTagBits = 3;
// The line executor sends only two message kinds, told apart by direction on
// the edge, so its fold header costs a single bit.
constexpr int kFoldTagBits = 1;

template <class P>
std::vector<AggValue> fold_all(const P& proto, const typename P::State& reader,
                               const std::vector<std::pair<std::uint32_t, const typename P::State*>>& nbrs) {
  std::vector<AggValue> aggs(static_cast<std::size_t>(proto.num_aggs()));
  for (int a = 0; a < proto.num_aggs(); ++a) {
    AggValue acc = proto.identity(a);
    for (const auto& [id, st] : nbrs) acc = proto.join(a, acc, proto.lift(a, reader, id, *st));
    aggs[static_cast<std::size_t>(a)] = std::move(acc);
  }
  return aggs;
}

}  // namespace detail

// Direct execution: one engine round per protocol round, each entity is a
// graph node and broadcasts its state updates to its neighbors.
template <class P>
RunReport run_agg_on_graph(const Graph& g, const P& proto, const EngineConfig& cfg, AggTrace<typename P::State>* trace = nullptr) {
  using State = typename P::State;
  const auto& nodes = g.nodes();
  const std::size_t n = nodes.size();
  RunReport report;
  report.seed = cfg.seed;
  report.bandwidth_cap = cfg.cap_for(n);
  detail::BitAuditor audit(cfg.audit_bits, report.bandwidth_cap);

  std::vector<State> states(n);
  std::vector<bool> terminal(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng = CounterRng::at(cfg.seed, nodes[i], 0);
    states[i] = proto.init(nodes[i], g.weight(nodes[i]), g.degree(nodes[i]), rng);
  }

  std::size_t open = n;
  for (int round = 1; round <= cfg.max_rounds && open > 0; ++round) {
    report.rounds_used = round;
    report.protocol_rounds = round;
    audit.begin_round();
    std::vector<State> prev = states;
    for (std::size_t i = 0; i < n; ++i) {
      if (terminal[i]) continue;
      std::vector<std::pair<std::uint32_t, const State*>> nbrs;
      for (NodeId u : g.neighbors(nodes[i])) nbrs.emplace_back(u, &prev[g.index_of(u)]);
      auto aggs = detail::fold_all(proto, prev[i], nbrs);
      CounterRng rng = CounterRng::at(cfg.seed, nodes[i], static_cast<std::uint64_t>(round));
      StepResult<State> r = proto.step(nodes[i], prev[i], aggs, rng, round);
      states[i] = std::move(r.next);
      if (r.output) {
        terminal[i] = true;
        --open;
        report.outputs[nodes[i]] = *r.output;
      }
      int dbits = proto.delta_bits(prev[i], states[i]);
      if (dbits > 0)
        for (NodeId u : g.neighbors(nodes[i])) audit.add(round, nodes[i], u, dbits);
    }
    audit.end_round(round, report);
    if (trace) trace->rounds.push_back(states);
  }
  report.completed = open == 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!terminal[i]) report.non_terminal.push_back(nodes[i]);
  audit.finish(report);
  return report;
}

// Line-graph execution without congestion overhead: each edge vertex is
// simulated by its primary endpoint, its state mirrored at the secondary.
// Per protocol round, the secondary sends its partial fold over the incident
// edges on its side (one message on the edge itself), the primary joins with
// its own partial fold, steps the protocol, and mirrors the updated state back.
template <class P>
RunReport simulate_on_line_graph(const Graph& g, const LineGraphMap& lg, const P& proto, const EngineConfig& cfg,
                                 const std::vector<Weight>& vertex_weights = {}, AggTrace<typename P::State>* trace = nullptr) {
  using State = typename P::State;
  const std::size_t m = lg.vertex_count();
  RunReport report;
  report.seed = cfg.seed;
  report.bandwidth_cap = cfg.cap_for(std::max(g.node_count(), m));
  detail::BitAuditor audit(cfg.audit_bits, report.bandwidth_cap);

  // Incidence by original node, in line-vertex order.
  std::map<NodeId, std::vector<std::uint32_t>> incident;
  for (std::uint32_t e = 0; e < m; ++e) {
    incident[lg.primary[e]].push_back(e);
    incident[lg.secondary[e]].push_back(e);
  }

  std::vector<State> states(m);
  std::vector<bool> terminal(m, false);
  for (std::uint32_t e = 0; e < m; ++e) {
    CounterRng rng = CounterRng::at(cfg.seed, e, 0);
    Weight w = vertex_weights.empty() ? 1 : vertex_weights[e];
    states[e] = proto.init(e, w, lg.degree(e), rng);
  }

  // Cache of the last transmitted fold message per edge, for silence-is-no-change.
  std::vector<std::vector<std::pair<int, AggValue>>> sent_fold(m);
  std::vector<bool> fold_ever_sent(m, false);

  auto partial_at = [&](NodeId endpoint, std::uint32_t e, const std::vector<State>& snapshot) {
    std::vector<std::pair<std::uint32_t, const State*>> nbrs;
    for (std::uint32_t other : incident[endpoint])
      if (other != e) nbrs.emplace_back(other, &snapshot[other]);
    return detail::fold_all(proto, snapshot[e], nbrs);
  };

  std::size_t open = m;
  int engine_round = 0;
  int proto_round = 0;
  while (open > 0 && engine_round + 2 <= cfg.max_rounds) {
    ++proto_round;
    std::vector<State> prev = states;

    // Fold round: secondary -> primary partial aggregates, per edge.
    ++engine_round;
    report.rounds_used = engine_round;
    audit.begin_round();
    std::vector<std::vector<AggValue>> sec_partial(m);
    for (std::uint32_t e = 0; e < m; ++e) {
      if (terminal[e]) continue;
      sec_partial[e] = partial_at(lg.secondary[e], e, prev);
      std::vector<std::pair<int, AggValue>> content;
      int bits = detail::kFoldTagBits;
      for (int a = 0; a < proto.num_aggs(); ++a)
        if (proto.live(a, prev[e])) {
          content.emplace_back(a, sec_partial[e][static_cast<std::size_t>(a)]);
          bits += proto.value_bits(a, sec_partial[e][static_cast<std::size_t>(a)]);
        }
      bool changed = !fold_ever_sent[e] || content.size() != sent_fold[e].size();
      if (!changed)
        for (std::size_t i = 0; i < content.size(); ++i)
          if (content[i].first != sent_fold[e][i].first || !agg_equal(content[i].second, sent_fold[e][i].second)) {
            changed = true;
            break;
          }
      if (changed) {
        audit.add(engine_round, lg.secondary[e], lg.primary[e], bits);
        sent_fold[e] = std::move(content);
        fold_ever_sent[e] = true;
      }
    }
    audit.end_round(engine_round, report);

    // Step round: primary joins, runs the protocol step, mirrors new state back.
    ++engine_round;
    report.rounds_used = engine_round;
    report.protocol_rounds = proto_round;
    audit.begin_round();
    for (std::uint32_t e = 0; e < m; ++e) {
      if (terminal[e]) continue;
      auto prim_partial = partial_at(lg.primary[e], e, prev);
      std::vector<AggValue> aggs(static_cast<std::size_t>(proto.num_aggs()));
      for (int a = 0; a < proto.num_aggs(); ++a)
        aggs[static_cast<std::size_t>(a)] =
            proto.join(a, prim_partial[static_cast<std::size_t>(a)], sec_partial[e][static_cast<std::size_t>(a)]);
      CounterRng rng = CounterRng::at(cfg.seed, e, static_cast<std::uint64_t>(proto_round));
      StepResult<State> r = proto.step(e, prev[e], aggs, rng, proto_round);
      states[e] = std::move(r.next);
      if (r.output) {
        terminal[e] = true;
        --open;
        report.outputs[e] = *r.output;
      }
      int dbits = proto.delta_bits(prev[e], states[e]);
      if (dbits > 0) audit.add(engine_round, lg.primary[e], lg.secondary[e], dbits);
    }
    audit.end_round(engine_round, report);
    if (trace) trace->rounds.push_back(states);
  }
  report.completed = open == 0;
  for (std::uint32_t e = 0; e < m; ++e)
    if (!terminal[e]) report.non_terminal.push_back(e);
  audit.finish(report);
  return report;
}

}  // namespace distsim
