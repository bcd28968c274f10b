#pragma once

#include "distsim/aggregate.hpp"
#include "distsim/graph.hpp"
#include "distsim/oracles.hpp"

namespace distsim {

// Layer index of a positive weight: smallest l with w <= 2^l.
inline int layer_of(Weight w) {
  if (w <= 0) throw ValidationError("non_positive_weight", "layer_of(" + std::to_string(w) + ")");
  return ceil_log2(static_cast<std::uint64_t>(w));
}

enum class MxStatus : std::uint8_t { Waiting, Ready, InMis, Candidate, AnnounceIn, AnnounceOut, Done };

struct MaxisState {
  Weight w = 0;
  Weight cand_w = 0;
  std::int32_t layer = 0;
  std::int32_t color = -1;      // coloring variant; -1 while uncolored
  std::int32_t cand_round = -1;
  std::int64_t luby_word = -1;
  MxStatus status = MxStatus::Waiting;
  bool joined_now = false;      // broadcast reduce(cand_w) this round
  bool operator==(const MaxisState&) const = default;
};

struct MisRule {
  enum class Kind : std::uint8_t { luby, greedy_id } kind = Kind::luby;
  int declared_round_budget = 0;  // informational; luby needs O(log n) phases in expectation
};

enum class MaxisVariant : std::uint8_t { layered, coloring };

// Algorithm state machine for the two distributed MaxIS approximations, written
// as a local aggregation protocol: every neighborhood access is an aggregate
// fold, so one implementation runs natively on a graph and on line graphs.
//
// Removal stage: a node runs the MIS rule only when no neighbor occupies a
// higher layer (or, in the coloring variant, when its color is a local
// maximum); MIS members broadcast reduce(w), zero themselves and become
// candidates; nodes driven to w <= 0 output NotInIS. Addition stage: a
// candidate joins the set once every neighbor it reduced has decided and no
// later candidate neighbor remains, and its neighbors then output NotInIS.
class MaxisProtocol {
 public:
  using State = MaxisState;

  static constexpr std::int64_t kOutNotInIS = 0;
  static constexpr std::int64_t kOutInIS = 1;

  enum Agg : int {
    kReduceSum = 0,   // sum of cand_w over neighbors that joined this round
    kMaxLayer,        // max layer among active neighbors
    kEqUnready,       // any active neighbor at my layer not yet ready
    kMisMax,          // max (word, id) among same-layer MIS participants
    kAnyActive,       // any undecided non-candidate neighbor
    kLaterCand,       // any candidate neighbor with larger cand_round
    kAnyInIs,         // any neighbor announcing InIS
    kMinUncolId,      // min id among uncolored neighbors
    kColorMask,       // or of (1 << color) over colored neighbors
    kMaxColor,        // max color among active neighbors
    kAnyUncol,        // any uncolored neighbor
    kAggCount
  };

  MaxisProtocol(MaxisVariant variant, std::size_t n_entities, int max_degree, Weight max_weight, MisRule rule = {})
      : variant_(variant),
        rule_(rule),
        word_bits_(std::max(1, ceil_log2(std::max<std::size_t>(n_entities, 2)))),
        id_bits_(std::max(1, ceil_log2(std::max<std::size_t>(n_entities, 2)))),
        max_degree_(std::max(1, max_degree)),
        max_weight_(std::max<Weight>(1, max_weight)),
        layer_bits_(bits_for_value(static_cast<std::uint64_t>(layer_of(std::max<Weight>(1, max_weight)) + 1))),
        weight_bits_(bits_for_value(static_cast<std::uint64_t>(max_weight))),
        reduce_bits_(bits_for_value(static_cast<std::uint64_t>(max_degree_) * static_cast<std::uint64_t>(max_weight_))),
        color_bits_(bits_for_value(static_cast<std::uint64_t>(max_degree_) + 1)) {
    if (variant_ == MaxisVariant::coloring && max_degree_ + 1 > 62)
      throw ValidationError("coloring_guard", "max degree " + std::to_string(max_degree_));
  }

  int num_aggs() const { return kAggCount; }

  AggValue identity(int a) const {
    switch (a) {
      case kReduceSum: return std::int64_t{0};
      case kMaxLayer: return std::int64_t{-1};
      case kMisMax: return std::int64_t{-1};
      case kMinUncolId: return std::int64_t{INT64_MAX};
      case kColorMask: return std::int64_t{0};
      case kMaxColor: return std::int64_t{-1};
      default: return std::int64_t{0};  // booleans
    }
  }

  AggValue join(int a, const AggValue& x, const AggValue& y) const {
    std::int64_t l = agg_int(x), r = agg_int(y);
    switch (a) {
      case kReduceSum: return l + r;
      case kMaxLayer:
      case kMisMax:
      case kMaxColor: return std::max(l, r);
      case kMinUncolId: return std::min(l, r);
      case kColorMask: return l | r;
      default: return static_cast<std::int64_t>(l != 0 || r != 0);
    }
  }

  AggValue lift(int a, const State& reader, std::uint32_t nbr_id, const State& nbr) const {
    const bool active = nbr.status == MxStatus::Waiting || nbr.status == MxStatus::Ready || nbr.status == MxStatus::InMis;
    switch (a) {
      case kReduceSum: return nbr.joined_now ? nbr.cand_w : std::int64_t{0};
      case kMaxLayer: return active ? std::int64_t{nbr.layer} : std::int64_t{-1};
      case kEqUnready:
        return static_cast<std::int64_t>(active && nbr.layer == reader.layer && nbr.status != MxStatus::Ready);
      case kMisMax:
        if (nbr.status == MxStatus::InMis && nbr.layer == reader.layer) return pack_word(nbr.luby_word, nbr_id);
        return std::int64_t{-1};
      case kAnyActive: return static_cast<std::int64_t>(active);
      case kLaterCand:
        return static_cast<std::int64_t>(nbr.status == MxStatus::Candidate && nbr.cand_round > reader.cand_round);
      case kAnyInIs: return static_cast<std::int64_t>(nbr.status == MxStatus::AnnounceIn);
      case kMinUncolId: return nbr.color < 0 ? std::int64_t{nbr_id} : std::int64_t{INT64_MAX};
      case kColorMask: return nbr.color >= 0 ? (std::int64_t{1} << nbr.color) : std::int64_t{0};
      case kMaxColor: return active && nbr.color >= 0 ? std::int64_t{nbr.color} : std::int64_t{-1};
      case kAnyUncol: return static_cast<std::int64_t>(nbr.color < 0);
      default: return std::int64_t{0};
    }
  }

  bool live(int a, const State& s) const {
    if (s.status == MxStatus::AnnounceIn || s.status == MxStatus::AnnounceOut || s.status == MxStatus::Done) return false;
    if (s.status == MxStatus::Candidate) return a == kAnyActive || a == kLaterCand || a == kAnyInIs;
    if (variant_ == MaxisVariant::coloring) {
      if (s.color < 0) return a == kMinUncolId || a == kColorMask;
      return a == kReduceSum || a == kMaxColor || a == kAnyUncol || a == kAnyInIs;
    }
    switch (s.status) {
      case MxStatus::Waiting: return a == kReduceSum || a == kMaxLayer || a == kAnyInIs;
      case MxStatus::Ready: return a == kReduceSum || a == kEqUnready || a == kAnyInIs;
      case MxStatus::InMis: return a == kReduceSum || a == kMisMax || a == kAnyInIs;
      default: return false;
    }
  }

  int value_bits(int a, const AggValue& v) const {
    switch (a) {
      case kReduceSum:
        // Variable-width: the partial sum over one endpoint's joiners stays
        // small because simultaneous MIS members there are mutually adjacent.
        return std::max(1, bits_for_value(static_cast<std::uint64_t>(std::max<std::int64_t>(agg_int(v), 1))));
      case kMaxLayer: return layer_bits_ + 1;
      case kMisMax: return word_bits_ + id_bits_;
      case kMinUncolId: return id_bits_;
      case kColorMask: return max_degree_ + 1;
      case kMaxColor: return color_bits_;
      default: return 1;
    }
  }

  State init(std::uint32_t, Weight w, int, CounterRng&) const {
    State s;
    s.w = w;
    s.layer = layer_of(w);
    return s;
  }

  StepResult<State> step(std::uint32_t id, const State& cur, const std::vector<AggValue>& aggs, CounterRng& rng,
                         int round) const {
    State s = cur;
    s.joined_now = false;
    switch (cur.status) {
      case MxStatus::AnnounceIn:
        s.status = MxStatus::Done;
        return {s, kOutInIS};
      case MxStatus::AnnounceOut:
        s.status = MxStatus::Done;
        return {s, kOutNotInIS};
      case MxStatus::Done:
        return {s, std::nullopt};
      case MxStatus::Candidate:
        if (agg_int(aggs[kAnyInIs]) != 0)
          s.status = MxStatus::AnnounceOut;
        else if (agg_int(aggs[kAnyActive]) == 0 && agg_int(aggs[kLaterCand]) == 0)
          s.status = MxStatus::AnnounceIn;
        return {s, std::nullopt};
      default:
        break;
    }
    if (agg_int(aggs[kAnyInIs]) != 0) {
      s.status = MxStatus::AnnounceOut;
      return {s, std::nullopt};
    }
    const std::int64_t red = agg_int(aggs[kReduceSum]);
    if (red > 0) {
      s.w -= red;
      s.luby_word = -1;
      if (s.w <= 0) {
        s.status = MxStatus::AnnounceOut;
        s.layer = -1;
      } else {
        s.layer = layer_of(s.w);
        s.status = MxStatus::Waiting;
      }
      return {s, std::nullopt};
    }
    if (variant_ == MaxisVariant::layered) {
      step_layered(id, s, aggs, rng, round);
    } else {
      step_coloring(id, s, aggs, round);
    }
    return {s, std::nullopt};
  }

  int delta_bits(const State& before, const State& after) const {
    if (before == after) return 0;
    if (after.status == MxStatus::Candidate && before.status != MxStatus::Candidate)
      return detail::kTagBits + weight_bits_;  // reduce(w)
    if (after.status == MxStatus::AnnounceIn || after.status == MxStatus::AnnounceOut) return detail::kTagBits;
    if (after.status == MxStatus::Done) return 0;  // announcement already billed
    if (after.w != before.w) return detail::kTagBits + weight_bits_;  // weightUpdate
    if (after.color != before.color) return detail::kTagBits + color_bits_;
    if (after.status == MxStatus::Ready && before.status != MxStatus::Ready) return detail::kTagBits + layer_bits_;
    if (after.luby_word != before.luby_word) return detail::kTagBits + word_bits_;
    return detail::kTagBits;
  }

  MaxisVariant variant() const { return variant_; }
  const MisRule& rule() const { return rule_; }

 private:
  std::int64_t pack_word(std::int64_t word, std::uint32_t id) const {
    return (word << 32) | static_cast<std::int64_t>(id);
  }

  std::int64_t draw_word(CounterRng& rng) const {
    if (rule_.kind == MisRule::Kind::greedy_id) return 0;
    return static_cast<std::int64_t>(rng.below(std::uint64_t{1} << word_bits_));
  }

  void step_layered(std::uint32_t id, State& s, const std::vector<AggValue>& aggs, CounterRng& rng, int round) const {
    switch (s.status) {
      case MxStatus::Waiting:
        if (agg_int(aggs[kMaxLayer]) <= s.layer) s.status = MxStatus::Ready;
        break;
      case MxStatus::Ready:
        if (agg_int(aggs[kEqUnready]) == 0) {
          s.status = MxStatus::InMis;
          s.luby_word = draw_word(rng);
        }
        break;
      case MxStatus::InMis:
        if (agg_int(aggs[kMisMax]) < pack_word(s.luby_word, id)) {
          make_candidate(s, round);
        } else {
          s.luby_word = draw_word(rng);
        }
        break;
      default:
        break;
    }
  }

  void step_coloring(std::uint32_t id, State& s, const std::vector<AggValue>& aggs, int round) const {
    if (s.color < 0) {
      if (static_cast<std::int64_t>(id) < agg_int(aggs[kMinUncolId])) {
        std::int64_t mask = agg_int(aggs[kColorMask]);
        std::int32_t c = 0;
        while (mask & (std::int64_t{1} << c)) ++c;
        s.color = c;
      }
      return;
    }
    if (agg_int(aggs[kAnyUncol]) == 0 && s.color > agg_int(aggs[kMaxColor])) make_candidate(s, round);
  }

  void make_candidate(State& s, int round) const {
    s.status = MxStatus::Candidate;
    s.cand_w = s.w;
    s.cand_round = round;
    s.joined_now = true;
    s.w = 0;
    s.layer = -1;
  }

  MaxisVariant variant_;
  MisRule rule_;
  int word_bits_, id_bits_, max_degree_;
  Weight max_weight_;
  int layer_bits_, weight_bits_, reduce_bits_, color_bits_;
};

struct MaxisRun {
  IndependentSet is;
  RunReport report;
  AggTrace<MaxisState> trace;
};

inline IndependentSet is_from_outputs(const std::map<std::uint32_t, std::int64_t>& outputs) {
  IndependentSet is;
  for (const auto& [v, out] : outputs)
    if (out == MaxisProtocol::kOutInIS) is.nodes.insert(v);
  return is;
}

inline MaxisRun dist_maxis(const Graph& g, const EngineConfig& cfg, MisRule rule = {}) {
  MaxisProtocol proto(MaxisVariant::layered, g.node_count(), g.max_degree(), g.max_weight(), rule);
  MaxisRun run;
  run.report = run_agg_on_graph(g, proto, cfg, &run.trace);
  run.is = is_from_outputs(run.report.outputs);
  return run;
}

inline MaxisRun coloring_maxis(const Graph& g, const EngineConfig& cfg) {
  MaxisProtocol proto(MaxisVariant::coloring, g.node_count(), g.max_degree(), g.max_weight());
  MaxisRun run;
  run.report = run_agg_on_graph(g, proto, cfg, &run.trace);
  run.is = is_from_outputs(run.report.outputs);
  return run;
}

// Luby-style MIS: the layered protocol on unit weights reduces to exactly one
// MIS phase whose members survive to the output.
inline std::pair<IndependentSet, int> luby_mis(const Graph& g, std::uint64_t seed, int max_rounds = 100000) {
  std::map<NodeId, Weight> unit;
  for (NodeId v : g.nodes()) unit[v] = 1;
  std::vector<std::pair<NodeId, NodeId>> es;
  for (const auto& e : g.edges()) es.emplace_back(e.u, e.v);
  Graph ug = Graph::build(es, unit);
  EngineConfig cfg;
  cfg.seed = seed;
  cfg.max_rounds = max_rounds;
  auto run = dist_maxis(ug, cfg);
  return {run.is, run.report.rounds_used};
}

// Iterated id-minima greedy coloring; proper with at most max_degree+1 colors.
inline std::map<NodeId, std::int32_t> simple_coloring(const Graph& g) {
  struct ColoringOnly {
    using State = MaxisState;
    MaxisProtocol inner;
    explicit ColoringOnly(const Graph& graph)
        : inner(MaxisVariant::coloring, graph.node_count(), graph.max_degree(), graph.max_weight()) {}
    int num_aggs() const { return inner.num_aggs(); }
    AggValue identity(int a) const { return inner.identity(a); }
    AggValue join(int a, const AggValue& x, const AggValue& y) const { return inner.join(a, x, y); }
    AggValue lift(int a, const State& r, std::uint32_t id, const State& n) const { return inner.lift(a, r, id, n); }
    bool live(int a, const State& s) const { return s.color < 0 && (a == MaxisProtocol::kMinUncolId || a == MaxisProtocol::kColorMask); }
    int value_bits(int a, const AggValue& v) const { return inner.value_bits(a, v); }
    State init(std::uint32_t id, Weight w, int d, CounterRng& rng) const { return inner.init(id, w, d, rng); }
    StepResult<State> step(std::uint32_t id, const State& cur, const std::vector<AggValue>& aggs, CounterRng& rng,
                           int round) const {
      if (cur.color >= 0) return {cur, cur.color};
      auto r = inner.step(id, cur, aggs, rng, round);
      if (r.next.color >= 0) return {r.next, r.next.color};
      return r;
    }
    int delta_bits(const State& b, const State& a) const { return inner.delta_bits(b, a); }
  };
  ColoringOnly proto(g);
  EngineConfig cfg;
  auto report = run_agg_on_graph(g, proto, cfg);
  std::map<NodeId, std::int32_t> colors;
  for (const auto& [v, c] : report.outputs) colors[v] = static_cast<std::int32_t>(c);
  return colors;
}

// Sequential local-ratio meta-algorithm. Each level removes non-positive
// nodes, reduces the chosen independent set's weight from its neighborhoods
// (members zero themselves), recurses, and re-adds members without neighbors
// in the deeper solution.
struct SeqLrLevel {
  std::vector<NodeId> chosen;
  std::map<NodeId, Weight> weight_at_choice;
};

using Selector = std::function<std::vector<NodeId>(const Graph&, const std::map<NodeId, Weight>&, const std::set<NodeId>&)>;

inline IndependentSet seq_local_ratio(const Graph& g, const Selector& select, std::vector<SeqLrLevel>* trace = nullptr) {
  std::map<NodeId, Weight> w;
  for (NodeId v : g.nodes()) w[v] = g.weight(v);
  std::vector<SeqLrLevel> levels;
  while (true) {
    std::set<NodeId> alive;
    for (const auto& [v, wv] : w)
      if (wv > 0) alive.insert(v);
    if (alive.empty()) break;
    std::vector<NodeId> chosen = select(g, w, alive);
    if (chosen.empty()) throw ValidationError("selector_empty", "no nodes chosen with alive nodes remaining");
    for (NodeId u : chosen)
      if (!alive.count(u)) throw ValidationError("selector_dead_node", std::to_string(u));
    for (std::size_t i = 0; i < chosen.size(); ++i)
      for (std::size_t j = i + 1; j < chosen.size(); ++j)
        if (g.has_edge(chosen[i], chosen[j]))
          throw ValidationError("selector_dependent_set", EdgeId(chosen[i], chosen[j]).to_string());
    SeqLrLevel level;
    level.chosen = chosen;
    for (NodeId u : chosen) level.weight_at_choice[u] = w[u];
    for (NodeId u : chosen)
      for (NodeId v : g.neighbors(u))
        if (alive.count(v)) w[v] -= level.weight_at_choice[u];
    for (NodeId u : chosen) w[u] = 0;
    levels.push_back(std::move(level));
  }
  IndependentSet result;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    for (NodeId u : it->chosen) {
      bool blocked = false;
      for (NodeId v : g.neighbors(u))
        if (result.nodes.count(v)) {
          blocked = true;
          break;
        }
      if (!blocked) result.nodes.insert(u);
    }
  }
  if (trace) *trace = std::move(levels);
  return result;
}

}  // namespace distsim
