#pragma once

#include <cmath>
#include <functional>

#include "distsim/aggregate.hpp"
#include "distsim/graph.hpp"
#include "distsim/lineagg.hpp"

namespace distsim {

struct NmisParams {
  std::uint32_t k = 4;        // probability base; p ranges over K^-e
  double delta = 0.1;         // residual probability target
  double beta = 10.0;         // round-count scaling constant
  int rounds = 0;             // T; 0 derives beta*(ln max(D,2)/ln K + K^2 ln 1/delta)
  // Test hooks. coin_override pins marking coins (entity, nmis round) -> forced
  // value; stream_override replaces the per-entity randomness stream seed.
  std::function<std::optional<bool>(std::uint32_t, int)> coin_override;
  std::map<std::uint32_t, std::uint64_t> stream_override;

  int rounds_for(int max_degree) const {
    if (rounds > 0) return rounds;
    double d = std::max(max_degree, 2);
    double t = beta * (std::log(d) / std::log(static_cast<double>(k)) +
                       static_cast<double>(k) * static_cast<double>(k) * std::log(1.0 / delta));
    return static_cast<int>(std::ceil(t));
  }
};

enum class NmisStatus : std::uint8_t { Active, AnnJoin, Done };

struct NmisState {
  std::int32_t p_exp = 1;  // p = K^-p_exp, capped at 1/K
  std::int32_t rounds_done = 0;
  NmisStatus status = NmisStatus::Active;
  bool marked = false;
  bool in_mark = false;  // mark phase done, resolve phase next
  bool operator==(const NmisState&) const = default;
};

// Modified nearly-maximal independent set dynamics. Each logical round spans
// two protocol rounds: a mark phase (apply coverage, toss the marking coin)
// and a resolve phase (join when no neighbor marked, update p by the
// effective-degree rule: /K when d >= 2, *K capped at 1/K otherwise).
class NmisProtocol {
 public:
  using State = NmisState;

  static constexpr std::int64_t kOutResidual = 0;
  static constexpr std::int64_t kOutCovered = 1;
  static constexpr std::int64_t kOutInIS = 2;

  enum Agg : int { kAnyJoin = 0, kAnyMark, kDegreeSum, kAggCount };

  NmisProtocol(NmisParams params, int max_degree, std::uint64_t base_seed)
      : params_(std::move(params)), rounds_(params_.rounds_for(max_degree)), base_seed_(base_seed) {}

  int num_aggs() const { return kAggCount; }
  int total_rounds() const { return rounds_; }

  AggValue identity(int a) const {
    if (a == kDegreeSum) return KRat::zero(params_.k);
    return std::int64_t{0};
  }

  AggValue join(int a, const AggValue& x, const AggValue& y) const {
    if (a == kDegreeSum) return agg_rat(x) + agg_rat(y);
    return static_cast<std::int64_t>(agg_int(x) != 0 || agg_int(y) != 0);
  }

  AggValue lift(int a, const State& reader, std::uint32_t, const State& nbr) const {
    switch (a) {
      case kAnyJoin: return static_cast<std::int64_t>(nbr.status == NmisStatus::AnnJoin);
      case kAnyMark: return static_cast<std::int64_t>(nbr.status == NmisStatus::Active && nbr.marked);
      case kDegreeSum:
        // Consumed in resolve phases only; the reader's parity gates the cost.
        if (reader.in_mark && nbr.status == NmisStatus::Active)
          return KRat::inv_pow(params_.k, static_cast<std::uint64_t>(nbr.p_exp));
        return KRat::zero(params_.k);
      default: return std::int64_t{0};
    }
  }

  bool live(int a, const State& s) const {
    if (s.status != NmisStatus::Active) return false;
    if (a == kDegreeSum || a == kAnyMark) return s.in_mark;
    return !s.in_mark;
  }

  int value_bits(int a, const AggValue& v) const {
    if (a == kDegreeSum) return agg_rat(v).bit_size();
    return 1;
  }

  State init(std::uint32_t, Weight, int, CounterRng&) const { return State{}; }

  StepResult<State> step(std::uint32_t id, const State& cur, const std::vector<AggValue>& aggs, CounterRng&,
                         int round) const {
    State s = cur;
    if (cur.status == NmisStatus::AnnJoin) {
      s.status = NmisStatus::Done;
      return {s, kOutInIS};
    }
    if (cur.status == NmisStatus::Done) return {s, std::nullopt};
    const bool mark_phase = (round % 2) == 1;
    if (mark_phase) {
      if (agg_int(aggs[kAnyJoin]) != 0) {
        s.status = NmisStatus::Done;
        return {s, kOutCovered};
      }
      const int nmis_round = (round + 1) / 2;
      if (nmis_round > rounds_) {
        s.status = NmisStatus::Done;
        return {s, kOutResidual};
      }
      s.marked = toss(id, nmis_round, s.p_exp);
      s.in_mark = true;
      return {s, std::nullopt};
    }
    // Resolve phase: join if marked and alone; otherwise adjust p.
    s.in_mark = false;
    if (cur.marked && agg_int(aggs[kAnyMark]) == 0) {
      s.status = NmisStatus::AnnJoin;
      s.marked = false;
      return {s, std::nullopt};
    }
    const KRat& d = agg_rat(aggs[kDegreeSum]);
    if (d.cmp_ratio(2, 1) != std::strong_ordering::less)
      s.p_exp = cur.p_exp + 1;
    else
      s.p_exp = std::max(1, cur.p_exp - 1);
    s.marked = false;
    s.rounds_done = cur.rounds_done + 1;
    return {s, std::nullopt};
  }

  int delta_bits(const State& before, const State& after) const {
    if (before == after) return 0;
    if (after.status == NmisStatus::AnnJoin) return detail::kTagBits;
    if (after.status == NmisStatus::Done) return 0;
    int bits = detail::kTagBits;
    if (after.marked != before.marked) bits += 1;
    if (after.p_exp != before.p_exp) bits += 1;  // direction flag; magnitude is one step
    return bits;
  }

  const NmisParams& params() const { return params_; }

 private:
  bool toss(std::uint32_t id, int nmis_round, std::int32_t p_exp) const {
    if (params_.coin_override) {
      auto forced = params_.coin_override(id, nmis_round);
      if (forced) return *forced;
    }
    std::uint64_t seed = base_seed_;
    auto it = params_.stream_override.find(id);
    if (it != params_.stream_override.end()) seed = it->second;
    CounterRng rng = CounterRng::at(seed, id, static_cast<std::uint64_t>(nmis_round) * 2 + 1);
    return rng.coin_inv_pow(params_.k, static_cast<std::uint32_t>(p_exp));
  }

  NmisParams params_;
  int rounds_;
  std::uint64_t base_seed_;
};

struct NmisRun {
  IndependentSet is;
  std::set<NodeId> residual;
  RunReport report;
  AggTrace<NmisState> trace;
};

inline NmisRun nmis_run(const Graph& g, const NmisParams& params, std::uint64_t seed) {
  NmisProtocol proto(params, g.max_degree(), seed);
  EngineConfig cfg;
  cfg.seed = seed;
  cfg.max_rounds = 2 * proto.total_rounds() + 4;
  NmisRun run;
  run.report = run_agg_on_graph(g, proto, cfg, &run.trace);
  for (const auto& [v, out] : run.report.outputs) {
    if (out == NmisProtocol::kOutInIS) run.is.nodes.insert(v);
    if (out == NmisProtocol::kOutResidual) run.residual.insert(v);
  }
  return run;
}

struct McmEpsRun {
  Matching matching;
  std::set<EdgeId> residual_edges;
  RunReport report;
};

// (2+eps)-approximate maximum cardinality matching: the nearly-maximal IS
// dynamics run on the line graph through the aggregation simulation; residual
// edges are dropped.
inline McmEpsRun mcm_2eps(const Graph& g, double /*eps*/, std::uint64_t seed, NmisParams params = {}) {
  McmEpsRun run;
  LineGraphMap lg = line_graph(g);
  if (lg.vertex_count() == 0) {
    run.report.seed = seed;
    return run;
  }
  int max_deg = 0;
  for (std::uint32_t i = 0; i < lg.vertex_count(); ++i) max_deg = std::max(max_deg, lg.degree(i));
  NmisProtocol proto(params, max_deg, seed);
  EngineConfig cfg;
  cfg.seed = seed;
  cfg.max_rounds = 4 * proto.total_rounds() + 8;
  run.report = simulate_on_line_graph(g, lg, proto, cfg, {});
  for (const auto& [e, out] : run.report.outputs) {
    if (out == NmisProtocol::kOutInIS) run.matching.edges.insert(lg.edge_of[e]);
    if (out == NmisProtocol::kOutResidual) run.residual_edges.insert(lg.edge_of[e]);
  }
  return run;
}

// Weight buckets: big buckets in powers of beta, small buckets in powers of
// (1+eps) within each big bucket. Every weight maps to exactly one pair.
struct WeightBuckets {
  Weight beta = 16;
  double eps = 0.5;

  struct Idx {
    int big = 0;
    int small = 0;
    auto operator<=>(const Idx&) const = default;
  };

  Idx bucket_of(Weight w) const {
    if (w < 1) throw ValidationError("non_positive_weight", std::to_string(w));
    Idx idx;
    Weight base = 1;
    while (base <= w / beta) {
      base *= beta;
      ++idx.big;
    }
    long double t = static_cast<long double>(base);
    while (t * (1.0L + static_cast<long double>(eps)) <= static_cast<long double>(w)) {
      t *= 1.0L + static_cast<long double>(eps);
      ++idx.small;
    }
    return idx;
  }
};

namespace detail {

// Constant-factor weighted matching: per big bucket, descend small buckets
// running the unweighted (2+eps) matcher and removing incident bucket edges;
// across buckets keep each chosen edge only if it carries the lexicographically
// largest (weight, edge) among chosen edges at both endpoints.
inline Matching o1_weighted_matching(const Graph& g, const EdgeWeights& ew, const WeightBuckets& wb, double eps,
                                     std::uint64_t seed, const NmisParams& params, std::uint64_t salt) {
  std::map<int, std::map<int, std::vector<EdgeId>>> buckets;  // big -> small -> edges
  for (const auto& e : g.edges()) {
    auto it = ew.find(e);
    Weight w = it == ew.end() ? 1 : it->second;
    auto idx = wb.bucket_of(w);
    buckets[idx.big][idx.small].push_back(e);
  }
  std::vector<EdgeId> chosen;
  for (const auto& [big, smalls] : buckets) {
    std::set<NodeId> blocked;
    for (auto it = smalls.rbegin(); it != smalls.rend(); ++it) {
      std::vector<EdgeId> active;
      for (const auto& e : it->second)
        if (!blocked.count(e.u) && !blocked.count(e.v)) active.push_back(e);
      if (active.empty()) continue;
      std::map<NodeId, Weight> nodes;
      std::vector<std::pair<NodeId, NodeId>> es;
      for (const auto& e : active) {
        nodes[e.u] = 1;
        nodes[e.v] = 1;
        es.emplace_back(e.u, e.v);
      }
      Graph sub = Graph::build(es, nodes);
      auto sub_run = mcm_2eps(sub, eps, mix_seed(seed, salt, static_cast<std::uint64_t>(big),
                                                 static_cast<std::uint64_t>(it->first)),
                              params);
      for (const auto& e : sub_run.matching.edges) {
        chosen.push_back(e);
        blocked.insert(e.u);
        blocked.insert(e.v);
      }
    }
  }
  auto weight_of = [&](const EdgeId& e) {
    auto it = ew.find(e);
    return it == ew.end() ? Weight{1} : it->second;
  };
  auto lex_less = [&](const EdgeId& a, const EdgeId& b) {
    return std::make_tuple(weight_of(a), a.u, a.v) < std::make_tuple(weight_of(b), b.u, b.v);
  };
  Matching out;
  for (const auto& e : chosen) {
    bool keep = true;
    for (const auto& other : chosen) {
      if (other == e) continue;
      bool shares = other.u == e.u || other.u == e.v || other.v == e.u || other.v == e.v;
      if (shares && lex_less(e, other)) keep = false;
    }
    if (keep) out.edges.insert(e);
  }
  return out;
}

}  // namespace detail

struct MwmEpsRun {
  Matching matching;
  int augment_iterations = 0;
};

// (2+eps)-approximate maximum weight matching: bucketed constant-factor
// matching followed by O(1/eps) rounds of auxiliary-weight augmentation, the
// gain of an unmatched edge being its weight minus the matched weight it
// displaces at its endpoints.
inline MwmEpsRun mwm_2eps(const Graph& g, const EdgeWeights& ew, double eps, std::uint64_t seed, NmisParams params = {}) {
  WeightBuckets wb;
  wb.eps = eps;
  MwmEpsRun run;
  Matching m = detail::o1_weighted_matching(g, ew, wb, eps, seed, params, 0);
  auto weight_of = [&](const EdgeId& e) {
    auto it = ew.find(e);
    return it == ew.end() ? Weight{1} : it->second;
  };
  const int iterations = static_cast<int>(std::ceil(2.0 / eps));
  for (int iter = 1; iter <= iterations; ++iter) {
    std::map<NodeId, EdgeId> matched_at;
    for (const auto& e : m.edges) {
      matched_at.emplace(e.u, e);
      matched_at.emplace(e.v, e);
    }
    EdgeWeights gains;
    for (const auto& e : g.edges()) {
      if (m.edges.count(e)) continue;
      Weight gain = weight_of(e);
      auto iu = matched_at.find(e.u);
      auto iv = matched_at.find(e.v);
      if (iu != matched_at.end()) gain -= weight_of(iu->second);
      if (iv != matched_at.end() && (iu == matched_at.end() || !(iv->second == iu->second))) gain -= weight_of(iv->second);
      if (gain > 0) gains[e] = gain;
    }
    if (gains.empty()) break;
    std::map<NodeId, Weight> nodes;
    std::vector<std::pair<NodeId, NodeId>> es;
    for (const auto& [e, gw] : gains) {
      nodes[e.u] = 1;
      nodes[e.v] = 1;
      es.emplace_back(e.u, e.v);
    }
    Graph sub = Graph::build(es, nodes);
    Matching aug = detail::o1_weighted_matching(sub, gains, wb, eps, seed, params, static_cast<std::uint64_t>(iter));
    if (aug.edges.empty()) break;
    for (const auto& a : aug.edges) {
      auto iu = matched_at.find(a.u);
      if (iu != matched_at.end()) m.edges.erase(iu->second);
      auto iv = matched_at.find(a.v);
      if (iv != matched_at.end()) m.edges.erase(iv->second);
    }
    for (const auto& a : aug.edges) m.edges.insert(a);
    run.augment_iterations = iter;
    // Rebuilt next iteration; the augmentation set is itself a matching, so
    // the result stays one.
    std::map<NodeId, EdgeId> check;
    for (const auto& e : m.edges) {
      if (!check.emplace(e.u, e).second || !check.emplace(e.v, e).second)
        throw ValidationError("augmentation_conflict", e.to_string());
    }
  }
  run.matching = m;
  return run;
}

}  // namespace distsim
