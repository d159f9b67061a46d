#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "capsp/engine.hpp"
#include "capsp/primitives.hpp"

namespace capsp {

/// One shortest-path tree per sink, oriented toward the sink.
struct SinkTrees {
  std::vector<NodeId> sinks;
  std::vector<std::vector<NodeId>> parent;       // [i][x], -1 at the sink
  std::vector<std::vector<EdgeId>> parent_edge;  // [i][x], edge x -> parent
  std::vector<std::vector<std::vector<EdgeId>>> child_edges;  // [i][x], edges x -> child

  std::size_t size() const { return sinks.size(); }
};

class SinkTreeProgram : public NodeProgram {
 public:
  SinkTreeProgram(const WeightedDigraph& g, WeightView wp, const std::vector<NodeId>& sinks,
                  const std::vector<std::vector<Weight>>& dist_to_sink)
      : g_(&g), wp_(wp), dist_(&dist_to_sink),
        heard_(sinks.size(), std::vector<Weight>(static_cast<std::size_t>(g.m()), kInfinity)),
        reached_(sinks.size(), std::vector<char>(static_cast<std::size_t>(g.n()), 0)) {
    const auto n = static_cast<std::size_t>(g.n());
    trees_.sinks = sinks;
    trees_.parent.assign(sinks.size(), std::vector<NodeId>(n, -1));
    trees_.parent_edge.assign(sinks.size(), std::vector<EdgeId>(n, -1));
    trees_.child_edges.assign(sinks.size(), std::vector<std::vector<EdgeId>>(n));
    for (std::size_t i = 0; i < sinks.size(); ++i) reached_[i][static_cast<std::size_t>(sinks[i])] = 1;
  }

  // Rounds [0, r): exchange distances to every sink. From round r on, a BFS
  // from each sink over tight edges: x joins tree i through the smallest-id
  // tight neighbor that reached it first, so parents strictly decrease the
  // hop count even across zero-weight edges.
  void step(NodeId x, std::int64_t round, std::span<const Envelope> inbox, Outbox& out) override {
    const auto xi = static_cast<std::size_t>(x);
    const auto r = static_cast<std::int64_t>(trees_.size());
    std::vector<std::size_t> joined;
    for (const auto& env : inbox) {
      const auto kind = env.msg.kind;
      if (kind == MessageKind::kDistance) {
        heard_[static_cast<std::size_t>(round - 1)][static_cast<std::size_t>(env.edge)] = env.msg.value(0);
        continue;
      }
      const auto i = static_cast<std::size_t>(env.msg.value(0));
      if (kind == MessageKind::kParentClaim) {
        trees_.child_edges[i][xi].push_back(g_->reverse(env.edge));
        continue;
      }
      if (reached_[i][xi]) continue;
      const EdgeId up = g_->reverse(env.edge);  // x -> sender
      if ((*dist_)[i][xi] != saturating_add(wp_(up), heard_[i][static_cast<std::size_t>(env.edge)])) continue;
      auto& pe = trees_.parent_edge[i][xi];
      if (pe < 0) joined.push_back(i);
      if (pe < 0 || g_->head(up) < g_->head(pe)) pe = up;
    }
    if (round < r) {
      const auto i = static_cast<std::size_t>(round);
      out.send_all(Message::make(MessageKind::kDistance, {trees_.sinks[i]}, {(*dist_)[i][xi]}));
      return;
    }
    if (round == r) {
      for (std::size_t i = 0; i < trees_.size(); ++i)
        if (trees_.sinks[i] == x) out.send_all(Message::make(MessageKind::kToken, {}, {static_cast<std::int64_t>(i)}));
    }
    for (auto i : joined) {
      reached_[i][xi] = 1;
      const EdgeId pe = trees_.parent_edge[i][xi];
      trees_.parent[i][xi] = g_->head(pe);
      for (EdgeId e = g_->first_edge(x); e < g_->end_edge(x); ++e) {
        // The tree index is phase-local knowledge shared by all nodes.
        const auto kind = e == pe ? MessageKind::kParentClaim : MessageKind::kToken;
        out.send(e, Message::make(kind, {}, {static_cast<std::int64_t>(i)}));
      }
    }
  }

  bool has_pending(std::int64_t round) const override { return round < static_cast<std::int64_t>(trees_.size()); }

  SinkTrees take() {
    for (std::size_t i = 0; i < trees_.size(); ++i)
      for (std::size_t x = 0; x < reached_[i].size(); ++x)
        if (!reached_[i][x])
          throw Error(ErrorKind::kNoValidParent, "node " + std::to_string(x) + " has no parent toward sink " +
                                                     std::to_string(trees_.sinks[i]));
    return std::move(trees_);
  }

 private:
  const WeightedDigraph* g_;
  WeightView wp_;
  const std::vector<std::vector<Weight>>* dist_;
  std::vector<std::vector<Weight>> heard_;
  std::vector<std::vector<char>> reached_;
  SinkTrees trees_;
};

/// dist_to_sink[i][x] = dist(x, sinks[i]) as known at x. Parent of x is the
/// smallest-id neighbor y with dist(x) = w'(x,y) + dist(y) among those with
/// the fewest tight hops to the sink.
inline SinkTrees build_sink_trees(RoundEngine& engine, WeightView wp, const std::vector<NodeId>& sinks,
                                  const std::vector<std::vector<Weight>>& dist_to_sink,
                                  std::string_view phase = "rsink-trees") {
  SinkTreeProgram prog(engine.graph(), wp, sinks, dist_to_sink);
  engine.run(phase, prog, static_cast<std::int64_t>(sinks.size()) + engine.n() + 3);
  auto trees = prog.take();
  for (auto& per_tree : trees.child_edges)
    for (auto& c : per_tree) std::sort(c.begin(), c.end());
  return trees;
}

// ---------------------------------------------------------------------------
// Pruning below bottlenecks: blocked[i][x] is set when x or one of its
// ancestors in tree i is a bottleneck.

class BlockDowncastProgram : public NodeProgram {
 public:
  BlockDowncastProgram(const SinkTrees& trees, NodeId b, std::vector<std::vector<char>>& blocked)
      : trees_(&trees), b_(b), blocked_(&blocked) {}

  void step(NodeId x, std::int64_t round, std::span<const Envelope> inbox, Outbox& out) override {
    const auto xi = static_cast<std::size_t>(x);
    if (round == 0 && x == b_) {
      for (std::size_t i = 0; i < trees_->size(); ++i) {
        if ((*blocked_)[i][xi]) continue;
        (*blocked_)[i][xi] = 1;
        forward(i, xi, out);
      }
      return;
    }
    for (const auto& env : inbox) {
      const auto i = static_cast<std::size_t>(env.msg.value(0));
      if ((*blocked_)[i][xi]) continue;
      (*blocked_)[i][xi] = 1;
      forward(i, xi, out);
    }
  }

 private:
  void forward(std::size_t i, std::size_t x, Outbox& out) {
    for (EdgeId e : trees_->child_edges[i][x])
      out.send(e, Message::make(MessageKind::kBottleneckDecision, {}, {static_cast<std::int64_t>(i)}));
  }

  const SinkTrees* trees_;
  NodeId b_;
  std::vector<std::vector<char>>* blocked_;
};

// ---------------------------------------------------------------------------
// Convergecast of per-tree source counts.

class CountProgram : public NodeProgram {
 public:
  CountProgram(const SinkTrees& trees, const std::vector<char>& is_source, const std::vector<std::vector<char>>& blocked)
      : trees_(&trees), is_source_(&is_source), blocked_(&blocked) {
    const auto n = is_source.size();
    count_.assign(trees.size(), std::vector<std::int64_t>(n, 0));
    waiting_.assign(trees.size(), std::vector<std::int32_t>(n, 0));
    ready_.resize(n);
    for (std::size_t i = 0; i < trees.size(); ++i) {
      for (std::size_t x = 0; x < n; ++x) {
        waiting_[i][x] = static_cast<std::int32_t>(trees.child_edges[i][x].size());
        count_[i][x] = (*is_source_)[x] ? 1 : 0;
        if (waiting_[i][x] == 0) ready_[x].push_back(i);
      }
    }
  }

  void step(NodeId x, std::int64_t /*round*/, std::span<const Envelope> inbox, Outbox& out) override {
    const auto xi = static_cast<std::size_t>(x);
    for (const auto& env : inbox) {
      const auto i = static_cast<std::size_t>(env.msg.id(0));
      count_[i][xi] += env.msg.value(0);
      if (--waiting_[i][xi] == 0) ready_[xi].push_back(i);
    }
    for (auto i : ready_[xi]) {
      if ((*blocked_)[i][xi]) count_[i][xi] = 0;
      if (trees_->parent_edge[i][xi] < 0) continue;
      out.send(trees_->parent_edge[i][xi],
               Message::make(MessageKind::kDescendantCount, {static_cast<std::int64_t>(i)}, {count_[i][xi]}));
    }
    ready_[xi].clear();
  }

  std::vector<std::vector<std::int64_t>> take() { return std::move(count_); }

 private:
  const SinkTrees* trees_;
  const std::vector<char>* is_source_;
  const std::vector<std::vector<char>>* blocked_;
  std::vector<std::vector<std::int64_t>> count_;
  std::vector<std::vector<std::int32_t>> waiting_;
  std::vector<std::vector<std::size_t>> ready_;
};

/// counts[i][x]: tracked sources in x's subtree of tree i that are not cut
/// off by a bottleneck; 0 when x is blocked.
inline std::vector<std::vector<std::int64_t>> count_descendants(RoundEngine& engine, const SinkTrees& trees,
                                                                const std::vector<char>& is_source,
                                                                const std::vector<std::vector<char>>& blocked,
                                                                std::string_view phase = "rsink-count") {
  // Tree indices are sent as id-sized fields; r <= n keeps them in range.
  CountProgram prog(trees, is_source, blocked);
  engine.run(phase, prog, static_cast<std::int64_t>(engine.n()) + 3);
  return prog.take();
}

/// Candidates broadcast intent; node 0 picks the smallest id and broadcasts it.
inline std::optional<NodeId> elect_bottleneck(RoundEngine& engine, const BfsTree& tree,
                                              const std::vector<char>& candidate,
                                              std::string_view phase = "rsink-elect") {
  std::vector<std::vector<Message>> held(candidate.size());
  for (std::size_t x = 0; x < candidate.size(); ++x)
    if (candidate[x]) held[x].push_back(Message::make(MessageKind::kBottleneckIntent, {static_cast<std::int64_t>(x)}));
  auto intents = broadcast(engine, tree, std::move(held), phase);
  if (intents.items.empty()) return std::nullopt;
  std::int64_t chosen = intents.items.front().id(0);
  for (const auto& m : intents.items) chosen = std::min(chosen, m.id(0));
  std::vector<std::vector<Message>> decision(candidate.size());
  decision[static_cast<std::size_t>(tree.root)].push_back(Message::make(MessageKind::kBottleneckDecision, {chosen}));
  auto decided = broadcast(engine, tree, std::move(decision), phase);
  return static_cast<NodeId>(decided.items.front().id(0));
}

struct BottleneckInfo {
  NodeId b = -1;
  std::vector<Weight> to_b;    // [x] dist(x, b), known at x
  std::vector<Weight> from_b;  // [x] dist(b, x), known at x
  std::vector<Weight> source_to_b;  // [k] dist(sources[k], b), known everywhere after the broadcast
};

inline BottleneckInfo integrate_bottleneck(RoundEngine& engine, const BfsTree& tree, WeightView wp, NodeId b,
                                           const std::vector<NodeId>& sources,
                                           std::string_view phase = "rsink-integrate") {
  BottleneckInfo info;
  info.b = b;
  info.to_b = bellman_ford(engine, b, wp, Direction::kToSink, phase);
  info.from_b = bellman_ford(engine, b, wp, Direction::kFromSource, phase);
  std::vector<std::vector<Message>> held(static_cast<std::size_t>(engine.n()));
  for (NodeId s : sources)
    held[static_cast<std::size_t>(s)].push_back(
        Message::make(MessageKind::kBroadcastItem, {s}, {info.to_b[static_cast<std::size_t>(s)]}));
  auto got = broadcast(engine, tree, std::move(held), phase);
  info.source_to_b.assign(sources.size(), kInfinity);
  for (const auto& m : got.items) {
    for (std::size_t k = 0; k < sources.size(); ++k)
      if (sources[k] == m.id(0)) info.source_to_b[k] = m.value(0);
  }
  return info;
}

// ---------------------------------------------------------------------------
// Relay: every unblocked tracked source sends its record up each tree; nodes
// forward one record per outgoing edge per round.

struct RelayRecord {
  std::size_t tree = 0;
  std::size_t source = 0;  // index into the source list
  Weight value = 0;
};

class RelayProgram : public NodeProgram {
 public:
  RelayProgram(const SinkTrees& trees, const std::vector<NodeId>& sources,
               const std::vector<std::vector<char>>& blocked, std::vector<std::vector<Weight>> values, NodeId n,
               EdgeId m)
      : trees_(&trees), sources_(&sources), blocked_(&blocked), values_(std::move(values)),
        outq_(static_cast<std::size_t>(m)), active_(static_cast<std::size_t>(n)),
        load_(static_cast<std::size_t>(n), 0),
        received_(trees.size(), std::vector<Weight>(sources.size(), kInfinity)) {}

  void step(NodeId x, std::int64_t round, std::span<const Envelope> inbox, Outbox& out) override {
    const auto xi = static_cast<std::size_t>(x);
    if (round == 0) {
      for (std::size_t k = 0; k < sources_->size(); ++k) {
        if ((*sources_)[k] != x) continue;
        for (std::size_t i = 0; i < trees_->size(); ++i) {
          if (trees_->sinks[i] == x) {
            received_[i][k] = values_[i][k];
          } else if (!(*blocked_)[i][xi]) {
            push(xi, trees_->parent_edge[i][xi], {i, k, values_[i][k]});
          }
        }
      }
    }
    for (const auto& env : inbox) {
      RelayRecord rec{static_cast<std::size_t>(env.msg.id(0)), static_cast<std::size_t>(env.msg.id(1)),
                      env.msg.value(0)};
      if (trees_->sinks[rec.tree] == x) {
        received_[rec.tree][rec.source] = rec.value;
      } else if (!(*blocked_)[rec.tree][xi]) {
        push(xi, trees_->parent_edge[rec.tree][xi], rec);
      }
    }
    auto& act = active_[xi];
    std::size_t keep = 0;
    for (EdgeId e : act) {
      auto& q = outq_[static_cast<std::size_t>(e)];
      const auto& rec = q.front();
      out.send(e, Message::make(MessageKind::kRelayedDistance,
                                {static_cast<std::int64_t>(rec.tree), static_cast<std::int64_t>(rec.source)},
                                {rec.value}));
      q.pop_front();
      if (!q.empty()) act[keep++] = e;
    }
    act.resize(keep);
  }

  bool has_pending(std::int64_t /*round*/) const override {
    for (const auto& a : active_)
      if (!a.empty()) return true;
    return false;
  }

  const std::vector<std::int64_t>& load() const { return load_; }
  std::vector<std::vector<Weight>> take_received() { return std::move(received_); }

 private:
  void push(std::size_t x, EdgeId e, const RelayRecord& rec) {
    auto& q = outq_[static_cast<std::size_t>(e)];
    if (q.empty()) active_[x].push_back(e);
    q.push_back(rec);
    ++load_[x];
  }

  const SinkTrees* trees_;
  const std::vector<NodeId>* sources_;
  const std::vector<std::vector<char>>* blocked_;
  std::vector<std::vector<Weight>> values_;
  std::vector<std::deque<RelayRecord>> outq_;
  std::vector<std::vector<EdgeId>> active_;
  std::vector<std::int64_t> load_;
  std::vector<std::vector<Weight>> received_;
};

struct RsinkResult {
  std::vector<NodeId> sinks;
  std::vector<NodeId> sources;
  /// dist[i][k]: sinks[i]'s final value for dist(sources[k], sinks[i]).
  std::vector<std::vector<Weight>> dist;
  std::vector<NodeId> bottlenecks;
  double g = 0;
  /// Records sent or forwarded by each node during the relay.
  std::vector<std::int64_t> relay_load;
  SinkTrees trees;

  /// The counting bound ceil(q*r/g) on the number of bottlenecks.
  std::int64_t bottleneck_bound() const {
    if (g <= 0) return 0;
    return static_cast<std::int64_t>(
        std::ceil(static_cast<double>(sources.size()) * static_cast<double>(sinks.size()) / g - 1e-9));
  }
};

inline double bottleneck_threshold(std::int64_t n, std::int64_t q, std::int64_t r) {
  return std::sqrt(static_cast<double>(n) * static_cast<double>(q) * static_cast<double>(r));
}

/// Every sink learns its distance from every tracked source. dist_to_sink[i][x]
/// must hold dist(x, sinks[i]) at every node x. offset[i][k] (optional) is a
/// value known to both sources[k] and sinks[i] that is subtracted before a
/// record is relayed and added back at the sink, keeping relayed values small.
inline RsinkResult reversed_rsink(RoundEngine& engine, const BfsTree& tree, WeightView wp,
                                  const std::vector<NodeId>& sinks, const std::vector<NodeId>& sources,
                                  const std::vector<std::vector<Weight>>& dist_to_sink,
                                  std::optional<double> threshold = std::nullopt,
                                  const std::vector<std::vector<Weight>>* offset = nullptr) {
  const auto n = static_cast<std::size_t>(engine.n());
  RsinkResult res;
  res.sinks = sinks;
  res.sources = sources;
  if (sinks.empty()) return res;
  res.g = threshold.value_or(bottleneck_threshold(engine.n(), static_cast<std::int64_t>(sources.size()),
                                                  static_cast<std::int64_t>(sinks.size())));
  res.trees = build_sink_trees(engine, wp, sinks, dist_to_sink);

  std::vector<char> is_source(n, 0), is_sink(n, 0), in_b(n, 0);
  for (NodeId s : sources) is_source[static_cast<std::size_t>(s)] = 1;
  for (NodeId v : sinks) is_sink[static_cast<std::size_t>(v)] = 1;
  std::vector<std::vector<char>> blocked(sinks.size(), std::vector<char>(n, 0));
  std::vector<BottleneckInfo> infos;

  for (;;) {
    const auto counts = count_descendants(engine, res.trees, is_source, blocked);
    std::vector<char> candidate(n, 0);
    for (std::size_t x = 0; x < n; ++x) {
      if (in_b[x] || is_sink[x]) continue;
      std::int64_t total = 0;
      for (std::size_t i = 0; i < sinks.size(); ++i) total += counts[i][x];
      candidate[x] = static_cast<double>(total) > res.g ? 1 : 0;
    }
    auto b = elect_bottleneck(engine, tree, candidate);
    if (!b) break;
    in_b[static_cast<std::size_t>(*b)] = 1;
    res.bottlenecks.push_back(*b);
    BlockDowncastProgram down(res.trees, *b, blocked);
    engine.run("rsink-count", down, static_cast<std::int64_t>(n) + 3);
    infos.push_back(integrate_bottleneck(engine, tree, wp, *b, sources));
  }

  std::vector<std::vector<Weight>> values(sinks.size(), std::vector<Weight>(sources.size(), 0));
  for (std::size_t i = 0; i < sinks.size(); ++i)
    for (std::size_t k = 0; k < sources.size(); ++k)
      values[i][k] = dist_to_sink[i][static_cast<std::size_t>(sources[k])] - (offset ? (*offset)[i][k] : 0);
  RelayProgram relay(res.trees, sources, blocked, std::move(values), engine.n(), engine.graph().m());
  engine.run("rsink-relay", relay, static_cast<std::int64_t>(sources.size() * sinks.size()) + 2 * engine.n() + 3);
  res.relay_load = relay.load();
  auto received = relay.take_received();

  res.dist.assign(sinks.size(), std::vector<Weight>(sources.size(), kInfinity));
  for (std::size_t i = 0; i < sinks.size(); ++i) {
    const auto vi = static_cast<std::size_t>(sinks[i]);
    for (std::size_t k = 0; k < sources.size(); ++k) {
      Weight best = received[i][k] >= kInfinity ? kInfinity : received[i][k] + (offset ? (*offset)[i][k] : 0);
      for (const auto& info : infos)
        best = std::min(best, saturating_add(info.source_to_b[k], info.from_b[vi]));
      res.dist[i][k] = best;
    }
  }
  return res;
}

}  // namespace capsp
