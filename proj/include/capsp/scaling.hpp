#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "capsp/engine.hpp"
#include "capsp/graph.hpp"

namespace capsp {

/// Per-node knowledge of distances from a list of tracked sources.
/// d[k][t] is node t's value for sources[k], measured in the table's
/// orientation (for kReversed, d[k][t] is the distance from t to sources[k]
/// in the original graph).
struct DistTable {
  Orientation orientation = Orientation::kForward;
  std::vector<NodeId> sources;
  std::vector<std::vector<Weight>> d;

  std::size_t size() const { return sources.size(); }

  static DistTable zeros(NodeId n, std::vector<NodeId> sources, Orientation o) {
    DistTable t;
    t.orientation = o;
    t.sources = std::move(sources);
    t.d.assign(t.sources.size(), std::vector<Weight>(static_cast<std::size_t>(n), 0));
    return t;
  }

  /// Row index of source s, or -1.
  int index_of(NodeId s) const {
    for (std::size_t k = 0; k < sources.size(); ++k)
      if (sources[k] == s) return static_cast<int>(k);
    return -1;
  }

  /// Table restricted to a subset of its sources (all must be present).
  DistTable subset(const std::vector<NodeId>& keep) const {
    DistTable t;
    t.orientation = orientation;
    t.sources = keep;
    for (NodeId s : keep) {
      const int k = index_of(s);
      if (k < 0) throw Error(ErrorKind::kInvalidArgument, "source " + std::to_string(s) + " not tracked");
      t.d.push_back(d[static_cast<std::size_t>(k)]);
    }
    return t;
  }
};

/// One scaling iteration: w = level i-1, wprime = level i, b = wprime - 2w.
struct ScalingContext {
  const WeightedDigraph* g = nullptr;
  std::span<const Weight> w;
  std::span<const Weight> wprime;
  std::vector<std::uint8_t> b;

  ScalingContext(const WeightedDigraph& graph, std::span<const Weight> w_level, std::span<const Weight> wprime_level)
      : g(&graph), w(w_level), wprime(wprime_level), b(iteration_bit(w_level, wprime_level)) {}

  WeightView w_view(Orientation o) const { return view(*g, w, o); }
  WeightView wprime_view(Orientation o) const { return view(*g, wprime, o); }
};

/// r[k][e] = 2 dist_w(s_k, tail) + w'(e) - 2 dist_w(s_k, head), with e read
/// in the table's orientation.
struct ReducedWeights {
  Orientation orientation = Orientation::kForward;
  std::vector<NodeId> sources;
  std::vector<std::vector<Weight>> r;
};

inline Weight reduced_weight(Weight dist_tail, Weight wprime_e, Weight dist_head) {
  return 2 * dist_tail + wprime_e - 2 * dist_head;
}

class ExchangeProgram : public NodeProgram {
 public:
  ExchangeProgram(const WeightedDigraph& g, const DistTable& table)
      : table_(&table), heard_(table.size(), std::vector<Weight>(static_cast<std::size_t>(g.m()), -1)) {}

  void step(NodeId v, std::int64_t round, std::span<const Envelope> inbox, Outbox& out) override {
    for (const auto& env : inbox) {
      const auto k = static_cast<std::size_t>(round - 1);
      heard_[k][static_cast<std::size_t>(env.edge)] = env.msg.value(0);
    }
    if (round < static_cast<std::int64_t>(table_->size())) {
      const auto k = static_cast<std::size_t>(round);
      out.send_all(Message::make(MessageKind::kDistance, {table_->sources[k]},
                                 {table_->d[k][static_cast<std::size_t>(v)]}));
    }
  }

  /// heard()[k][e]: value of sources[k] that head(e) received from tail(e).
  const std::vector<std::vector<Weight>>& heard() const { return heard_; }

 private:
  const DistTable* table_;
  std::vector<std::vector<Weight>> heard_;
};

/// Every node sends its table entry for each tracked source to its neighbors
/// (|S| rounds) and computes the reduced weights of its incident edges.
inline ReducedWeights exchange_and_reduce(RoundEngine& engine, const ScalingContext& ctx, const DistTable& table,
                                          std::string_view phase = "exchange") {
  const auto& g = engine.graph();
  for (const auto& row : table.d)
    for (Weight x : row)
      if (x < 0 || x >= kInfinity) throw Error(ErrorKind::kInvalidArgument, "distance table has unknown entries");
  ExchangeProgram prog(g, table);
  engine.run(phase, prog, static_cast<std::int64_t>(table.size()) + 2);

  const WeightView wp = ctx.wprime_view(table.orientation);
  ReducedWeights rw;
  rw.orientation = table.orientation;
  rw.sources = table.sources;
  rw.r.assign(table.size(), std::vector<Weight>(static_cast<std::size_t>(g.m())));
  for (std::size_t k = 0; k < table.size(); ++k) {
    for (EdgeId e = 0; e < g.m(); ++e) {
      const Weight from_tail = prog.heard()[k][static_cast<std::size_t>(e)];
      const Weight r = reduced_weight(from_tail, wp(e), table.d[k][static_cast<std::size_t>(g.head(e))]);
      if (r < 0)
        throw Error(ErrorKind::kNegativeReducedWeight,
                    "source " + std::to_string(table.sources[k]) + " edge " + detail::edge_name(g.tail(e), g.head(e)) +
                        ": r = " + std::to_string(r));
      rw.r[k][static_cast<std::size_t>(e)] = r;
    }
  }
  return rw;
}

/// dist_w'(s,t) from dist_w(s,t) and dist_{r_s}(s,t).
constexpr Weight lift_distance(Weight dist_w_val, Weight dist_rs_val) { return 2 * dist_w_val + dist_rs_val; }

}  // namespace capsp
