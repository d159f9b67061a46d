#pragma once

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "capsp/capsp.hpp"
#include "capsp/oracle.hpp"

namespace capsp::testing {

// Reference graph used throughout: w(0,1)=2 w(1,0)=1 w(1,2)=3 w(2,1)=1 w(0,2)=6 w(2,0)=1.
inline WeightedDigraph g3() {
  return validate_graph(3, std::vector<EdgeSpec>{{0, 1, 2}, {1, 0, 1}, {1, 2, 3}, {2, 1, 1}, {0, 2, 6}, {2, 0, 1}});
}

inline Weight weight_of(const WeightedDigraph& g, std::span<const Weight> w, NodeId u, NodeId v) {
  return w[static_cast<std::size_t>(*g.find_edge(u, v))];
}

/// Oracle tables in the layout the distributed code uses: d[k][t] is the
/// distance from sources[k] to t (forward) or from t to sources[k] (reversed).
inline DistTable oracle_table(const WeightedDigraph& g, std::span<const Weight> w, const std::vector<NodeId>& sources,
                              Orientation o = Orientation::kForward) {
  const auto rw = oracle::reversed_weights(g, w);
  DistTable t;
  t.orientation = o;
  t.sources = sources;
  for (NodeId s : sources) {
    auto d = oracle::dijkstra(g, o == Orientation::kForward ? w : std::span<const Weight>(rw), s);
    for (auto& x : d)
      if (x == oracle::kUnreachable) x = kInfinity;
    t.d.push_back(std::move(d));
  }
  return t;
}

inline std::vector<NodeId> all_nodes(NodeId n) {
  std::vector<NodeId> v(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

// Fails the binary if any engine ever broke the one-message-per-edge-round
// rule or the bandwidth budget.
class AuditEnvironment : public ::testing::Environment {
 public:
  void TearDown() override {
    const auto& a = engine_audit();
    EXPECT_LE(a.max_deliveries_per_edge_round, 1);
    EXPECT_EQ(a.bandwidth_violations, 0);
  }
};

inline const auto* const kAudit = ::testing::AddGlobalTestEnvironment(new AuditEnvironment);

}  // namespace capsp::testing
