#include "support.hpp"

namespace capsp {
namespace {

using testing::g3;

std::vector<std::vector<Weight>> to_sinks(const WeightedDigraph& g, std::span<const Weight> w,
                                          const std::vector<NodeId>& sinks) {
  return testing::oracle_table(g, w, sinks, Orientation::kReversed).d;
}

void expect_valid_trees(const WeightedDigraph& g, std::span<const Weight> w, const SinkTrees& trees,
                        const std::vector<std::vector<Weight>>& dist) {
  const auto n = g.n();
  for (std::size_t i = 0; i < trees.size(); ++i) {
    for (NodeId x = 0; x < n; ++x) {
      const auto xi = static_cast<std::size_t>(x);
      if (x == trees.sinks[i]) {
        EXPECT_EQ(trees.parent[i][xi], -1);
        continue;
      }
      const NodeId p = trees.parent[i][xi];
      ASSERT_GE(p, 0);
      const EdgeId e = trees.parent_edge[i][xi];
      EXPECT_EQ(g.tail(e), x);
      EXPECT_EQ(g.head(e), p);
      EXPECT_EQ(dist[i][xi], w[static_cast<std::size_t>(e)] + dist[i][static_cast<std::size_t>(p)]);
      NodeId y = x;
      int steps = 0;
      while (y != trees.sinks[i] && steps <= n) {
        y = trees.parent[i][static_cast<std::size_t>(y)];
        ++steps;
      }
      EXPECT_EQ(y, trees.sinks[i]) << "cycle in tree " << i;
    }
  }
}

TEST(SinkTrees, G3SinkTwo) {
  const auto g = g3();
  RoundEngine engine(g);
  const auto dist = to_sinks(g, g.weights(), {2});
  EXPECT_EQ(dist[0], (std::vector<Weight>{5, 3, 0}));
  const auto trees = build_sink_trees(engine, view(g, g.weights()), {2}, dist);
  EXPECT_EQ(trees.parent[0], (std::vector<NodeId>{1, 2, -1}));
  expect_valid_trees(g, g.weights(), trees, dist);
}

TEST(SinkTrees, ZeroWeightsStayAcyclic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_graph(20, {1, 400}, seed);
    const auto dec = bit_decompose(g);
    const auto& w = dec.levels[1 + seed % 2];  // plenty of zero-weight edges
    const std::vector<NodeId> sinks{0, 5, 11};
    const auto dist = to_sinks(g, w, sinks);
    RoundEngine engine(g);
    const auto trees = build_sink_trees(engine, view(g, w), sinks, dist);
    expect_valid_trees(g, w, trees, dist);
  }
}

TEST(Count, StarThroughHub) {
  const auto g = star_graph(5, {1, 1});
  RoundEngine engine(g);
  const auto dist = to_sinks(g, g.weights(), {1});
  const auto trees = build_sink_trees(engine, view(g, g.weights()), {1}, dist);
  std::vector<char> all(5, 1);
  std::vector<std::vector<char>> none(1, std::vector<char>(5, 0));
  const auto c = count_descendants(engine, trees, all, none);
  EXPECT_EQ(c[0], (std::vector<std::int64_t>{4, 5, 1, 1, 1}));
  auto blocked = none;
  for (NodeId x : {0, 2, 3, 4}) blocked[0][static_cast<std::size_t>(x)] = 1;
  const auto cb = count_descendants(engine, trees, all, blocked);
  EXPECT_EQ(cb[0], (std::vector<std::int64_t>{0, 1, 0, 0, 0}));
  std::vector<char> only_leaf(5, 0);
  only_leaf[3] = 1;
  EXPECT_EQ(count_descendants(engine, trees, only_leaf, none)[0], (std::vector<std::int64_t>{1, 1, 0, 1, 0}));
}

TEST(Elect, SmallestCandidateWins) {
  const auto g = path_graph(8, {1, 1});
  RoundEngine engine(g);
  const auto tree = build_bfs_tree(engine);
  std::vector<char> cand(8, 0);
  EXPECT_FALSE(elect_bottleneck(engine, tree, cand).has_value());
  cand[7] = cand[3] = 1;
  EXPECT_EQ(elect_bottleneck(engine, tree, cand), 3);
}

TEST(Integrate, G3BottleneckOne) {
  const auto g = g3();
  RoundEngine engine(g);
  const auto tree = build_bfs_tree(engine);
  const auto info = integrate_bottleneck(engine, tree, view(g, g.weights()), 1, {0});
  EXPECT_EQ(info.to_b, (std::vector<Weight>{2, 0, 1}));
  EXPECT_EQ(info.from_b, (std::vector<Weight>{1, 0, 3}));
  EXPECT_EQ(info.source_to_b, (std::vector<Weight>{2}));
}

TEST(Rsink, G3RelayOnly) {
  const auto g = g3();
  RoundEngine engine(g);
  const auto tree = build_bfs_tree(engine);
  const auto res = reversed_rsink(engine, tree, view(g, g.weights()), {2}, {0, 1}, to_sinks(g, g.weights(), {2}), 1e9);
  EXPECT_TRUE(res.bottlenecks.empty());
  EXPECT_EQ(res.dist[0], (std::vector<Weight>{5, 3}));
}

TEST(Rsink, NoSinksIsNoOp) {
  const auto g = g3();
  RoundEngine engine(g);
  const auto tree = build_bfs_tree(engine);
  const auto before = engine.clock();
  const auto res = reversed_rsink(engine, tree, view(g, g.weights()), {}, {0, 1, 2}, {});
  EXPECT_TRUE(res.dist.empty());
  EXPECT_EQ(engine.clock(), before);
}

TEST(Rsink, CompleteGraphLargeThreshold) {
  std::vector<EdgeSpec> edges;
  for (NodeId u = 0; u < 4; ++u)
    for (NodeId v = 0; v < 4; ++v)
      if (u != v) edges.push_back({u, v, 1 + (u * 3 + v) % 5});
  const auto g = validate_graph(4, edges);
  RoundEngine engine(g);
  const auto tree = build_bfs_tree(engine);
  const std::vector<NodeId> sinks{1, 3}, sources{0, 1, 2, 3};
  const auto res = reversed_rsink(engine, tree, view(g, g.weights()), sinks, sources, to_sinks(g, g.weights(), sinks), 1e9);
  EXPECT_TRUE(res.bottlenecks.empty());
  const auto m = oracle::dijkstra_all(g);
  for (std::size_t i = 0; i < sinks.size(); ++i)
    for (std::size_t k = 0; k < sources.size(); ++k)
      EXPECT_EQ(res.dist[i][k], m[static_cast<std::size_t>(sources[k])][static_cast<std::size_t>(sinks[i])]);
}

TEST(Rsink, StarHubBecomesBottleneck) {
  const auto g = star_graph(16, {1, 1});
  RoundEngine engine(g);
  const auto tree = build_bfs_tree(engine);
  const std::vector<NodeId> sinks{1, 2, 3, 4};
  const auto sources = testing::all_nodes(16);
  const auto res = reversed_rsink(engine, tree, view(g, g.weights()), sinks, sources, to_sinks(g, g.weights(), sinks), 8);
  EXPECT_EQ(res.bottlenecks, (std::vector<NodeId>{0}));
  for (std::size_t i = 0; i < sinks.size(); ++i)
    for (std::size_t k = 0; k < sources.size(); ++k) {
      const Weight want = sources[k] == sinks[i] ? 0 : (sources[k] == 0 ? 1 : 2);
      EXPECT_EQ(res.dist[i][k], want);
    }
}

TEST(Rsink, OffsetsCancel) {
  const auto g = random_graph(16, {1, 256}, 4);
  RoundEngine engine(g);
  const auto tree = build_bfs_tree(engine);
  const std::vector<NodeId> sinks{2, 9}, sources{0, 3, 7, 12};
  const auto m = oracle::dijkstra_all(g);
  std::vector<std::vector<Weight>> offset(2, std::vector<Weight>(4));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      offset[i][k] = m[static_cast<std::size_t>(sources[k])][static_cast<std::size_t>(sinks[i])] / 2;
  const auto res =
      reversed_rsink(engine, tree, view(g, g.weights()), sinks, sources, to_sinks(g, g.weights(), sinks), 2.0, &offset);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      EXPECT_EQ(res.dist[i][k], m[static_cast<std::size_t>(sources[k])][static_cast<std::size_t>(sinks[i])]);
}

// Exactness, the bottleneck count bound and the per-node relay load.
TEST(RsinkProperties, RandomGraphs) {
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    const NodeId n = 16 + static_cast<NodeId>(seed % 3) * 8;
    // Raw distances are relayed here, so weights stay small enough to fit the budget.
    const auto g = random_graph(n, {1, Weight(n)}, seed);
    std::mt19937_64 rng(seed);
    std::vector<NodeId> nodes = testing::all_nodes(n);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    const std::size_t r = 1 + seed % 6;
    std::vector<NodeId> sinks(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(r));
    std::sort(sinks.begin(), sinks.end());
    std::vector<NodeId> sources = seed % 2 ? testing::all_nodes(n)
                                           : std::vector<NodeId>(nodes.begin() + 2, nodes.begin() + 2 + n / 2);
    std::sort(sources.begin(), sources.end());
    const std::optional<double> threshold = seed % 3 == 0 ? std::optional<double>(3.0) : std::nullopt;
    RoundEngine engine(g);
    const auto tree = build_bfs_tree(engine);
    const auto dist = to_sinks(g, g.weights(), sinks);
    const auto res = reversed_rsink(engine, tree, view(g, g.weights()), sinks, sources, dist, threshold);
    expect_valid_trees(g, g.weights(), res.trees, dist);
    const auto m = oracle::dijkstra_all(g);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t k = 0; k < sources.size(); ++k)
        EXPECT_EQ(res.dist[i][k], m[static_cast<std::size_t>(sources[k])][static_cast<std::size_t>(sinks[i])]);
    EXPECT_LE(static_cast<std::int64_t>(res.bottlenecks.size()), res.bottleneck_bound());
    for (NodeId x = 0; x < n; ++x) {
      if (std::find(sinks.begin(), sinks.end(), x) != sinks.end()) continue;
      if (std::find(res.bottlenecks.begin(), res.bottlenecks.end(), x) != res.bottlenecks.end()) continue;
      EXPECT_LE(static_cast<double>(res.relay_load[static_cast<std::size_t>(x)]), res.g) << "node " << x;
    }
  }
}

}  // namespace
}  // namespace capsp
