#include "support.hpp"

namespace capsp {
namespace {

using testing::g3;
using testing::oracle_table;

struct Level {
  WeightedDigraph g;
  BitDecomposition dec;
  int i = 1;
  const std::vector<Weight>& w() const { return dec.levels[static_cast<std::size_t>(i - 1)]; }
  const std::vector<Weight>& wp() const { return dec.levels[static_cast<std::size_t>(i)]; }
};

Level level_of(WeightedDigraph g, int i) {
  Level l{std::move(g), {}, i};
  l.dec = bit_decompose(l.g);
  if (l.i <= 0 || l.i > l.dec.beta) l.i = 1 + (l.i - 1 + l.dec.beta) % l.dec.beta;
  return l;
}

std::vector<Weight> rounded(const std::vector<Weight>& r, std::int64_t sigma) {
  std::vector<Weight> out(r.size());
  for (std::size_t e = 0; e < r.size(); ++e) out[e] = round_up(r[e], sigma);
  return out;
}

TEST(RoundUp, SigmaTwo) {
  EXPECT_EQ(round_up(0, 2), 1);
  EXPECT_EQ(round_up(1, 2), 2);
  EXPECT_EQ(round_up(3, 2), 6);
}

TEST(Sigma, SquareRootOfH) {
  EXPECT_EQ(sigma_for(4, 10, 10), 2);
  EXPECT_EQ(sigma_for(5, 10, 10), 3);
  EXPECT_EQ(sigma_for(9, 10, 10), 3);
  EXPECT_EQ(sigma_for(1, 1, 100), 1);
  // q-source form: ceil(sqrt(q h / n)).
  EXPECT_EQ(sigma_for(16, 4, 64), 1);
  EXPECT_EQ(sigma_for(32, 8, 64), 2);
}

TEST(BoundedBfs, G3) {
  const auto l = level_of(g3(), 3);
  const ScalingContext ctx(l.g, l.w(), l.wp());
  RoundEngine engine(l.g);
  const auto rw = exchange_and_reduce(engine, ctx, oracle_table(l.g, l.w(), {0}));
  const auto units = bounded_bfs(engine, rw, 4, 2);
  EXPECT_EQ(units[0][0], 0);
  EXPECT_EQ(units[0][1], 1);
  EXPECT_EQ(units[0][2], 3);
}

TEST(CorrectiveBellmanFord, G3) {
  const auto l = level_of(g3(), 3);
  const ScalingContext ctx(l.g, l.w(), l.wp());
  RoundEngine engine(l.g);
  const auto rw = exchange_and_reduce(engine, ctx, oracle_table(l.g, l.w(), {0}));
  const auto units = bounded_bfs(engine, rw, 4, 2);
  const auto corr = corrective_bellman_ford(engine, rw, units, 4, 2, 4);
  EXPECT_EQ(corr.dist_r[0], (std::vector<Weight>{0, 0, 1}));
}

TEST(ShortRange, G3SourceZero) {
  const auto l = level_of(g3(), 3);
  const ScalingContext ctx(l.g, l.w(), l.wp());
  for (std::int64_t h : {2, 3, 5}) {
    RoundEngine engine(l.g);
    const auto table = oracle_table(l.g, l.w(), {0});
    const auto rw = exchange_and_reduce(engine, ctx, table);
    const auto res = short_range(engine, table, rw, h, sigma_for(h, 1, 3));
    EXPECT_EQ(res.d[0], (std::vector<Weight>{0, 2, 5}));
  }
}

TEST(ShortRange, FlippedGivesDistancesToSource) {
  const auto l = level_of(g3(), 3);
  const ScalingContext ctx(l.g, l.w(), l.wp());
  RoundEngine engine(l.g);
  const auto table = oracle_table(l.g, l.w(), {0, 1, 2}, Orientation::kReversed);
  const auto rw = exchange_and_reduce(engine, ctx, table);
  const auto res = short_range(engine, table, rw, 2, 2);
  // d[k][t] = dist(t, k)
  EXPECT_EQ(res.d[0], (std::vector<Weight>{0, 1, 1}));
  EXPECT_EQ(res.d[2], (std::vector<Weight>{5, 3, 0}));
}

// BFS values versus the oracle on rounded weights, and the rounding error bound.
TEST(ShortRangeProperties, BfsAgainstRoundedOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const NodeId n = 16 + static_cast<NodeId>(seed % 2) * 16;
    const auto l = level_of(random_graph(n, {1, Weight(n) * n}, seed), 1 + static_cast<int>(seed));
    const ScalingContext ctx(l.g, l.w(), l.wp());
    const std::int64_t h = ceil_sqrt(n);
    const auto sigma = sigma_for(h, n, n);
    RoundEngine engine(l.g);
    const auto sources = testing::all_nodes(n);
    const auto rw = exchange_and_reduce(engine, ctx, oracle_table(l.g, l.w(), sources));
    const auto units = bounded_bfs(engine, rw, h, sigma);
    for (NodeId s = 0; s < n; ++s) {
      const auto& r = rw.r[static_cast<std::size_t>(s)];
      const auto rp = rounded(r, sigma);
      const auto truth_units = oracle::dijkstra(l.g, rp, s);
      const auto truth_r = oracle::dijkstra(l.g, r, s);
      const auto ct = oracle::canonical_tree(l.g, r, s);
      for (NodeId t = 0; t < n; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        const auto got = units[static_cast<std::size_t>(s)][ti];
        EXPECT_GE(got, truth_units[ti]);
        if (truth_units[ti] <= static_cast<std::int64_t>(n) * sigma + h) { EXPECT_EQ(got, truth_units[ti]); }
        EXPECT_LE(truth_units[ti] - sigma * truth_r[ti], ct.hops[ti]);
      }
    }
  }
}

TEST(ShortRangeProperties, ExactWithinHHopsAndBudget) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const NodeId n = 16 + static_cast<NodeId>(seed % 2) * 16;
    const auto l = level_of(random_graph(n, {1, Weight(n) * n}, seed + 100), 2 + static_cast<int>(seed));
    const ScalingContext ctx(l.g, l.w(), l.wp());
    const std::int64_t h = 2 + static_cast<std::int64_t>(seed % 4);
    const auto sigma = sigma_for(h, n, n);
    RoundEngine engine(l.g);
    const auto sources = testing::all_nodes(n);
    const auto table = oracle_table(l.g, l.w(), sources);
    const auto rw = exchange_and_reduce(engine, ctx, table);
    const auto res = short_range(engine, table, rw, h, sigma);
    EXPECT_LE(res.max_sends, announcement_budget(h, sigma));
    for (NodeId s = 0; s < n; ++s) {
      const auto ct = oracle::canonical_tree(l.g, l.wp(), s);
      for (NodeId t = 0; t < n; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        EXPECT_GE(res.d[static_cast<std::size_t>(s)][ti], ct.dist[ti]);
        if (ct.hops[ti] <= h) { EXPECT_EQ(res.d[static_cast<std::size_t>(s)][ti], ct.dist[ti]) << s << "->" << t; }
      }
    }
  }
}

TEST(ShortRange, FullHopsCoversEverything) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const NodeId n = 20;
    const auto l = level_of(random_graph(n, {1, 400}, seed), 0);
    const ScalingContext ctx(l.g, l.w(), l.wp());
    RoundEngine engine(l.g);
    const auto sources = testing::all_nodes(n);
    const auto table = oracle_table(l.g, l.w(), sources);
    const auto rw = exchange_and_reduce(engine, ctx, table);
    const auto res = short_range(engine, table, rw, n - 1, sigma_for(n - 1, n, n));
    EXPECT_EQ(res.d, oracle_table(l.g, l.wp(), sources).d);
  }
}

// Where rounding overshoots by more than h units, the gate stops the node
// from announcing its final value.
TEST(CorrectiveBellmanFord, GateClosesOnLargeRoundingError) {
  int witnessed = 0;
  for (std::uint64_t seed = 0; seed < 2000 && witnessed < 3; ++seed) {
    const auto l = level_of(random_graph(6, {1, 36}, seed, 2.0), 1 + static_cast<int>(seed % 3));
    const ScalingContext ctx(l.g, l.w(), l.wp());
    const std::int64_t h = 1, sigma = 1;
    RoundEngine engine(l.g);
    const auto sources = testing::all_nodes(6);
    const auto table = oracle_table(l.g, l.w(), sources);
    const auto rw = exchange_and_reduce(engine, ctx, table);
    const auto units = bounded_bfs(engine, rw, h, sigma);
    const auto corr = corrective_bellman_ford(engine, rw, units, h, sigma, 6);
    for (std::size_t k = 0; k < 6; ++k) {
      for (std::size_t t = 0; t < 6; ++t) {
        const auto init = units[k][t] / sigma;
        if (corr.dist_r[k][t] * sigma >= units[k][t] - h || corr.dist_r[k][t] == init) continue;
        ++witnessed;
        // The start value plus values inside [d' - h, d').
        EXPECT_LE(corr.sends[k][t], 1 + h);
      }
    }
  }
  EXPECT_GT(witnessed, 0);
}

TEST(Extension, AllCentersExact) {
  const NodeId n = 24;
  const auto l = level_of(random_graph(n, {1, 576}, 7), 0);
  const ScalingContext ctx(l.g, l.w(), l.wp());
  RoundEngine engine(l.g);
  const auto sources = testing::all_nodes(n);
  const auto table = oracle_table(l.g, l.w(), sources);
  const auto rw = exchange_and_reduce(engine, ctx, table);
  const auto truth = oracle_table(l.g, l.wp(), sources);
  const auto res = short_range_extension(engine, table, rw, sources, truth.d, 1, 1);
  EXPECT_EQ(res.d, truth.d);
}

TEST(Extension, NoCentersMatchesShortRange) {
  const NodeId n = 24;
  const auto l = level_of(random_graph(n, {1, 576}, 8), 0);
  const ScalingContext ctx(l.g, l.w(), l.wp());
  const auto sources = testing::all_nodes(n);
  const auto table = oracle_table(l.g, l.w(), sources);
  RoundEngine e1(l.g), e2(l.g);
  const auto rw = exchange_and_reduce(e1, ctx, table);
  const auto plain = short_range(e1, table, rw, 3, 2);
  const auto ext = short_range_extension(e2, table, rw, {}, std::vector<std::vector<Weight>>(sources.size()), 3, 2);
  for (NodeId s = 0; s < n; ++s) {
    const auto ct = oracle::canonical_tree(l.g, l.wp(), s);
    for (NodeId t = 0; t < n; ++t) {
      const auto si = static_cast<std::size_t>(s), ti = static_cast<std::size_t>(t);
      EXPECT_GE(ext.d[si][ti], ct.dist[ti]);
      if (ct.hops[ti] <= 3) { EXPECT_EQ(ext.d[si][ti], plain.d[si][ti]); }
    }
  }
}

TEST(Extension, PathWithOneCenter) {
  // s=0 -> c=1 -> 2 -> 3 -> 4 -> t=5: five edges, four after the center.
  const auto l = level_of(path_graph(6, {1, 1}), 0);
  const ScalingContext ctx(l.g, l.w(), l.wp());
  RoundEngine engine(l.g);
  const auto table = oracle_table(l.g, l.w(), {0});
  const auto rw = exchange_and_reduce(engine, ctx, table);
  const auto res = short_range_extension(engine, table, rw, {1}, {{1}}, 4, 2);
  EXPECT_EQ(res.d[0][5], 5);
}

}  // namespace
}  // namespace capsp
