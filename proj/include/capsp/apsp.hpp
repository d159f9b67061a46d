#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "capsp/engine.hpp"
#include "capsp/graph.hpp"
#include "capsp/primitives.hpp"
#include "capsp/reversed_sinks.hpp"
#include "capsp/scaling.hpp"
#include "capsp/short_range.hpp"

namespace capsp {

struct ApspConfig {
  double alpha = 3.0;
  /// Hop parameter override; 0 selects the default for the mode.
  std::int64_t h = 0;
  int bandwidth_factor = 4;
  int max_attempts = 3;
  /// Verify every iteration (the Las Vegas gate).
  bool verify = true;
  /// When the sample would contain every node and h is not overridden, run
  /// without centers at h = n-1 instead.
  bool skip_saturated_centers = true;
  /// Called after each level with the forward tables before and after it.
  std::function<void(int level, const DistTable& before, const DistTable& after)> on_level;
};

inline std::int64_t ceil_sqrt(std::int64_t x) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(x)));
  while (r * r < x) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= x) --r;
  return r;
}

/// zeta = ceil(alpha * base * ln n).
inline std::int64_t center_count(double alpha, double base, std::int64_t n) {
  if (n < 2) return 0;
  return static_cast<std::int64_t>(std::ceil(alpha * base * std::log(static_cast<double>(n)) - 1e-9));
}

/// Node 0 draws `count` distinct ids and broadcasts them.
inline std::vector<NodeId> sample_centers(RoundEngine& engine, const BfsTree& tree, std::int64_t count,
                                          std::uint64_t stream) {
  const auto n = engine.n();
  count = std::clamp<std::int64_t>(count, 0, n);
  std::vector<NodeId> ids(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) ids[static_cast<std::size_t>(v)] = v;
  auto rng = engine.node_rng(tree.root, stream);
  std::vector<NodeId> picked;
  std::sample(ids.begin(), ids.end(), std::back_inserter(picked), count, rng);
  std::vector<std::vector<Message>> held(static_cast<std::size_t>(n));
  for (NodeId c : picked) held[static_cast<std::size_t>(tree.root)].push_back(Message::make(MessageKind::kBroadcastItem, {c}));
  auto got = broadcast(engine, tree, std::move(held), "sample-centers");
  std::vector<NodeId> centers;
  for (const auto& m : got.items) centers.push_back(static_cast<NodeId>(m.id(0)));
  std::sort(centers.begin(), centers.end());
  return centers;
}

// ---------------------------------------------------------------------------
// Distributed verification: a claimed table is accepted iff d(s,s) = 0, no
// edge relaxes any entry, and every t != s has a tight in-edge.

struct VerifyResult {
  bool ok = true;
  /// (source, node) pairs reported by violating nodes.
  std::vector<std::pair<NodeId, NodeId>> witnesses;
};

inline VerifyResult verify_distributed(RoundEngine& engine, const BfsTree& tree, WeightView wp, const DistTable& table,
                                       std::string_view phase = "verify") {
  const auto& g = engine.graph();
  for (const auto& row : table.d)
    for (Weight x : row)
      if (x < 0) throw Error(ErrorKind::kInvalidArgument, "negative table entry");
  ExchangeProgram prog(g, table);
  engine.run(phase, prog, static_cast<std::int64_t>(table.size()) + 2);
  const auto& heard = prog.heard();

  std::vector<std::vector<Message>> held(static_cast<std::size_t>(g.n()));
  for (NodeId t = 0; t < g.n(); ++t) {
    const auto ti = static_cast<std::size_t>(t);
    for (std::size_t k = 0; k < table.size() && held[ti].empty(); ++k) {
      const NodeId s = table.sources[k];
      const Weight d = table.d[k][ti];
      bool bad = false;
      if (t == s) {
        bad = d != 0;
      } else {
        bool tight = false;
        for (EdgeId e = g.first_edge(t); e < g.end_edge(t); ++e) {
          const EdgeId in = g.reverse(e);
          const Weight via = saturating_add(heard[k][static_cast<std::size_t>(in)], wp(in));
          if (via < d) bad = true;
          if (via == d) tight = true;
        }
        bad = bad || !tight || d >= kInfinity;
      }
      if (bad) held[ti].push_back(Message::make(MessageKind::kVerdict, {s, t}));
    }
  }
  auto got = broadcast(engine, tree, std::move(held), phase);
  VerifyResult res;
  for (const auto& m : got.items) res.witnesses.emplace_back(static_cast<NodeId>(m.id(0)), static_cast<NodeId>(m.id(1)));
  std::sort(res.witnesses.begin(), res.witnesses.end());
  res.ok = res.witnesses.empty();
  return res;
}

// ---------------------------------------------------------------------------
// Center-pair broadcast. Each (c', c, d) item is split into id-sized chunks
// so a fragment (c', c, part, chunk) stays within the bandwidth budget.

inline std::vector<std::vector<Weight>> broadcast_center_pairs(RoundEngine& engine, const BfsTree& tree,
                                                               const std::vector<NodeId>& centers,
                                                               const std::vector<std::vector<Weight>>& to_center) {
  const auto r = centers.size();
  const int chunk_bits = id_bits(engine.n());
  const Weight mask = (Weight{1} << chunk_bits) - 1;
  std::vector<std::vector<Message>> held(static_cast<std::size_t>(engine.n()));
  for (std::size_t a = 0; a < r; ++a) {
    const auto ca = static_cast<std::size_t>(centers[a]);
    for (std::size_t b = 0; b < r; ++b) {
      const Weight d = to_center[b][ca];
      if (a == b || d >= kInfinity) continue;
      Weight rest = d;
      std::int64_t part = 0;
      do {
        held[ca].push_back(Message::make(MessageKind::kFragment, {centers[a], centers[b]}, {part, rest & mask}));
        rest >>= chunk_bits;
        ++part;
      } while (rest > 0);
    }
  }
  auto got = broadcast(engine, tree, std::move(held), "broadcast");
  std::vector<std::vector<Weight>> dist(r, std::vector<Weight>(r, kInfinity));
  std::vector<std::vector<Weight>> acc(r, std::vector<Weight>(r, 0));
  std::vector<std::vector<char>> seen(r, std::vector<char>(r, 0));
  auto index = [&centers](std::int64_t c) {
    return static_cast<std::size_t>(std::lower_bound(centers.begin(), centers.end(), c) - centers.begin());
  };
  for (const auto& m : got.items) {
    const auto a = index(m.id(0));
    const auto b = index(m.id(1));
    acc[a][b] += m.value(1) << (chunk_bits * m.value(0));
    seen[a][b] = 1;
  }
  for (std::size_t a = 0; a < r; ++a) {
    dist[a][a] = 0;
    for (std::size_t b = 0; b < r; ++b)
      if (seen[a][b]) dist[a][b] = acc[a][b];
  }
  return dist;
}

/// Shortest center-to-center chains over the broadcast estimates.
inline void close_center_distances(std::vector<std::vector<Weight>>& d) {
  const auto r = d.size();
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t a = 0; a < r; ++a) {
      if (d[a][k] >= kInfinity) continue;
      for (std::size_t b = 0; b < r; ++b) d[a][b] = std::min(d[a][b], saturating_add(d[a][k], d[k][b]));
    }
}

// ---------------------------------------------------------------------------
// One scaling iteration in one orientation.

struct IterationInput {
  const ScalingContext* ctx = nullptr;
  const BfsTree* tree = nullptr;
  Orientation orientation = Orientation::kForward;
  /// dist_w tables: `own` has rows for the tracked sources Q in this
  /// orientation, `other` has rows (at least) for the centers in the opposite one.
  const DistTable* own = nullptr;
  const DistTable* other = nullptr;
  std::vector<NodeId> centers;  // sorted
  std::int64_t h = 0;
  std::int64_t sigma = 1;
};

struct IterationResult {
  DistTable table;  // dist_w' for the tracked sources, same orientation
  std::optional<ShortRangeResult> flipped;
  std::vector<std::vector<Weight>> to_center;  // [j][t] estimate of dist(t, c_j)
  std::optional<RsinkResult> rsink;
  ShortRangeResult extension;
};

inline IterationResult run_iteration(RoundEngine& engine, const IterationInput& in) {
  const auto& ctx = *in.ctx;
  const auto o = in.orientation;
  const auto n = static_cast<std::size_t>(engine.n());
  IterationResult out;
  const auto rw = exchange_and_reduce(engine, ctx, *in.own);
  std::vector<std::vector<Weight>> center_dist;

  if (!in.centers.empty()) {
    const DistTable flip_table = in.other->subset(in.centers);
    const auto rw_flip = exchange_and_reduce(engine, ctx, flip_table);
    const auto flipped_sigma = sigma_for(in.h, static_cast<std::int64_t>(in.centers.size()), engine.n());
    out.flipped = short_range(engine, flip_table, rw_flip, in.h, flipped_sigma);

    auto pairs = broadcast_center_pairs(engine, *in.tree, in.centers, out.flipped->d);
    close_center_distances(pairs);
    const auto r = in.centers.size();
    out.to_center.assign(r, std::vector<Weight>(n, kInfinity));
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t c1 = 0; c1 < r; ++c1) {
        const Weight first = out.flipped->d[c1][t];
        if (first >= kInfinity) continue;
        for (std::size_t c = 0; c < r; ++c)
          out.to_center[c][t] = std::min(out.to_center[c][t], saturating_add(first, pairs[c1][c]));
      }

    std::vector<std::vector<Weight>> offset(r, std::vector<Weight>(in.own->size()));
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t k = 0; k < in.own->size(); ++k)
        offset[j][k] = 2 * in.own->d[k][static_cast<std::size_t>(in.centers[j])];
    out.rsink = reversed_rsink(engine, *in.tree, ctx.wprime_view(o), in.centers, in.own->sources, out.to_center,
                               std::nullopt, &offset);
    center_dist.assign(in.own->size(), std::vector<Weight>(r));
    for (std::size_t k = 0; k < in.own->size(); ++k)
      for (std::size_t j = 0; j < r; ++j) center_dist[k][j] = out.rsink->dist[j][k];
  }
  out.extension = short_range_extension(engine, *in.own, rw, in.centers, center_dist, in.h, in.sigma);
  out.table.orientation = o;
  out.table.sources = in.own->sources;
  out.table.d = out.extension.d;
  return out;
}

// ---------------------------------------------------------------------------
// Drivers.

struct IterationRecord {
  int level = 0;
  std::int64_t h = 0;
  std::int64_t sigma = 1;
  std::size_t centers = 0;
  int attempts = 1;
  bool fallback = false;
  std::size_t bottlenecks = 0;
  std::int64_t rounds = 0;
};

struct ApspResult {
  std::vector<NodeId> sources;
  /// dist[k][t] = dist(sources[k], t) under the input weights.
  std::vector<std::vector<Weight>> dist;
  RoundStats stats;
  std::vector<IterationRecord> iterations;
  std::int64_t retries = 0;
  std::int32_t eccentricity = 0;
};

namespace detail {

inline std::vector<NodeId> sorted_union(std::vector<NodeId> a, const std::vector<NodeId>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

struct LevelOutcome {
  DistTable forward;
  std::optional<DistTable> reversed;
  bool ok = true;
  std::size_t bottlenecks = 0;
};

/// Runs both orientations of one level with the given centers and verifies.
inline LevelOutcome run_level(RoundEngine& engine, const ScalingContext& ctx, const BfsTree& tree,
                              const DistTable& fwd, const DistTable& rev, const std::vector<NodeId>& fwd_sources,
                              const std::vector<NodeId>& rev_sources, const std::vector<NodeId>& centers,
                              std::int64_t h, bool verify) {
  LevelOutcome lo;
  const auto n = engine.n();
  const DistTable fwd_own = fwd.subset(fwd_sources);
  IterationInput in;
  in.ctx = &ctx;
  in.tree = &tree;
  in.orientation = Orientation::kForward;
  in.own = &fwd_own;
  in.other = &rev;
  in.centers = centers;
  in.h = h;
  in.sigma = sigma_for(h, static_cast<std::int64_t>(fwd_sources.size()), n);
  auto f = run_iteration(engine, in);
  if (f.rsink) lo.bottlenecks += f.rsink->bottlenecks.size();
  lo.forward = std::move(f.table);
  if (verify) lo.ok = verify_distributed(engine, tree, ctx.wprime_view(Orientation::kForward), lo.forward).ok;

  if (!rev_sources.empty()) {
    const DistTable rev_own = rev.subset(rev_sources);
    in.orientation = Orientation::kReversed;
    in.own = &rev_own;
    in.other = &fwd;
    in.sigma = sigma_for(h, static_cast<std::int64_t>(rev_sources.size()), n);
    auto r = run_iteration(engine, in);
    if (r.rsink) lo.bottlenecks += r.rsink->bottlenecks.size();
    lo.reversed = std::move(r.table);
    if (verify && lo.ok)
      lo.ok = verify_distributed(engine, tree, ctx.wprime_view(Orientation::kReversed), *lo.reversed).ok;
  }
  return lo;
}

}  // namespace detail

/// Exact all-pairs distances (mode k == n) or k-source distances.
/// center_sets, when given, overrides sampling (one set per level 1..beta).
inline ApspResult scaling_shortest_paths(const WeightedDigraph& g, const std::vector<NodeId>& sources, bool all_pairs,
                                         std::uint64_t seed, const ApspConfig& cfg = {}) {
  if (sources.empty()) throw Error(ErrorKind::kInvalidArgument, "no sources");
  for (NodeId s : sources)
    if (s < 0 || s >= g.n()) throw Error(ErrorKind::kNodeOutOfRange, "source " + std::to_string(s));
  RoundEngine engine(g, EngineConfig{cfg.bandwidth_factor, seed});
  const auto tree = build_bfs_tree(engine);
  const auto decomposition = bit_decompose(g);
  const auto n = static_cast<std::int64_t>(g.n());
  const auto k = static_cast<std::int64_t>(sources.size());
  const int beta = decomposition.beta;

  std::int64_t h = cfg.h;
  std::int64_t count = 0;
  if (all_pairs) {
    if (h <= 0) h = ceil_sqrt(n);
    count = center_count(cfg.alpha, std::sqrt(static_cast<double>(n)), n);
  } else {
    if (h <= 0) h = std::max((n + k - 1) / k, ceil_sqrt(n));
    count = center_count(cfg.alpha, std::min(static_cast<double>(k), std::sqrt(static_cast<double>(n))), n);
  }
  if (cfg.skip_saturated_centers && cfg.h <= 0 && count >= n) h = n - 1;
  if (h >= n - 1) count = 0;
  count = std::min(count, n);

  ApspResult res;
  res.sources = sources;
  res.eccentricity = tree.eccentricity;

  std::vector<NodeId> everyone(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) everyone[static_cast<std::size_t>(v)] = v;

  // k-SSP pre-samples one center set per level.
  std::vector<std::vector<NodeId>> presampled(static_cast<std::size_t>(beta) + 1);
  if (!all_pairs && count > 0)
    for (int i = 1; i <= beta; ++i)
      presampled[static_cast<std::size_t>(i)] = sample_centers(engine, tree, count, static_cast<std::uint64_t>(i));

  auto fwd_sources_at = [&](int i) {  // tracked by the forward run of level i
    if (all_pairs) return everyone;
    std::vector<NodeId> s = sources;
    std::sort(s.begin(), s.end());
    for (int j = i + 1; j <= beta; ++j) s = detail::sorted_union(s, presampled[static_cast<std::size_t>(j)]);
    return s;
  };
  auto rev_sources_at = [&](int i) {
    if (all_pairs) return i < beta ? everyone : std::vector<NodeId>{};
    std::vector<NodeId> s;
    for (int j = i + 1; j <= beta; ++j) s = detail::sorted_union(s, presampled[static_cast<std::size_t>(j)]);
    return s;
  };

  // Level 0 is identically zero, so its tables are known without communication.
  DistTable fwd = DistTable::zeros(g.n(), fwd_sources_at(0), Orientation::kForward);
  DistTable rev = DistTable::zeros(g.n(), all_pairs ? everyone : rev_sources_at(0), Orientation::kReversed);

  for (int i = 1; i <= beta; ++i) {
    const std::int64_t before = engine.stats().rounds_total;
    const ScalingContext ctx(g, decomposition.levels[static_cast<std::size_t>(i - 1)],
                             decomposition.levels[static_cast<std::size_t>(i)]);
    const auto fs = fwd_sources_at(i);
    const auto rs = rev_sources_at(i);
    IterationRecord rec;
    rec.level = i;
    rec.h = h;

    std::vector<NodeId> centers;
    if (all_pairs && count > 0)
      centers = sample_centers(engine, tree, count, static_cast<std::uint64_t>(i) * 1000);
    else if (!all_pairs)
      centers = presampled[static_cast<std::size_t>(i)];

    const int attempts_allowed = all_pairs ? std::max(1, cfg.max_attempts) : 1;
    detail::LevelOutcome lo;
    bool done = false;
    for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
      if (attempt > 1) {
        centers = sample_centers(engine, tree, count, static_cast<std::uint64_t>(i) * 1000 + static_cast<std::uint64_t>(attempt));
        ++res.retries;
      }
      rec.attempts = attempt;
      try {
        lo = detail::run_level(engine, ctx, tree, fwd, rev, fs, rs, centers, h, cfg.verify);
      } catch (const Error& e) {
        // Centers that miss some long path leave center estimates without a
        // tight chain to the center; that is a failed attempt like any other.
        if (e.kind() != ErrorKind::kNoValidParent) throw;
        lo = detail::LevelOutcome{};
        lo.ok = false;
      }
      if (lo.ok) {
        done = true;
        break;
      }
    }
    rec.centers = centers.size();
    rec.sigma = sigma_for(h, static_cast<std::int64_t>(fs.size()), n);
    if (!done) {
      ++res.retries;
      rec.fallback = true;
      rec.h = n - 1;
      rec.centers = 0;
      lo = detail::run_level(engine, ctx, tree, fwd, rev, fs, rs, {}, n - 1, cfg.verify);
      if (!lo.ok) throw Error(ErrorKind::kVerificationFailed, "level " + std::to_string(i) + " failed verification");
    }
    rec.bottlenecks = lo.bottlenecks;
    if (cfg.on_level) cfg.on_level(i, fwd, lo.forward);
    fwd = std::move(lo.forward);
    if (lo.reversed) rev = std::move(*lo.reversed);
    rec.rounds = engine.stats().rounds_total - before;
    res.iterations.push_back(rec);
  }

  res.dist.clear();
  for (NodeId s : sources) {
    const int row = fwd.index_of(s);
    res.dist.push_back(fwd.d[static_cast<std::size_t>(row)]);
  }
  if (g.n() == 1) res.dist.assign(1, std::vector<Weight>{0});
  res.stats = engine.stats();
  return res;
}

inline ApspResult apsp(const WeightedDigraph& g, std::uint64_t seed, const ApspConfig& cfg = {}) {
  std::vector<NodeId> all(static_cast<std::size_t>(g.n()));
  for (NodeId v = 0; v < g.n(); ++v) all[static_cast<std::size_t>(v)] = v;
  return scaling_shortest_paths(g, all, true, seed, cfg);
}

inline ApspResult kssp(const WeightedDigraph& g, const std::vector<NodeId>& sources, std::uint64_t seed,
                       const ApspConfig& cfg = {}) {
  return scaling_shortest_paths(g, sources, false, seed, cfg);
}

/// Rows = sources, columns = targets.
inline void write_distance_csv(std::ostream& out, const ApspResult& r) {
  for (const auto& row : r.dist) {
    for (std::size_t t = 0; t < row.size(); ++t) out << (t ? "," : "") << row[t];
    out << '\n';
  }
}

}  // namespace capsp
