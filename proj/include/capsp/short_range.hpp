#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <string_view>
#include <vector>

#include "capsp/engine.hpp"
#include "capsp/primitives.hpp"
#include "capsp/scaling.hpp"

namespace capsp {

/// Delta = 1/sigma with sigma = ceil(sqrt(q*h/n)), at least 1. For q = n
/// this is ceil(sqrt(h)).
inline std::int64_t sigma_for(std::int64_t h, std::int64_t q, std::int64_t n) {
  if (h <= 0 || q <= 0 || n <= 0) return 1;
  const double x = std::sqrt(static_cast<double>(q) * static_cast<double>(h) / static_cast<double>(n));
  auto s = static_cast<std::int64_t>(std::ceil(x - 1e-9));
  while (s * s * n < q * h) ++s;
  while (s > 1 && (s - 1) * (s - 1) * n >= q * h) --s;
  return std::max<std::int64_t>(1, s);
}

/// Rounded weight r' in Delta-units: one unit for r = 0, else r*sigma.
constexpr std::int64_t round_up(Weight r, std::int64_t sigma) { return r == 0 ? 1 : r * sigma; }

// ---------------------------------------------------------------------------
// Time-indexed BFS: a node announces its estimate d (in units) exactly once,
// in logical round d, provided d <= limit.

class BoundedBfsProgram : public NodeProgram {
 public:
  BoundedBfsProgram(const WeightedDigraph& g, const ReducedWeights& rw, std::int64_t sigma, std::int64_t limit,
                    std::vector<std::vector<std::int64_t>> init)
      : rw_(&rw), sigma_(sigma), limit_(limit), est_(std::move(init)), sent_(est_.size(), std::vector<char>(static_cast<std::size_t>(g.n()), 0)),
        root_index_(static_cast<std::size_t>(g.n()), -1), queue_(static_cast<std::size_t>(g.n())) {
    for (std::size_t k = 0; k < rw.sources.size(); ++k) root_index_[static_cast<std::size_t>(rw.sources[k])] = static_cast<int>(k);
    for (std::size_t k = 0; k < est_.size(); ++k)
      for (std::size_t v = 0; v < est_[k].size(); ++v) schedule(v, k);
  }

  void step(NodeId v, std::int64_t round, std::span<const Envelope> inbox, Outbox& out) override {
    const auto vi = static_cast<std::size_t>(v);
    for (const auto& env : inbox) {
      const auto k = static_cast<std::size_t>(root_index_[static_cast<std::size_t>(env.msg.id(0))]);
      const std::int64_t cand = env.msg.value(0) + round_up(rw_->r[k][static_cast<std::size_t>(env.edge)], sigma_);
      if (cand < est_[k][vi] && !sent_[k][vi]) {
        est_[k][vi] = cand;
        schedule(vi, k);
      }
    }
    auto& q = queue_[vi];
    while (!q.empty() && q.top().first <= round) {
      const auto [d, k] = q.top();
      q.pop();
      if (sent_[k][vi] || est_[k][vi] != d) continue;
      sent_[k][vi] = 1;
      out.send_all(Message::make(MessageKind::kDistance, {rw_->sources[k]}, {d}));
    }
    while (!q.empty() && (sent_[q.top().second][vi] || est_[q.top().second][vi] != q.top().first)) q.pop();
  }

  bool has_pending(std::int64_t round) const override {
    for (const auto& q : queue_)
      if (!q.empty() && q.top().first > round) return true;
    return false;
  }

  std::vector<std::vector<std::int64_t>> take_estimates() { return std::move(est_); }

 private:
  void schedule(std::size_t v, std::size_t k) {
    const auto d = est_[k][v];
    if (d <= limit_) queue_[v].push({d, k});
  }

  using Entry = std::pair<std::int64_t, std::size_t>;
  const ReducedWeights* rw_;
  std::int64_t sigma_;
  std::int64_t limit_;
  std::vector<std::vector<std::int64_t>> est_;
  std::vector<std::vector<char>> sent_;
  std::vector<int> root_index_;
  std::vector<std::priority_queue<Entry, std::vector<Entry>, std::greater<>>> queue_;
};

/// Estimates of dist_{r'_s} in units. seeds[k][v] (optional, kInfinity when
/// absent) lets centers start from a known rounded value.
inline std::vector<std::vector<std::int64_t>> bounded_bfs(RoundEngine& engine, const ReducedWeights& rw,
                                                          std::int64_t h, std::int64_t sigma,
                                                          const std::vector<std::vector<std::int64_t>>* seeds = nullptr,
                                                          std::string_view phase = "short-range") {
  const auto n = engine.n();
  std::vector<std::vector<std::int64_t>> init(rw.sources.size(),
                                              std::vector<std::int64_t>(static_cast<std::size_t>(n), kInfinity));
  for (std::size_t k = 0; k < rw.sources.size(); ++k) {
    if (seeds != nullptr) init[k] = (*seeds)[k];
    init[k][static_cast<std::size_t>(rw.sources[k])] = 0;
  }
  const std::int64_t limit = static_cast<std::int64_t>(n) * sigma + h;
  BoundedBfsProgram prog(engine.graph(), rw, sigma, limit, std::move(init));
  engine.run(phase, prog, limit + 3);
  return prog.take_estimates();
}

struct CorrectionResult {
  std::vector<std::vector<Weight>> dist_r;  // [k][t], estimate of dist_{r_s}(s,t)
  std::vector<std::vector<std::int32_t>> sends;
};

/// Gated Bellman-Ford under r_s started from floor(d'/sigma). A decreased
/// estimate d is re-announced only while d*sigma >= d' - h.
/// pinned[k][t] >= 0 fixes node t's starting value for source k.
inline CorrectionResult corrective_bellman_ford(RoundEngine& engine, const ReducedWeights& rw,
                                                const std::vector<std::vector<std::int64_t>>& bfs_units,
                                                std::int64_t h, std::int64_t sigma, std::int64_t send_rounds,
                                                const std::vector<std::vector<Weight>>* pinned = nullptr,
                                                std::string_view phase = "short-range") {
  std::vector<std::vector<Weight>> init(bfs_units.size());
  for (std::size_t k = 0; k < bfs_units.size(); ++k) {
    init[k].resize(bfs_units[k].size());
    for (std::size_t t = 0; t < bfs_units[k].size(); ++t) {
      const auto u = bfs_units[k][t];
      init[k][t] = u >= kInfinity ? kInfinity : u / sigma;
      if (pinned != nullptr && (*pinned)[k][t] >= 0) init[k][t] = (*pinned)[k][t];
    }
  }
  auto gate = [&bfs_units, h, sigma](NodeId t, std::size_t k, Weight d) {
    const auto dp = bfs_units[k][static_cast<std::size_t>(t)];
    return dp < kInfinity && d * sigma >= dp - h;
  };
  const auto* r = &rw.r;
  RelaxationProgram prog(
      engine.graph(), [r](std::size_t k, EdgeId e) { return (*r)[k][static_cast<std::size_t>(e)]; }, rw.sources,
      std::move(init), send_rounds, gate);
  engine.run(phase, prog, send_rounds + 2);
  CorrectionResult out;
  out.sends = prog.sends();
  out.dist_r = prog.take_estimates();
  return out;
}

struct ShortRangeResult {
  Orientation orientation = Orientation::kForward;
  std::vector<NodeId> sources;
  /// d[k][t]: node t's estimate of dist_{w'} from sources[k] (table orientation).
  std::vector<std::vector<Weight>> d;
  std::vector<std::vector<std::int64_t>> bfs_units;
  std::vector<std::vector<Weight>> dist_r;
  /// Largest number of repair announcements by one node for one source.
  std::int32_t max_sends = 0;
  std::int64_t sigma = 1;
  std::int64_t h = 0;
};

/// Per-node sends allowed by the gate: at most ceil(h/sigma) + 1.
constexpr std::int64_t announcement_budget(std::int64_t h, std::int64_t sigma) { return (h + sigma - 1) / sigma + 1; }

namespace detail {

inline ShortRangeResult finish_short_range(const DistTable& table, const ReducedWeights& rw,
                                           std::vector<std::vector<std::int64_t>> bfs, CorrectionResult corr,
                                           std::int64_t h, std::int64_t sigma) {
  ShortRangeResult res;
  res.orientation = table.orientation;
  res.sources = rw.sources;
  res.h = h;
  res.sigma = sigma;
  res.d.resize(rw.sources.size());
  for (std::size_t k = 0; k < rw.sources.size(); ++k) {
    res.d[k].resize(corr.dist_r[k].size());
    for (std::size_t t = 0; t < res.d[k].size(); ++t) {
      const Weight dr = corr.dist_r[k][t];
      res.d[k][t] = dr >= kInfinity ? kInfinity : lift_distance(table.d[k][t], dr);
    }
    for (auto s : corr.sends[k]) res.max_sends = std::max(res.max_sends, s);
  }
  res.bfs_units = std::move(bfs);
  res.dist_r = std::move(corr.dist_r);
  return res;
}

}  // namespace detail

/// Short-range distances in the table's orientation: for every tracked source s and
/// node t, t learns an upper bound on dist_{w'}(s,t) that is exact when the
/// canonical shortest path has at most h edges. Passing a reversed table (and
/// its reduced weights) runs the flipped variant: t learns dist(t,s).
inline ShortRangeResult short_range(RoundEngine& engine, const DistTable& table, const ReducedWeights& rw,
                                    std::int64_t h, std::int64_t sigma, std::string_view phase = "short-range") {
  if (table.orientation != rw.orientation || table.sources != rw.sources)
    throw Error(ErrorKind::kInvalidArgument, "distance table and reduced weights disagree");
  auto bfs = bounded_bfs(engine, rw, h, sigma, nullptr, phase);
  auto corr = corrective_bellman_ford(engine, rw, bfs, h, sigma, h, nullptr, phase);
  return detail::finish_short_range(table, rw, std::move(bfs), std::move(corr), h, sigma);
}

/// Short-range with centers as extra starting points. center_dist[k][j] is the exact
/// dist_{w'}(sources[k], centers[j]) known at centers[j]. Exact for every
/// pair whose canonical path has at most h edges after its last center.
inline ShortRangeResult short_range_extension(RoundEngine& engine, const DistTable& table, const ReducedWeights& rw,
                                              const std::vector<NodeId>& centers,
                                              const std::vector<std::vector<Weight>>& center_dist, std::int64_t h,
                                              std::int64_t sigma, std::string_view phase = "short-range-ext") {
  if (table.orientation != rw.orientation || table.sources != rw.sources)
    throw Error(ErrorKind::kInvalidArgument, "distance table and reduced weights disagree");
  const auto n = static_cast<std::size_t>(engine.n());
  std::vector<std::vector<std::int64_t>> seeds(rw.sources.size(), std::vector<std::int64_t>(n, kInfinity));
  std::vector<std::vector<Weight>> pinned(rw.sources.size(), std::vector<Weight>(n, -1));
  for (std::size_t k = 0; k < rw.sources.size(); ++k) {
    for (std::size_t j = 0; j < centers.size(); ++j) {
      const auto c = static_cast<std::size_t>(centers[j]);
      const Weight dr = center_dist[k][j] - 2 * table.d[k][c];
      if (dr < 0)
        throw Error(ErrorKind::kNegativeReducedWeight,
                    "center " + std::to_string(centers[j]) + " holds a w'-distance below 2*dist_w");
      seeds[k][c] = round_up(dr, sigma);
      pinned[k][c] = dr;
    }
  }
  auto bfs = bounded_bfs(engine, rw, h, sigma, &seeds, phase);
  auto corr = corrective_bellman_ford(engine, rw, bfs, h, sigma, h + 1, &pinned, phase);
  return detail::finish_short_range(table, rw, std::move(bfs), std::move(corr), h, sigma);
}

}  // namespace capsp
