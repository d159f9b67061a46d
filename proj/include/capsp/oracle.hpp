#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "capsp/error.hpp"
#include "capsp/graph.hpp"

// Sequential ground truth. Deliberately independent of the engine and of the
// distributed modules: it only reads the graph structure and a weight array.
namespace capsp::oracle {

inline constexpr Weight kUnreachable = std::numeric_limits<Weight>::max();

using Matrix = std::vector<std::vector<Weight>>;

/// Weights read from the reverse edge, i.e. the weight function of the
/// graph with every edge flipped.
inline std::vector<Weight> reversed_weights(const WeightedDigraph& g, std::span<const Weight> w) {
  std::vector<Weight> out(w.size());
  for (EdgeId e = 0; e < g.m(); ++e) out[static_cast<std::size_t>(e)] = w[static_cast<std::size_t>(g.reverse(e))];
  return out;
}

inline std::vector<Weight> dijkstra(const WeightedDigraph& g, std::span<const Weight> w, NodeId s) {
  std::vector<Weight> dist(static_cast<std::size_t>(g.n()), kUnreachable);
  using Item = std::pair<Weight, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(s)] = 0;
  pq.push({0, s});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d != dist[static_cast<std::size_t>(u)]) continue;
    for (EdgeId e = g.first_edge(u); e < g.end_edge(u); ++e) {
      const NodeId v = g.head(e);
      const Weight nd = d + w[static_cast<std::size_t>(e)];
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        pq.push({nd, v});
      }
    }
  }
  return dist;
}

inline Matrix dijkstra_all(const WeightedDigraph& g, std::span<const Weight> w) {
  Matrix m;
  m.reserve(static_cast<std::size_t>(g.n()));
  for (NodeId s = 0; s < g.n(); ++s) m.push_back(dijkstra(g, w, s));
  return m;
}

inline Matrix dijkstra_all(const WeightedDigraph& g) { return dijkstra_all(g, g.weights()); }

/// Sequential Bellman-Ford over the edge list; a second, unrelated method.
inline std::vector<Weight> bellman_ford(const WeightedDigraph& g, std::span<const Weight> w, NodeId s) {
  std::vector<Weight> dist(static_cast<std::size_t>(g.n()), kUnreachable);
  dist[static_cast<std::size_t>(s)] = 0;
  for (NodeId pass = 0; pass < g.n(); ++pass) {
    bool changed = false;
    for (EdgeId e = 0; e < g.m(); ++e) {
      const Weight du = dist[static_cast<std::size_t>(g.tail(e))];
      if (du == kUnreachable) continue;
      auto& dv = dist[static_cast<std::size_t>(g.head(e))];
      if (du + w[static_cast<std::size_t>(e)] < dv) {
        dv = du + w[static_cast<std::size_t>(e)];
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

inline Matrix bellman_ford_all(const WeightedDigraph& g, std::span<const Weight> w) {
  Matrix m;
  for (NodeId s = 0; s < g.n(); ++s) m.push_back(bellman_ford(g, w, s));
  return m;
}

/// r_s(e) = 2 dist_w(s,u) + w'(e) - 2 dist_w(s,v) for every edge e = (u,v).
inline std::vector<Weight> reduced_weights(const WeightedDigraph& g, std::span<const Weight> w,
                                           std::span<const Weight> wprime, NodeId s) {
  const auto d = dijkstra(g, w, s);
  std::vector<Weight> r(static_cast<std::size_t>(g.m()));
  for (EdgeId e = 0; e < g.m(); ++e)
    r[static_cast<std::size_t>(e)] = 2 * d[static_cast<std::size_t>(g.tail(e))] + wprime[static_cast<std::size_t>(e)] -
                                     2 * d[static_cast<std::size_t>(g.head(e))];
  return r;
}

// ---------------------------------------------------------------------------
// Canonical shortest paths: minimum weight, then fewest edges, then the
// lexicographically smallest node sequence.

struct CanonicalTree {
  NodeId source = 0;
  std::vector<Weight> dist;
  std::vector<std::int32_t> hops;  // -1 when unreachable
  std::vector<NodeId> pred;        // -1 at the source and when unreachable

  std::vector<NodeId> path(NodeId t) const {
    std::vector<NodeId> p;
    if (hops[static_cast<std::size_t>(t)] < 0) return p;
    for (NodeId x = t; x != -1; x = pred[static_cast<std::size_t>(x)]) p.push_back(x);
    std::reverse(p.begin(), p.end());
    return p;
  }

  /// Edges after the last node of `is_center` on the canonical path to t
  /// (the whole path when it holds no center besides possibly the source).
  std::int32_t center_suffix(NodeId t, const std::vector<char>& is_center) const {
    std::int32_t k = 0;
    for (NodeId x = t; x != -1 && x != source; x = pred[static_cast<std::size_t>(x)], ++k)
      if (is_center[static_cast<std::size_t>(x)]) return k;
    return hops[static_cast<std::size_t>(t)];
  }
};

inline CanonicalTree canonical_tree(const WeightedDigraph& g, std::span<const Weight> w, NodeId s) {
  CanonicalTree ct;
  ct.source = s;
  ct.dist = dijkstra(g, w, s);
  const auto n = static_cast<std::size_t>(g.n());
  ct.hops.assign(n, -1);
  ct.pred.assign(n, -1);
  // Fewest edges among shortest paths: BFS over tight edges.
  std::vector<std::vector<NodeId>> layers;
  ct.hops[static_cast<std::size_t>(s)] = 0;
  layers.push_back({s});
  while (true) {
    std::vector<NodeId> next;
    for (NodeId u : layers.back()) {
      for (EdgeId e = g.first_edge(u); e < g.end_edge(u); ++e) {
        const NodeId v = g.head(e);
        auto& hv = ct.hops[static_cast<std::size_t>(v)];
        if (hv >= 0) continue;
        if (ct.dist[static_cast<std::size_t>(u)] + w[static_cast<std::size_t>(e)] == ct.dist[static_cast<std::size_t>(v)]) {
          hv = static_cast<std::int32_t>(layers.size());
          next.push_back(v);
        }
      }
    }
    if (next.empty()) break;
    layers.push_back(std::move(next));
  }
  // Lexicographic tie-break: all candidate paths to v have equal length, so
  // the best one extends the best-ranked predecessor; rank layer by layer.
  std::vector<std::int64_t> rank(n, 0);
  for (std::size_t L = 1; L < layers.size(); ++L) {
    for (NodeId v : layers[L]) {
      NodeId best = -1;
      for (EdgeId e = g.first_edge(v); e < g.end_edge(v); ++e) {
        const EdgeId in = g.reverse(e);
        const NodeId u = g.tail(in);
        if (ct.hops[static_cast<std::size_t>(u)] != static_cast<std::int32_t>(L) - 1) continue;
        if (ct.dist[static_cast<std::size_t>(u)] + w[static_cast<std::size_t>(in)] != ct.dist[static_cast<std::size_t>(v)])
          continue;
        if (best < 0 || rank[static_cast<std::size_t>(u)] < rank[static_cast<std::size_t>(best)]) best = u;
      }
      ct.pred[static_cast<std::size_t>(v)] = best;
    }
    auto order = layers[L];
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      const auto ra = rank[static_cast<std::size_t>(ct.pred[static_cast<std::size_t>(a)])];
      const auto rb = rank[static_cast<std::size_t>(ct.pred[static_cast<std::size_t>(b)])];
      return ra != rb ? ra < rb : a < b;
    });
    for (std::size_t i = 0; i < order.size(); ++i) rank[static_cast<std::size_t>(order[i])] = static_cast<std::int64_t>(i);
  }
  return ct;
}

inline std::vector<CanonicalTree> canonical_paths(const WeightedDigraph& g, std::span<const Weight> w) {
  std::vector<CanonicalTree> out;
  for (NodeId s = 0; s < g.n(); ++s) out.push_back(canonical_tree(g, w, s));
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive simple-path enumeration for tiny graphs.

struct WeightedPath {
  std::vector<NodeId> nodes;
  Weight weight = 0;
};

inline std::vector<WeightedPath> brute_force_paths(const WeightedDigraph& g, std::span<const Weight> w, NodeId s,
                                                   NodeId t, NodeId max_n = 8) {
  if (g.n() > max_n)
    throw Error(ErrorKind::kTooLarge, "brute force limited to " + std::to_string(max_n) + " nodes, got " +
                                          std::to_string(g.n()));
  std::vector<WeightedPath> out;
  std::vector<char> on(static_cast<std::size_t>(g.n()), 0);
  WeightedPath cur;
  std::function<void(NodeId)> dfs = [&](NodeId u) {
    cur.nodes.push_back(u);
    on[static_cast<std::size_t>(u)] = 1;
    if (u == t) {
      out.push_back(cur);
    } else {
      for (EdgeId e = g.first_edge(u); e < g.end_edge(u); ++e) {
        const NodeId v = g.head(e);
        if (on[static_cast<std::size_t>(v)]) continue;
        cur.weight += w[static_cast<std::size_t>(e)];
        dfs(v);
        cur.weight -= w[static_cast<std::size_t>(e)];
      }
    }
    on[static_cast<std::size_t>(u)] = 0;
    cur.nodes.pop_back();
  };
  dfs(s);
  return out;
}

}  // namespace capsp::oracle
