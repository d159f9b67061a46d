#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "capsp/error.hpp"
#include "capsp/graph.hpp"

namespace capsp {

struct WeightRange {
  Weight lo = 1;
  Weight hi = 1;
};

namespace detail {

/// Adds both directions of every undirected pair with independent weights.
inline WeightedDigraph bidirect(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& pairs, WeightRange range,
                                std::mt19937_64& rng) {
  if (range.lo < 1 || range.hi < range.lo) throw Error(ErrorKind::kBadSpec, "weight range must satisfy 1 <= lo <= hi");
  std::uniform_int_distribution<Weight> pick(range.lo, range.hi);
  std::vector<EdgeSpec> edges;
  edges.reserve(pairs.size() * 2);
  for (auto [u, v] : pairs) {
    edges.push_back({u, v, pick(rng)});
    edges.push_back({v, u, pick(rng)});
  }
  GraphLimits limits;
  limits.weight_exponent = 64;
  return validate_graph(n, edges, limits);
}

}  // namespace detail

/// Random connected graph: a random spanning tree plus extra random pairs
/// until the average (undirected) degree reaches `avg_degree`.
inline WeightedDigraph random_graph(NodeId n, WeightRange range, std::uint64_t seed, double avg_degree = 4.0) {
  if (n < 1) throw Error(ErrorKind::kBadSpec, "random graph needs n >= 1");
  std::mt19937_64 rng(seed);
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) order[static_cast<std::size_t>(v)] = v;
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<std::pair<NodeId, NodeId>> pairs;
  auto add = [&](NodeId a, NodeId b) {
    if (a == b) return false;
    auto key = std::minmax(a, b);
    if (!seen.insert({key.first, key.second}).second) return false;
    pairs.emplace_back(key.first, key.second);
    return true;
  };
  for (NodeId i = 1; i < n; ++i) {
    std::uniform_int_distribution<NodeId> prev(0, i - 1);
    add(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(prev(rng))]);
  }
  const auto max_pairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  const auto target = std::min(max_pairs, static_cast<std::size_t>(avg_degree * n / 2.0));
  std::uniform_int_distribution<NodeId> any(0, n - 1);
  while (pairs.size() < target) add(any(rng), any(rng));
  std::sort(pairs.begin(), pairs.end());
  return detail::bidirect(n, pairs, range, rng);
}

inline WeightedDigraph path_graph(NodeId n, WeightRange range, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId v = 0; v + 1 < n; ++v) pairs.emplace_back(v, v + 1);
  return detail::bidirect(n, pairs, range, rng);
}

/// Hub is node 0.
inline WeightedDigraph star_graph(NodeId n, WeightRange range, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId v = 1; v < n; ++v) pairs.emplace_back(0, v);
  return detail::bidirect(n, pairs, range, rng);
}

inline WeightedDigraph cycle_graph(NodeId n, WeightRange range, std::uint64_t seed = 0) {
  if (n < 3) throw Error(ErrorKind::kBadSpec, "cycle needs n >= 3");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId v = 0; v < n; ++v) pairs.emplace_back(std::min(v, (v + 1) % n), std::max(v, (v + 1) % n));
  return detail::bidirect(n, pairs, range, rng);
}

/// rows x cols grid with cols = ceil(sqrt(n)); the last row may be partial.
inline WeightedDigraph grid_graph(NodeId n, WeightRange range, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  NodeId cols = 1;
  while (cols * cols < n) ++cols;
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId v = 0; v < n; ++v) {
    if ((v % cols) + 1 < cols && v + 1 < n) pairs.emplace_back(v, v + 1);
    if (v + cols < n) pairs.emplace_back(v, v + cols);
  }
  return detail::bidirect(n, pairs, range, rng);
}

inline WeightedDigraph generate(const std::string& kind, NodeId n, WeightRange range, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::kBadSpec, "generators need n >= 2");
  if (kind == "random") return random_graph(n, range, seed);
  if (kind == "path") return path_graph(n, range, seed);
  if (kind == "star") return star_graph(n, range, seed);
  if (kind == "cycle") return cycle_graph(n, range, seed);
  if (kind == "grid") return grid_graph(n, range, seed);
  throw Error(ErrorKind::kBadSpec, "unknown generator '" + kind + "'");
}

}  // namespace capsp
