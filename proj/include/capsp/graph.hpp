#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "capsp/error.hpp"

namespace capsp {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;
using Weight = std::int64_t;

/// Marker for "no estimate yet". Large enough that sums of two stay representable.
inline constexpr Weight kInfinity = std::numeric_limits<Weight>::max() / 4;

inline Weight saturating_add(Weight a, Weight b) {
  if (a >= kInfinity || b >= kInfinity) return kInfinity;
  return std::min(a + b, kInfinity);
}

struct EdgeSpec {
  NodeId u = 0;
  NodeId v = 0;
  Weight w = 0;

  friend bool operator==(const EdgeSpec&, const EdgeSpec&) = default;
};

struct GraphLimits {
  /// Input weights must lie in [1, n^weight_exponent].
  int weight_exponent = 2;
};

inline Weight max_input_weight(NodeId n, int exponent) {
  Weight bound = 1;
  for (int i = 0; i < exponent; ++i) {
    if (bound > kInfinity / std::max<Weight>(n, 1)) return kInfinity;
    bound *= std::max<Weight>(n, 1);
  }
  return bound;
}

/// Edge orientation used by every distributed routine. Under kReversed the
/// directed edge (u,v) carries the weight of (v,u), so distances computed
/// "from s" are distances "to s" in the original graph.
enum class Orientation { kForward, kReversed };

constexpr Orientation flipped(Orientation o) {
  return o == Orientation::kForward ? Orientation::kReversed : Orientation::kForward;
}

/// Bidirected graph in CSR form. Edge ids are sorted by (tail, head) and every
/// edge knows the id of its reverse twin.
class WeightedDigraph {
 public:
  WeightedDigraph() = default;

  NodeId n() const { return n_; }
  EdgeId m() const { return static_cast<EdgeId>(heads_.size()); }

  NodeId tail(EdgeId e) const { return tails_[e]; }
  NodeId head(EdgeId e) const { return heads_[e]; }
  Weight weight(EdgeId e) const { return weights_[e]; }
  EdgeId reverse(EdgeId e) const { return reverse_[e]; }

  EdgeId first_edge(NodeId u) const { return offsets_[u]; }
  EdgeId end_edge(NodeId u) const { return offsets_[u + 1]; }
  NodeId degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return std::span<const NodeId>(heads_).subspan(offsets_[u], degree(u));
  }

  std::optional<EdgeId> find_edge(NodeId u, NodeId v) const {
    auto first = heads_.begin() + offsets_[u];
    auto last = heads_.begin() + offsets_[u + 1];
    auto it = std::lower_bound(first, last, v);
    if (it == last || *it != v) return std::nullopt;
    return static_cast<EdgeId>(it - heads_.begin());
  }

  const std::vector<Weight>& weights() const { return weights_; }
  std::span<const EdgeId> reverse_ids() const { return reverse_; }

  std::vector<EdgeSpec> edge_list() const {
    std::vector<EdgeSpec> out;
    out.reserve(heads_.size());
    for (EdgeId e = 0; e < m(); ++e) out.push_back({tails_[e], heads_[e], weights_[e]});
    return out;
  }

  friend WeightedDigraph validate_graph(NodeId n, std::span<const EdgeSpec> edges,
                                        const GraphLimits& limits);

 private:
  NodeId n_ = 0;
  std::vector<EdgeId> offsets_{0};
  std::vector<NodeId> tails_;
  std::vector<NodeId> heads_;
  std::vector<Weight> weights_;
  std::vector<EdgeId> reverse_;
};

namespace detail {
inline std::string edge_name(NodeId u, NodeId v) {
  return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}
}  // namespace detail

/// Builds a graph from a candidate edge list, enforcing every input invariant:
/// node range, no self-loops, no parallel edges, weights in [1, n^c] and an
/// explicit reverse for every edge.
inline WeightedDigraph validate_graph(NodeId n, std::span<const EdgeSpec> edges,
                                      const GraphLimits& limits = {}) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "graph needs at least one node");
  const Weight w_max = max_input_weight(n, limits.weight_exponent);
  std::vector<EdgeSpec> sorted(edges.begin(), edges.end());
  for (const auto& e : sorted) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
      throw Error(ErrorKind::kNodeOutOfRange, "edge " + detail::edge_name(e.u, e.v));
    if (e.u == e.v) throw Error(ErrorKind::kSelfLoop, "edge " + detail::edge_name(e.u, e.v));
    if (e.w < 1 || e.w > w_max)
      throw Error(ErrorKind::kWeightOutOfRange,
                  "edge " + detail::edge_name(e.u, e.v) + " has weight " + std::to_string(e.w) +
                      ", allowed [1," + std::to_string(w_max) + "]");
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const EdgeSpec& a, const EdgeSpec& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].u == sorted[i - 1].u && sorted[i].v == sorted[i - 1].v)
      throw Error(ErrorKind::kDuplicateEdge, "edge " + detail::edge_name(sorted[i].u, sorted[i].v));
  }

  WeightedDigraph g;
  g.n_ = n;
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& e : sorted) ++g.offsets_[e.u + 1];
  for (NodeId u = 0; u < n; ++u) g.offsets_[u + 1] += g.offsets_[u];
  g.tails_.reserve(sorted.size());
  g.heads_.reserve(sorted.size());
  g.weights_.reserve(sorted.size());
  for (const auto& e : sorted) {
    g.tails_.push_back(e.u);
    g.heads_.push_back(e.v);
    g.weights_.push_back(e.w);
  }
  g.reverse_.assign(sorted.size(), -1);
  for (EdgeId e = 0; e < g.m(); ++e) {
    auto r = g.find_edge(g.heads_[e], g.tails_[e]);
    if (!r)
      throw Error(ErrorKind::kMissingReverseEdge,
                  "edge " + detail::edge_name(g.tails_[e], g.heads_[e]) + " has no reverse");
    g.reverse_[e] = *r;
  }
  return g;
}

inline WeightedDigraph validate_graph(NodeId n, const std::vector<EdgeSpec>& edges,
                                      const GraphLimits& limits = {}) {
  return validate_graph(n, std::span<const EdgeSpec>(edges), limits);
}

/// Read-only weight function over a graph's edge ids, optionally reversed.
class WeightView {
 public:
  WeightView() = default;
  WeightView(std::span<const Weight> w, std::span<const EdgeId> rev, Orientation o)
      : w_(w), rev_(rev), orientation_(o) {}

  /// Weight of directed edge e as seen in this orientation.
  Weight operator()(EdgeId e) const {
    return orientation_ == Orientation::kForward ? w_[e] : w_[rev_[e]];
  }
  Orientation orientation() const { return orientation_; }
  WeightView flipped() const { return WeightView(w_, rev_, capsp::flipped(orientation_)); }

 private:
  std::span<const Weight> w_;
  std::span<const EdgeId> rev_;
  Orientation orientation_ = Orientation::kForward;
};

inline WeightView view(const WeightedDigraph& g, std::span<const Weight> w,
                       Orientation o = Orientation::kForward) {
  return WeightView(w, g.reverse_ids(), o);
}

// ---------------------------------------------------------------------------
// Text format: "n m", then m lines "u v w". '#' lines are comments.

inline WeightedDigraph parse_graph(std::istream& in, const GraphLimits& limits = {}) {
  std::string line;
  std::optional<std::pair<long long, long long>> header;
  std::vector<EdgeSpec> edges;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (!header) {
      long long n = 0, m = 0;
      if (!(ls >> n >> m) || n < 1 || m < 0)
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": bad header");
      header = {n, m};
      edges.reserve(static_cast<std::size_t>(m));
      continue;
    }
    long long u = 0, v = 0, w = 0;
    if (!(ls >> u >> v >> w))
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected 'u v w'");
    std::string rest;
    if (ls >> rest) throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": trailing tokens");
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), w});
  }
  if (!header) throw Error(ErrorKind::kParse, "missing header");
  if (static_cast<long long>(edges.size()) != header->second)
    throw Error(ErrorKind::kParse, "header announces " + std::to_string(header->second) +
                                       " edges, found " + std::to_string(edges.size()));
  return validate_graph(static_cast<NodeId>(header->first), edges, limits);
}

inline WeightedDigraph parse_graph(const std::string& text, const GraphLimits& limits = {}) {
  std::istringstream in(text);
  return parse_graph(in, limits);
}

inline void serialize_graph(const WeightedDigraph& g, std::ostream& out) {
  out << g.n() << ' ' << g.m() << '\n';
  for (EdgeId e = 0; e < g.m(); ++e) out << g.tail(e) << ' ' << g.head(e) << ' ' << g.weight(e) << '\n';
}

inline std::string serialize_graph(const WeightedDigraph& g) {
  std::ostringstream out;
  serialize_graph(g, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Bit-scaling decomposition.

/// levels[i][e] = floor(w(e) / 2^(beta-i)); levels[0] is all zeros and
/// levels[beta] the input weights.
struct BitDecomposition {
  int beta = 0;
  std::vector<std::vector<Weight>> levels;

  /// Per-edge bit added when going from level i-1 to level i (1 <= i <= beta).
  std::vector<std::uint8_t> bit(int i) const;
};

inline std::vector<std::uint8_t> iteration_bit(std::span<const Weight> w, std::span<const Weight> wprime) {
  if (w.size() != wprime.size())
    throw Error(ErrorKind::kInvalidArgument, "weight functions over different edge sets");
  std::vector<std::uint8_t> b(w.size());
  for (std::size_t e = 0; e < w.size(); ++e) {
    const Weight diff = wprime[e] - 2 * w[e];
    if (diff != 0 && diff != 1)
      throw Error(ErrorKind::kBitRangeViolation,
                  "edge id " + std::to_string(e) + ": w'-2w = " + std::to_string(diff));
    b[e] = static_cast<std::uint8_t>(diff);
  }
  return b;
}

inline std::vector<std::uint8_t> BitDecomposition::bit(int i) const {
  return iteration_bit(levels.at(static_cast<std::size_t>(i - 1)), levels.at(static_cast<std::size_t>(i)));
}

inline BitDecomposition bit_decompose(const WeightedDigraph& g) {
  Weight max_w = 0;
  for (Weight w : g.weights()) max_w = std::max(max_w, w);
  BitDecomposition d;
  d.beta = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(max_w)));
  d.levels.resize(static_cast<std::size_t>(d.beta) + 1);
  for (int i = 0; i <= d.beta; ++i) {
    auto& level = d.levels[static_cast<std::size_t>(i)];
    level.resize(g.weights().size());
    const int shift = d.beta - i;
    for (std::size_t e = 0; e < level.size(); ++e) level[e] = g.weights()[e] >> shift;
  }
  for (int i = 1; i <= d.beta; ++i) (void)d.bit(i);
  return d;
}

}  // namespace capsp
