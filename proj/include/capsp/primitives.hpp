#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string_view>
#include <vector>

#include "capsp/engine.hpp"
#include "capsp/graph.hpp"

namespace capsp {

// ---------------------------------------------------------------------------
// Flood: one token from a source, each node forwards it once.

class FloodProgram : public NodeProgram {
 public:
  FloodProgram(const WeightedDigraph& g, NodeId source)
      : g_(&g), source_(source), reached_(static_cast<std::size_t>(g.n()), -1) {}

  void step(NodeId v, std::int64_t round, std::span<const Envelope> inbox, Outbox& out) override {
    auto& r = reached_[static_cast<std::size_t>(v)];
    if (r >= 0) return;
    if (round == 0 && v == source_) {
      r = 0;
      out.send_all(Message::make(MessageKind::kToken, {}));
      return;
    }
    if (inbox.empty()) return;
    r = round;
    for (EdgeId e = g_->first_edge(v); e < g_->end_edge(v); ++e) {
      bool came_from = false;
      for (const auto& env : inbox) came_from = came_from || env.from == g_->head(e);
      if (!came_from) out.send(e, Message::make(MessageKind::kToken, {}));
    }
  }

  const std::vector<std::int64_t>& reached_round() const { return reached_; }

 private:
  const WeightedDigraph* g_;
  NodeId source_;
  std::vector<std::int64_t> reached_;
};

// ---------------------------------------------------------------------------
// Multi-root distance relaxation. With no gate this is plain Bellman-Ford;
// the gate lets a node suppress re-announcing a decreased estimate.

class RelaxationProgram : public NodeProgram {
 public:
  using Gate = std::function<bool(NodeId node, std::size_t root_index, Weight estimate)>;
  /// Weight of traversing edge e (tail to head) for roots[k].
  using EdgeWeight = std::function<Weight(std::size_t k, EdgeId e)>;

  /// init[k][v] is node v's starting estimate for roots[k]. Announcements
  /// happen in logical rounds [0, send_rounds); received messages are always
  /// applied, so send_rounds = h relaxes every path of at most h edges.
  RelaxationProgram(const WeightedDigraph& g, EdgeWeight w, std::vector<NodeId> roots,
                    std::vector<std::vector<Weight>> init, std::int64_t send_rounds, Gate gate = {})
      : w_(std::move(w)),
        roots_(std::move(roots)),
        est_(std::move(init)),
        send_rounds_(send_rounds),
        gate_(std::move(gate)),
        root_index_(static_cast<std::size_t>(g.n()), -1),
        dirty_(static_cast<std::size_t>(g.n())),
        flag_(roots_.size(), std::vector<char>(static_cast<std::size_t>(g.n()), 0)),
        sends_(roots_.size(), std::vector<std::int32_t>(static_cast<std::size_t>(g.n()), 0)) {
    for (std::size_t k = 0; k < roots_.size(); ++k) root_index_[static_cast<std::size_t>(roots_[k])] = static_cast<int>(k);
  }

  void step(NodeId v, std::int64_t round, std::span<const Envelope> inbox, Outbox& out) override {
    const auto vi = static_cast<std::size_t>(v);
    for (const auto& env : inbox) {
      const auto k = static_cast<std::size_t>(root_index_[static_cast<std::size_t>(env.msg.id(0))]);
      const Weight cand = saturating_add(env.msg.value(0), w_(k, env.edge));
      auto& cur = est_[k][vi];
      if (cand < cur) {
        cur = cand;
        if (!flag_[k][vi]) {
          flag_[k][vi] = 1;
          dirty_[vi].push_back(k);
        }
      }
    }
    if (round == 0) {
      for (std::size_t k = 0; k < roots_.size(); ++k) {
        if (est_[k][vi] < kInfinity && round < send_rounds_) announce(v, k, out);
      }
    } else if (round < send_rounds_) {
      for (auto k : dirty_[vi]) {
        if (!gate_ || gate_(v, k, est_[k][vi])) announce(v, k, out);
      }
    }
    for (auto k : dirty_[vi]) flag_[k][vi] = 0;
    dirty_[vi].clear();
  }

  const std::vector<NodeId>& roots() const { return roots_; }
  const std::vector<std::vector<Weight>>& estimates() const { return est_; }
  std::vector<std::vector<Weight>> take_estimates() { return std::move(est_); }
  /// sends()[k][v]: number of announcements node v made for roots[k].
  const std::vector<std::vector<std::int32_t>>& sends() const { return sends_; }

 private:
  void announce(NodeId v, std::size_t k, Outbox& out) {
    ++sends_[k][static_cast<std::size_t>(v)];
    out.send_all(Message::make(MessageKind::kDistance, {roots_[k]}, {est_[k][static_cast<std::size_t>(v)]}));
  }

  EdgeWeight w_;
  std::vector<NodeId> roots_;
  std::vector<std::vector<Weight>> est_;
  std::int64_t send_rounds_;
  Gate gate_;
  std::vector<int> root_index_;
  std::vector<std::vector<std::size_t>> dirty_;
  std::vector<std::vector<char>> flag_;
  std::vector<std::vector<std::int32_t>> sends_;
};

enum class Direction { kFromSource, kToSink };

/// Distributed Bellman-Ford for n rounds. kFromSource: node t ends holding
/// dist(root, t). kToSink: node t ends holding dist(t, root); this runs the
/// identical program over the opposite orientation of `w`.
inline std::vector<Weight> bellman_ford(RoundEngine& engine, NodeId root, WeightView w, Direction dir,
                                        std::string_view phase = "bellman-ford") {
  const auto& g = engine.graph();
  const WeightView oriented = dir == Direction::kToSink ? w.flipped() : w;
  std::vector<std::vector<Weight>> init(1, std::vector<Weight>(static_cast<std::size_t>(g.n()), kInfinity));
  init[0][static_cast<std::size_t>(root)] = 0;
  RelaxationProgram prog(g, [oriented](std::size_t, EdgeId e) { return oriented(e); }, {root}, std::move(init), g.n());
  engine.run(phase, prog, static_cast<std::int64_t>(g.n()) + 2);
  return std::move(prog.take_estimates()[0]);
}

// ---------------------------------------------------------------------------
// BFS spanning tree rooted at node 0.

struct BfsTree {
  NodeId root = 0;
  std::vector<NodeId> parent;       // -1 at the root
  std::vector<EdgeId> parent_edge;  // edge v -> parent(v)
  std::vector<std::vector<EdgeId>> child_edges;
  std::vector<std::int32_t> depth;
  /// Unweighted eccentricity of the root (at most twice the diameter).
  std::int32_t eccentricity = 0;
};

class BfsTreeProgram : public NodeProgram {
 public:
  explicit BfsTreeProgram(const WeightedDigraph& g) : g_(&g) {
    const auto n = static_cast<std::size_t>(g.n());
    tree_.parent.assign(n, -1);
    tree_.parent_edge.assign(n, -1);
    tree_.child_edges.assign(n, {});
    tree_.depth.assign(n, -1);
  }

  void step(NodeId v, std::int64_t round, std::span<const Envelope> inbox, Outbox& out) override {
    const auto vi = static_cast<std::size_t>(v);
    for (const auto& env : inbox) {
      if (env.msg.kind == MessageKind::kParentClaim) tree_.child_edges[vi].push_back(g_->reverse(env.edge));
    }
    if (tree_.depth[vi] >= 0) return;
    if (round == 0 && v == tree_.root) {
      tree_.depth[vi] = 0;
      out.send_all(Message::make(MessageKind::kToken, {}));
      return;
    }
    const Envelope* best = nullptr;
    for (const auto& env : inbox) {
      if (env.msg.kind == MessageKind::kToken && (best == nullptr || env.from < best->from)) best = &env;
    }
    if (best == nullptr) return;
    tree_.depth[vi] = static_cast<std::int32_t>(round);
    tree_.parent[vi] = best->from;
    tree_.parent_edge[vi] = g_->reverse(best->edge);
    for (EdgeId e = g_->first_edge(v); e < g_->end_edge(v); ++e) {
      if (e == tree_.parent_edge[vi])
        out.send(e, Message::make(MessageKind::kParentClaim, {}));
      else
        out.send(e, Message::make(MessageKind::kToken, {}));
    }
  }

  BfsTree take() { return std::move(tree_); }

 private:
  const WeightedDigraph* g_;
  BfsTree tree_;
};

inline BfsTree build_bfs_tree(RoundEngine& engine, std::string_view phase = "bfs-tree") {
  const auto& g = engine.graph();
  BfsTreeProgram prog(g);
  engine.run(phase, prog, static_cast<std::int64_t>(g.n()) + 2);
  BfsTree tree = prog.take();
  for (NodeId v = 0; v < g.n(); ++v) {
    if (tree.depth[static_cast<std::size_t>(v)] < 0)
      throw Error(ErrorKind::kDisconnected, "node " + std::to_string(v) + " unreachable from node 0");
    tree.eccentricity = std::max(tree.eccentricity, tree.depth[static_cast<std::size_t>(v)]);
  }
  for (auto& children : tree.child_edges) std::sort(children.begin(), children.end());
  return tree;
}

// ---------------------------------------------------------------------------
// Pipelined broadcast over a BFS tree: upcast every item to the root, then
// downcast the root's stream to everyone. At most one message per tree edge
// per round in each direction.

inline std::uint64_t message_fingerprint(const Message& m) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  std::uint64_t h = mix(static_cast<std::uint64_t>(m.kind) + 0x100ULL * m.id_count + 0x10000ULL * m.value_count);
  for (auto f : m.fields) h = mix(h ^ static_cast<std::uint64_t>(f));
  return h;
}

struct BroadcastResult {
  /// Items in the order the root streamed them; every node receives exactly this sequence.
  std::vector<Message> items;
  std::vector<std::int64_t> received_count;
  /// Order-independent multiset hash of what each node holds at the end.
  std::vector<std::uint64_t> fingerprint;
  PhaseStats stats;
};

class BroadcastProgram : public NodeProgram {
 public:
  BroadcastProgram(const BfsTree& tree, std::vector<std::vector<Message>> held)
      : tree_(&tree), held_(std::move(held)) {
    const auto n = tree.parent.size();
    up_.resize(n);
    down_.resize(n);
    result_.received_count.assign(n, 0);
    result_.fingerprint.assign(n, 0);
  }

  void step(NodeId v, std::int64_t round, std::span<const Envelope> inbox, Outbox& out) override {
    const auto vi = static_cast<std::size_t>(v);
    const bool is_root = v == tree_->root;
    if (round == 0) {
      for (const auto& m : held_[vi]) {
        if (is_root)
          deliver_at_root(m);
        else
          up_[vi].push_back(m);
      }
    }
    for (const auto& env : inbox) {
      if (env.from == tree_->parent[vi]) {
        record(vi, env.msg);
        if (!tree_->child_edges[vi].empty()) down_[vi].push_back(env.msg);
      } else if (is_root) {
        deliver_at_root(env.msg);
      } else {
        up_[vi].push_back(env.msg);
      }
    }
    if (!up_[vi].empty()) {
      out.send(tree_->parent_edge[vi], up_[vi].front());
      up_[vi].pop_front();
    }
    if (!down_[vi].empty()) {
      for (EdgeId e : tree_->child_edges[vi]) out.send(e, down_[vi].front());
      down_[vi].pop_front();
    }
  }

  bool has_pending(std::int64_t round) const override {
    if (round == 0) {
      for (const auto& h : held_)
        if (!h.empty()) return true;
    }
    for (std::size_t v = 0; v < up_.size(); ++v)
      if (!up_[v].empty() || !down_[v].empty()) return true;
    return false;
  }

  BroadcastResult take() { return std::move(result_); }

 private:
  void deliver_at_root(const Message& m) {
    const auto r = static_cast<std::size_t>(tree_->root);
    record(r, m);
    result_.items.push_back(m);
    if (!tree_->child_edges[r].empty()) down_[r].push_back(m);
  }
  void record(std::size_t v, const Message& m) {
    ++result_.received_count[v];
    result_.fingerprint[v] += message_fingerprint(m);
  }

  const BfsTree* tree_;
  std::vector<std::vector<Message>> held_;
  std::vector<std::deque<Message>> up_;
  std::vector<std::deque<Message>> down_;
  BroadcastResult result_;
};

/// Makes every item held anywhere known to every node.
inline BroadcastResult broadcast(RoundEngine& engine, const BfsTree& tree, std::vector<std::vector<Message>> held,
                                 std::string_view phase = "broadcast") {
  std::int64_t k = 0;
  for (const auto& h : held) k += static_cast<std::int64_t>(h.size());
  BroadcastProgram prog(tree, std::move(held));
  const auto stats = engine.run(phase, prog, 4 * (k + engine.n()) + 8);
  auto result = prog.take();
  result.stats = stats;
  return result;
}

}  // namespace capsp
