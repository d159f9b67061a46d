#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capsp/error.hpp"
#include "capsp/graph.hpp"

namespace capsp {

/// Closed set of payload variants. The kind is implied by the phase schedule
/// every node follows, so it is not charged against the bandwidth budget.
enum class MessageKind : std::uint8_t {
  kToken,
  kDistance,
  kParentClaim,
  kDescendantCount,
  kBottleneckIntent,
  kBottleneckDecision,
  kRelayedDistance,
  kBroadcastItem,
  kFragment,
  kVerdict,
};

/// Bits needed for a node identifier in an n-node network.
inline int id_bits(NodeId n) {
  return std::max(1, static_cast<int>(std::bit_width(static_cast<std::uint64_t>(std::max(n, 2) - 1))));
}

inline int value_bits(std::int64_t v) {
  return std::max(1, static_cast<int>(std::bit_width(static_cast<std::uint64_t>(v))));
}

/// A CONGEST message: up to four integer fields, the leading `id_count` of
/// which are node ids (charged id_bits each) and the rest nonnegative values
/// (charged their binary length).
struct Message {
  MessageKind kind = MessageKind::kToken;
  std::uint8_t id_count = 0;
  std::uint8_t value_count = 0;
  std::array<std::int64_t, 4> fields{};

  static Message make(MessageKind kind, std::initializer_list<std::int64_t> ids,
                      std::initializer_list<std::int64_t> values = {}) {
    if (ids.size() + values.size() > 4) throw Error(ErrorKind::kInvalidArgument, "too many message fields");
    Message m;
    m.kind = kind;
    m.id_count = static_cast<std::uint8_t>(ids.size());
    m.value_count = static_cast<std::uint8_t>(values.size());
    std::size_t i = 0;
    for (auto v : ids) m.fields[i++] = v;
    for (auto v : values) m.fields[i++] = v;
    return m;
  }

  std::int64_t id(std::size_t i) const { return fields[i]; }
  std::int64_t value(std::size_t i) const { return fields[id_count + i]; }

  int serialized_bits(NodeId n) const {
    int bits = id_count * id_bits(n);
    for (std::size_t i = 0; i < value_count; ++i) {
      const auto v = fields[id_count + i];
      if (v < 0) return std::numeric_limits<int>::max();
      bits += value_bits(v);
    }
    return bits;
  }

  friend bool operator==(const Message&, const Message&) = default;
};

struct Envelope {
  NodeId from = 0;
  EdgeId edge = 0;  // directed edge from -> receiver
  Message msg;
};

struct PhaseStats {
  std::int64_t rounds = 0;
  std::int64_t max_edge_congestion = 0;
  std::int64_t messages = 0;

  PhaseStats& operator+=(const PhaseStats& o) {
    rounds += o.rounds;
    messages += o.messages;
    max_edge_congestion = std::max(max_edge_congestion, o.max_edge_congestion);
    return *this;
  }
};

/// Round accounting keyed by phase label. rounds_total is always the sum of
/// the per-phase round counts.
struct RoundStats {
  std::map<std::string, PhaseStats, std::less<>> phases;
  std::int64_t rounds_total = 0;
  std::int64_t messages_total = 0;

  void add(std::string_view phase, const PhaseStats& s) {
    auto it = phases.find(phase);
    if (it == phases.end()) it = phases.emplace(std::string(phase), PhaseStats{}).first;
    it->second += s;
    rounds_total += s.rounds;
    messages_total += s.messages;
  }

  RoundStats& operator+=(const RoundStats& o) {
    for (const auto& [k, v] : o.phases) add(k, v);
    return *this;
  }

  std::int64_t rounds(std::string_view phase) const {
    auto it = phases.find(phase);
    return it == phases.end() ? 0 : it->second.rounds;
  }

  /// Sum of rounds over every phase whose label starts with prefix.
  std::int64_t rounds_with_prefix(std::string_view prefix) const {
    std::int64_t total = 0;
    for (const auto& [k, v] : phases)
      if (std::string_view(k).starts_with(prefix)) total += v.rounds;
    return total;
  }
};

class RoundEngine;

/// Sending side handed to a node during its step. Only edges leaving the
/// stepping node may be used.
class Outbox {
 public:
  NodeId self() const { return self_; }

  void send(EdgeId e, const Message& m);

  void send_all(const Message& m);

 private:
  friend class RoundEngine;
  Outbox(RoundEngine& engine, int program) : engine_(&engine), program_(program) {}

  RoundEngine* engine_;
  int program_;
  NodeId self_ = 0;
};

/// A synchronous distributed algorithm. step() is called once per node per
/// logical round with the messages sent to that node in the previous round.
/// Implementations keep per-node state indexed by node id and must only touch
/// the stepping node's slot.
class NodeProgram {
 public:
  virtual ~NodeProgram() = default;

  virtual void step(NodeId v, std::int64_t round, std::span<const Envelope> inbox, Outbox& out) = 0;

  /// True while some node still has a send scheduled for a later round
  /// (used for quiescence detection only).
  virtual bool has_pending(std::int64_t /*round*/) const { return false; }
};

/// Process-wide record of the CONGEST contract checks, across all engines.
struct EngineAudit {
  std::int64_t messages = 0;
  std::int64_t bandwidth_violations = 0;
  int max_deliveries_per_edge_round = 0;
  /// Largest payload seen, as bits and as the budget in force at the time.
  int max_bits = 0;
  int max_bits_budget = 0;
  double max_bits_fraction = 0.0;
};

inline EngineAudit& engine_audit() {
  static EngineAudit audit;
  return audit;
}

struct EngineConfig {
  int bandwidth_factor = 4;
  std::uint64_t seed = 0;
};

/// Synchronous CONGEST executor. Programs passed to one run() call are
/// composed: they advance in lockstep logical rounds and share one FIFO queue
/// per directed edge. After every logical round the queues are drained one
/// message per edge per engine round, round-robin over programs, and the next
/// logical round starts once every queue is empty. An idle logical round with
/// work still scheduled costs one engine round.
class RoundEngine {
 public:
  explicit RoundEngine(const WeightedDigraph& g, EngineConfig cfg = {})
      : graph_(&g), cfg_(cfg), queues_(static_cast<std::size_t>(g.m())), stamp_(static_cast<std::size_t>(g.m()), -1) {}

  const WeightedDigraph& graph() const { return *graph_; }
  NodeId n() const { return graph_->n(); }
  const EngineConfig& config() const { return cfg_; }

  int bandwidth_bits() const { return cfg_.bandwidth_factor * id_bits(n()); }

  /// Engine rounds elapsed over the lifetime of this engine.
  std::int64_t clock() const { return clock_; }
  const RoundStats& stats() const { return stats_; }

  /// Independent deterministic random stream owned by node v.
  std::mt19937_64 node_rng(NodeId v, std::uint64_t stream = 0) const {
    std::seed_seq seq{static_cast<std::uint64_t>(cfg_.seed), static_cast<std::uint64_t>(v), stream};
    return std::mt19937_64(seq);
  }

  /// Records rounds spent outside a program (e.g. charged by an analytic
  /// shortcut). Only used for explicit zero-communication bookkeeping.
  void charge(std::string_view phase, const PhaseStats& s) {
    clock_ += s.rounds;
    stats_.add(phase, s);
  }

  PhaseStats run(std::string_view phase, std::span<NodeProgram* const> programs, std::int64_t max_rounds) {
    const auto prog_count = programs.size();
    const auto n = static_cast<std::size_t>(graph_->n());
    inbox_.assign(prog_count, std::vector<std::vector<Envelope>>(n));
    next_inbox_.assign(prog_count, std::vector<std::vector<Envelope>>(n));
    edge_load_.assign(static_cast<std::size_t>(graph_->m()), 0);
    PhaseStats ps;

    std::vector<Outbox> outboxes;
    outboxes.reserve(prog_count);
    for (std::size_t p = 0; p < prog_count; ++p) outboxes.push_back(Outbox(*this, static_cast<int>(p)));

    bool quiescent = false;
    for (std::int64_t round = 0; round < max_rounds; ++round) {
      for (std::size_t p = 0; p < prog_count; ++p) {
        for (NodeId v = 0; v < graph_->n(); ++v) {
          outboxes[p].self_ = v;
          programs[p]->step(v, round, inbox_[p][static_cast<std::size_t>(v)], outboxes[p]);
        }
      }
      for (auto& per_prog : inbox_)
        for (auto& box : per_prog) box.clear();

      const std::int64_t sent = static_cast<std::int64_t>(enqueued_);
      const std::int64_t drained = drain(prog_count);
      ps.messages += sent;
      enqueued_ = 0;
      std::swap(inbox_, next_inbox_);

      if (sent == 0) {
        bool pending = false;
        for (auto* prog : programs) pending = pending || prog->has_pending(round);
        if (!pending) {
          quiescent = true;
          break;
        }
        ps.rounds += 1;
        clock_ += 1;
      } else {
        ps.rounds += drained;
      }
    }
    if (!quiescent) {
      bool leftover = false;
      for (auto& per_prog : inbox_)
        for (auto& box : per_prog) leftover = leftover || !box.empty();
      for (auto* prog : programs) leftover = leftover || prog->has_pending(max_rounds);
      if (leftover)
        throw Error(ErrorKind::kNonQuiescent,
                    "phase '" + std::string(phase) + "' still active after " + std::to_string(max_rounds) + " rounds");
    }
    for (auto load : edge_load_) ps.max_edge_congestion = std::max<std::int64_t>(ps.max_edge_congestion, load);
    stats_.add(phase, ps);
    return ps;
  }

  PhaseStats run(std::string_view phase, NodeProgram& program, std::int64_t max_rounds) {
    NodeProgram* p = &program;
    return run(phase, std::span<NodeProgram* const>(&p, 1), max_rounds);
  }

  /// Largest number of messages ever delivered over one directed edge within
  /// a single engine round (the CONGEST contract requires this to be <= 1).
  int max_deliveries_per_edge_round() const { return max_deliveries_; }

 private:
  friend class Outbox;

  void enqueue(int program, NodeId from, EdgeId e, const Message& m) {
    if (e < 0 || e >= graph_->m() || graph_->tail(e) != from)
      throw std::logic_error("node " + std::to_string(from) + " sent on a non-incident edge");
    const int bits = m.serialized_bits(graph_->n());
    auto& audit = engine_audit();
    ++audit.messages;
    const double fraction = static_cast<double>(bits) / bandwidth_bits();
    if (fraction > audit.max_bits_fraction) {
      audit.max_bits_fraction = fraction;
      audit.max_bits = bits;
      audit.max_bits_budget = bandwidth_bits();
    }
    if (bits > bandwidth_bits()) ++audit.bandwidth_violations;
    if (bits > bandwidth_bits())
      throw Error(ErrorKind::kBandwidthViolation, "message of " + std::to_string(bits) + " bits exceeds budget of " +
                                                      std::to_string(bandwidth_bits()));
    auto& q = queues_[static_cast<std::size_t>(e)];
    if (q.empty()) active_.push_back(e);
    q.push_back({program, m});
    ++edge_load_[static_cast<std::size_t>(e)];
    ++enqueued_;
  }

  /// Empties every edge queue, one message per edge per engine round.
  /// Returns the number of engine rounds used.
  std::int64_t drain(std::size_t prog_count) {
    if (active_.empty()) return 0;
    if (prog_count > 1) {
      for (EdgeId e : active_) interleave(queues_[static_cast<std::size_t>(e)], prog_count);
    }
    std::vector<EdgeId> live = active_;
    std::int64_t slot = 0;
    while (!live.empty()) {
      const std::int64_t now = clock_;
      std::size_t keep = 0;
      for (EdgeId e : live) {
        auto& q = queues_[static_cast<std::size_t>(e)];
        auto& stamp = stamp_[static_cast<std::size_t>(e)];
        max_deliveries_ = std::max(max_deliveries_, stamp == now ? 2 : 1);
        engine_audit().max_deliveries_per_edge_round =
            std::max(engine_audit().max_deliveries_per_edge_round, max_deliveries_);
        stamp = now;
        const auto& [prog, msg] = q[static_cast<std::size_t>(slot)];
        next_inbox_[static_cast<std::size_t>(prog)][static_cast<std::size_t>(graph_->head(e))].push_back(
            Envelope{graph_->tail(e), e, msg});
        if (static_cast<std::size_t>(slot) + 1 < q.size()) live[keep++] = e;
      }
      live.resize(keep);
      ++slot;
      ++clock_;
    }
    for (EdgeId e : active_) queues_[static_cast<std::size_t>(e)].clear();
    active_.clear();
    return slot;
  }

  static void interleave(std::vector<std::pair<int, Message>>& q, std::size_t prog_count) {
    if (q.size() < 2) return;
    std::vector<std::vector<std::size_t>> by_prog(prog_count);
    for (std::size_t i = 0; i < q.size(); ++i) by_prog[static_cast<std::size_t>(q[i].first)].push_back(i);
    std::vector<std::pair<int, Message>> out;
    out.reserve(q.size());
    std::vector<std::size_t> cursor(prog_count, 0);
    while (out.size() < q.size()) {
      for (std::size_t p = 0; p < prog_count; ++p) {
        if (cursor[p] < by_prog[p].size()) out.push_back(q[by_prog[p][cursor[p]++]]);
      }
    }
    q = std::move(out);
  }

  const WeightedDigraph* graph_;
  EngineConfig cfg_;
  RoundStats stats_;
  std::int64_t clock_ = 0;
  std::vector<std::vector<std::pair<int, Message>>> queues_;
  std::vector<EdgeId> active_;
  std::vector<std::int64_t> stamp_;
  std::vector<std::int64_t> edge_load_;
  std::vector<std::vector<std::vector<Envelope>>> inbox_;
  std::vector<std::vector<std::vector<Envelope>>> next_inbox_;
  std::size_t enqueued_ = 0;
  int max_deliveries_ = 0;
};

inline void Outbox::send(EdgeId e, const Message& m) { engine_->enqueue(program_, self_, e, m); }

inline void Outbox::send_all(const Message& m) {
  const auto& g = engine_->graph();
  for (EdgeId e = g.first_edge(self_); e < g.end_edge(self_); ++e) engine_->enqueue(program_, self_, e, m);
}

}  // namespace capsp
