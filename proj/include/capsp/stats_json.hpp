#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"

#include "capsp/apsp.hpp"
#include "capsp/engine.hpp"

namespace capsp {

inline nlohmann::json to_json(const PhaseStats& p) {
  return {{"rounds", p.rounds}, {"max_edge_congestion", p.max_edge_congestion}, {"messages", p.messages}};
}

/// {"phases": {label: {...}}, "totals": {"rounds", "messages"}}
inline nlohmann::json to_json(const RoundStats& s) {
  nlohmann::json phases = nlohmann::json::object();
  for (const auto& [label, p] : s.phases) phases[label] = to_json(p);
  return {{"phases", phases}, {"totals", {{"rounds", s.rounds_total}, {"messages", s.messages_total}}}};
}

/// Per-level rounds of the three dominant phases divided by their budgets
/// n*sqrt(h)*log^2 n, n*sqrt(|C|)*log^2 n and |C|^2 + D.
struct PhaseRatios {
  double short_range = 0;
  double rsink = 0;
  double broadcast = 0;
  std::int64_t h = 0;
  std::int64_t centers = 0;
};

inline PhaseRatios phase_ratios(const ApspResult& r, NodeId n) {
  PhaseRatios out;
  for (const auto& it : r.iterations) {
    out.h = std::max(out.h, it.h);
    out.centers = std::max<std::int64_t>(out.centers, static_cast<std::int64_t>(it.centers));
  }
  const double levels = static_cast<double>(std::max<std::size_t>(r.iterations.size(), 1));
  const double lg = std::log2(std::max<double>(n, 2));
  const double nn = static_cast<double>(n);
  out.short_range = static_cast<double>(r.stats.rounds_with_prefix("short-range")) / levels /
                    (nn * std::sqrt(static_cast<double>(std::max<std::int64_t>(out.h, 1))) * lg * lg);
  out.rsink = static_cast<double>(r.stats.rounds_with_prefix("rsink-")) / levels /
              (nn * std::sqrt(static_cast<double>(std::max<std::int64_t>(out.centers, 1))) * lg * lg);
  out.broadcast = static_cast<double>(r.stats.rounds("broadcast")) / levels /
                  static_cast<double>(out.centers * out.centers + std::max(r.eccentricity, 1));
  return out;
}

inline nlohmann::json to_json(const PhaseRatios& p) {
  return {{"short_range", p.short_range}, {"rsink", p.rsink}, {"broadcast", p.broadcast}, {"h", p.h},
          {"centers", p.centers}};
}

inline nlohmann::json to_json(const ApspResult& r) {
  nlohmann::json doc = to_json(r.stats);
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& it : r.iterations) {
    iters.push_back({{"level", it.level},
                     {"h", it.h},
                     {"sigma", it.sigma},
                     {"centers", it.centers},
                     {"attempts", it.attempts},
                     {"fallback", it.fallback},
                     {"bottlenecks", it.bottlenecks},
                     {"rounds", it.rounds}});
  }
  doc["iterations"] = iters;
  doc["totals"]["retries"] = r.retries;
  doc["eccentricity"] = r.eccentricity;
  return doc;
}

}  // namespace capsp
