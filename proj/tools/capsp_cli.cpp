// capsp: generate graphs and run the distributed shortest-path pipelines.
//
// Exit codes: 0 ok, 1 verification or oracle mismatch, 2 usage / IO / input error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "capsp/capsp.hpp"
#include "capsp/oracle.hpp"
#include "capsp/stats_json.hpp"

namespace {

using namespace capsp;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int code;
  json record;
};

WeightRange parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const Weight w = std::stoll(text);
      return {w, w};
    }
    return {std::stoll(text.substr(0, dots)), std::stoll(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw Error(ErrorKind::kBadSpec, "weight range '" + text + "' is not lo..hi");
  }
}

std::vector<NodeId> parse_ids(const std::string& text) {
  std::vector<NodeId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(static_cast<NodeId>(std::stol(item)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidArgument, "bad node id '" + item + "'");
    }
  }
  return out;
}

// "gen:kind:n:lo..hi" builds a graph in place, otherwise the value is a file.
WeightedDigraph load_graph(const std::string& spec, std::uint64_t seed, const GraphLimits& limits) {
  if (spec.rfind("gen:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(4));
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw Error(ErrorKind::kBadSpec, "expected gen:kind:n:lo..hi");
    return generate(parts[0], static_cast<NodeId>(std::stol(parts[1])), parse_range(parts[2]), seed);
  }
  std::ifstream in(spec);
  if (!in) throw Error(ErrorKind::kParse, "cannot open '" + spec + "'");
  return parse_graph(in, limits);
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kParse, "cannot write '" + path + "'");
  out << text;
}

struct RunOptions {
  std::string graph;
  std::string mode = "apsp";
  std::uint64_t seed = 0;
  int k = 0;
  std::string sources;
  std::int64_t h = 0;
  double alpha = 3.0;
  int bandwidth_factor = 4;
  int weight_exponent = 2;
  bool check_oracle = false;
  std::string emit_distances;
  std::string stats_out;
  std::string inject_fault;
};

int run(const RunOptions& opt) {
  GraphLimits limits;
  limits.weight_exponent = opt.weight_exponent;
  const WeightedDigraph g = load_graph(opt.graph, opt.seed, limits);

  ApspConfig cfg;
  cfg.alpha = opt.alpha;
  cfg.h = opt.h;
  cfg.bandwidth_factor = opt.bandwidth_factor;

  ApspResult res;
  if (opt.mode == "apsp" || opt.mode == "phase-bench") {
    res = apsp(g, opt.seed, cfg);
  } else if (opt.mode == "kssp") {
    std::vector<NodeId> src = parse_ids(opt.sources);
    if (src.empty()) {
      if (opt.k <= 0) throw Error(ErrorKind::kInvalidArgument, "kssp needs --k or --sources");
      for (NodeId v = 0; v < std::min<NodeId>(opt.k, g.n()); ++v) src.push_back(v);
    }
    if (opt.k > 0 && static_cast<int>(src.size()) != opt.k)
      throw Error(ErrorKind::kInvalidArgument, "--k disagrees with the number of --sources");
    res = kssp(g, src, opt.seed, cfg);
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown mode '" + opt.mode + "'");
  }

  json doc = to_json(res);
  doc["mode"] = opt.mode;
  doc["n"] = g.n();
  doc["m"] = g.m();
  doc["seed"] = opt.seed;
  if (opt.mode == "phase-bench") doc["budget_ratios"] = to_json(phase_ratios(res, g.n()));

  std::vector<Failure> failures;

  if (!opt.inject_fault.empty()) {
    // kind:s:t alters one claimed entry, then the verification pass reruns.
    std::vector<std::string> parts;
    std::stringstream ss(opt.inject_fault);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3 || (parts[0] != "inflate" && parts[0] != "deflate"))
      throw Error(ErrorKind::kInvalidArgument, "--inject-fault expects inflate|deflate:s:t");
    const NodeId s = static_cast<NodeId>(std::stol(parts[1]));
    const NodeId t = static_cast<NodeId>(std::stol(parts[2]));
    if (t < 0 || t >= g.n()) throw Error(ErrorKind::kNodeOutOfRange, "fault target " + parts[2]);
    DistTable claimed;
    claimed.sources = res.sources;
    claimed.d = res.dist;
    const int row = claimed.index_of(s);
    if (row < 0) throw Error(ErrorKind::kInvalidArgument, "fault source " + parts[1] + " is not tracked");
    auto& entry = claimed.d[static_cast<std::size_t>(row)][static_cast<std::size_t>(t)];
    if (parts[0] == "inflate") {
      ++entry;
    } else {
      if (entry == 0) throw Error(ErrorKind::kInvalidArgument, "cannot deflate a zero entry");
      --entry;
    }
    RoundEngine engine(g, EngineConfig{opt.bandwidth_factor, opt.seed});
    const auto tree = build_bfs_tree(engine);
    const auto verdict = verify_distributed(engine, tree, view(g, g.weights()), claimed);
    if (!verdict.ok) {
      json w = json::array();
      for (auto [a, b] : verdict.witnesses) w.push_back({a, b});
      failures.push_back({kExitVerify, {{"error", "VerificationFailed"}, {"fault", opt.inject_fault}, {"witnesses", w}}});
    }
  }

  if (opt.check_oracle) {
    json bad = json::array();
    for (std::size_t k = 0; k < res.sources.size(); ++k) {
      const auto truth = oracle::dijkstra(g, g.weights(), res.sources[k]);
      for (NodeId t = 0; t < g.n(); ++t)
        if (truth[static_cast<std::size_t>(t)] != res.dist[k][static_cast<std::size_t>(t)] && bad.size() < 20)
          bad.push_back({res.sources[k], t});
    }
    if (!bad.empty()) failures.push_back({kExitVerify, {{"error", "OracleMismatch"}, {"pairs", bad}}});
    doc["oracle"] = bad.empty() ? "match" : "mismatch";
  }

  if (!opt.stats_out.empty()) write_text(opt.stats_out, doc.dump(2) + "\n");
  if (!opt.emit_distances.empty()) {
    std::ostringstream csv;
    write_distance_csv(csv, res);
    write_text(opt.emit_distances, csv.str());
  }
  for (const auto& f : failures) std::cerr << f.record.dump() << "\n";
  return failures.empty() ? kExitOk : kExitVerify;
}

json error_record(const Error& e) { return {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CONGEST shortest paths simulator"};
  app.require_subcommand(1);
  // -h would clash with the hop parameter --h.
  app.set_help_flag("--help", "print help");

  auto* gen = app.add_subcommand("gen", "write a generated graph");
  std::string kind, range = "1..1", out = "-";
  NodeId n = 0;
  std::uint64_t gen_seed = 0;
  gen->add_option("kind", kind, "random|path|star|cycle|grid")->required();
  gen->add_option("n", n, "node count")->required();
  gen->add_option("--weights", range, "weight range lo..hi");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("-o,--out", out, "output file, - for stdout");

  auto* runc = app.add_subcommand("run", "run a pipeline on a graph");
  RunOptions opt;
  runc->add_option("--graph", opt.graph, "graph file or gen:kind:n:lo..hi")->required();
  runc->add_option("--mode", opt.mode, "apsp|kssp|phase-bench");
  runc->add_option("--seed", opt.seed);
  runc->add_option("--k", opt.k);
  runc->add_option("--sources", opt.sources, "comma separated source ids");
  runc->add_option("--h", opt.h, "hop parameter override");
  runc->add_option("--alpha", opt.alpha);
  runc->add_option("--bandwidth-factor", opt.bandwidth_factor);
  runc->add_option("--weight-exponent", opt.weight_exponent);
  runc->add_flag("--check-oracle", opt.check_oracle);
  runc->add_option("--emit-distances", opt.emit_distances, "CSV output, - for stdout");
  runc->add_option("--stats-out", opt.stats_out, "stats JSON output, - for stdout");
  runc->add_option("--inject-fault", opt.inject_fault, "inflate|deflate:s:t");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      const auto g = generate(kind, n, parse_range(range), gen_seed);
      write_text(out, serialize_graph(g));
      return kExitOk;
    }
    return run(opt);
  } catch (const Error& e) {
    std::cerr << error_record(e).dump() << "\n";
    return e.kind() == ErrorKind::kVerificationFailed ? kExitVerify : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return kExitUsage;
  }
}
