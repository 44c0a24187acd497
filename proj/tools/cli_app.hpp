#pragma once

// Command-line front end. Exit codes: 0 success, 1 user error, 2 internal
// invariant failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "stemcycle/stemcycle.hpp"

namespace stemcycle::cli {

enum ExitCode : int { kOk = 0, kUserError = 1, kInternalError = 2 };

class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "1,4;2,3" -> {(1,4), (2,3)}
inline EdgeSet parse_edge_list(const std::string& text, int n) {
  EdgeSet out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ';')) {
    item = detail::trim(item);
    if (item.empty()) continue;
    const auto comma = item.find(',');
    if (comma == std::string::npos) throw UserError("bad edge '" + item + "', expected i,j");
    int a = 0, b = 0;
    try {
      std::size_t used_a = 0, used_b = 0;
      const std::string sa = detail::trim(item.substr(0, comma)), sb = detail::trim(item.substr(comma + 1));
      a = std::stoi(sa, &used_a);
      b = std::stoi(sb, &used_b);
      if (used_a != sa.size() || used_b != sb.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UserError("bad edge '" + item + "', expected i,j");
    }
    if (a == b || a < 1 || b < 1 || a > n || b > n)
      throw UserError("edge '" + item + "' is not a pair of distinct nodes in 1.." + std::to_string(n));
    out.insert(Edge(a, b));
  }
  return out;
}

inline std::optional<OptimaRegistry> try_load_optima(const std::string& path, std::ostream& err) {
  if (path.empty()) return std::nullopt;
  try {
    return load_optima_csv(path);
  } catch (const std::exception& e) {
    err << "warning: " << e.what() << "; continuing without known optima\n";
    return std::nullopt;
  }
}

inline int worker_count() {
  if (const char* env = std::getenv("STEMCYCLE_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

struct SolveArgs {
  std::string instance;
  std::string algo = "isec";
  std::uint64_t seed = 0;
  std::string chain_cap = "full";
  std::string tie_break = "nn";
  std::string optima;
  std::string csv;
};

inline int do_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const TspInstance inst = load_tsplib(a.instance);
  std::optional<Weight> optimum;
  if (auto reg = try_load_optima(a.optima, err))
    if (auto it = reg->find(inst.name()); it != reg->end()) optimum = it->second;
  const ChainCap cap = a.chain_cap == "half" ? ChainCap::half : ChainCap::full;
  const Algo algo = *parse_algo(a.algo);

  const BenchRow row = run_paired(inst, {algo}, a.seed, cap, optimum, a.tie_break == "nn").front();
  out << "instance          " << row.instance << " (n=" << row.n << ")\n"
      << "algo              " << to_string(algo) << " (chain cap " << to_string(cap) << " = "
      << chain_cap_levels(inst.n(), cap) << " levels)\n"
      << "seed              " << row.seed << "\n"
      << "start_length      " << row.start_length << "\n"
      << "best_length       " << row.best_length << "\n";
  if (row.optimum) {
    out << "optimum           " << *row.optimum << "\n"
        << "pct_dev           " << detail::fixed2(*row.pct_dev) << "\n"
        << "stq               " << detail::fixed2(*row.stq) << "\n";
  }
  out << "nodes_expanded    " << row.nodes_expanded << "\n"
      << "nodes_generated   " << row.nodes_generated << "\n"
      << "onetrees_computed " << row.onetrees_computed << "\n"
      << "onetrees_reused   " << row.onetrees_reused << "\n"
      << "wall_ms           " << detail::fixed2(row.wall_ms) << "\n";
  if (!a.csv.empty()) write_csv({row}, a.csv);
  return kOk;
}

struct BenchArgs {
  std::string instances;
  std::string algos = "sec,isec,fisec";
  int repeats = 10;
  std::uint64_t seed_base = 0;
  std::string optima;
  std::string out;
  std::string chain_cap = "full";
  std::string tie_break = "nn";
};

inline std::vector<std::string> list_instances(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw UserError("'" + dir + "' is not a directory");
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".tsp") paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw UserError("no .tsp files in '" + dir + "'");
  return paths;
}

inline int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  BenchConfig cfg;
  cfg.instance_paths = list_instances(a.instances);
  cfg.algos.clear();
  std::istringstream in(a.algos);
  for (std::string tok; std::getline(in, tok, ',');) {
    const auto algo = parse_algo(detail::trim(tok));
    if (!algo) throw UserError("unknown algo '" + tok + "' (expected sec, isec or fisec)");
    cfg.algos.push_back(*algo);
  }
  if (cfg.algos.empty()) throw UserError("--algos is empty");
  if (a.repeats < 1) throw UserError("--repeats must be at least 1");
  cfg.repeats = a.repeats;
  cfg.base_seed = a.seed_base;
  cfg.chain_cap = a.chain_cap == "half" ? ChainCap::half : ChainCap::full;
  cfg.nn_tie_break = a.tie_break == "nn";
  cfg.workers = worker_count();
  if (!a.optima.empty()) {
    if (std::filesystem::exists(a.optima)) cfg.optima_path = a.optima;
    else err << "warning: optima registry '" << a.optima << "' not found; pct_dev and stq left empty\n";
  }
  std::vector<std::string> warnings;
  const auto rows = run_bench(cfg, cfg.optima_path ? &warnings : nullptr);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  write_csv(rows, a.out);
  const auto summary = summarize(rows);
  const std::string summary_path = std::filesystem::path(a.out).replace_extension(".summary.csv").string();
  write_text(format_summary_csv(summary), summary_path);
  out << format_summary_table(summary);
  const auto h2h = head_to_head(summary, Algo::isec, Algo::sec);
  if (h2h.compared > 0)
    out << "isec mean %dev below sec on " << h2h.wins << " of " << h2h.compared << " instances\n";
  out << "wrote " << rows.size() << " rows to " << a.out << " and summary to " << summary_path << "\n";
  return kOk;
}

inline int do_oracle(const std::string& path, std::ostream& out) {
  const TspInstance inst = load_tsplib(path);
  if (inst.n() > kHeldKarpMaxNodes)
    throw UserError("oracle supports n <= " + std::to_string(kHeldKarpMaxNodes) + ", instance has n = " +
                    std::to_string(inst.n()));
  const auto [tour, length] = held_karp_optimal(inst);
  out << length << "\n" << "tour";
  for (NodeId v : tour.order) out << ' ' << v;
  out << "\n";
  return kOk;
}

inline int do_onetree(const std::string& path, const std::string& include_text, const std::string& exclude_text,
                      std::ostream& out) {
  const TspInstance inst = load_tsplib(path);
  const EdgeSet include = parse_edge_list(include_text, inst.n());
  const EdgeSet exclude = parse_edge_list(exclude_text, inst.n());
  if (include.intersects(exclude)) throw UserError("contradictory constraints: include and exclude overlap");
  const auto tree = constrained_one_tree(inst, include, exclude);
  if (!tree) throw UserError("infeasible: no 1-tree satisfies the constraints");
  const CostSplit split = cost_split(inst, *tree, include);
  out << "total " << tree->total_weight << "\n"
      << "g (white) " << split.g << "\n"
      << "h (non-white) " << split.h << "\n"
      << "edges";
  for (const Edge& e : tree->edges) out << ' ' << e.u << ',' << e.v;
  out << "\n";
  return kOk;
}

/// Parses argv and runs one subcommand. Streams are injectable for tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stem-and-Cycle ejection chains for the symmetric TSP"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run one search from a seeded random start tour");
  solve_cmd->add_option("--instance", solve.instance, "TSPLIB file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--algo", solve.algo, "sec | isec | fisec")
      ->required()
      ->check(CLI::IsMember({"sec", "isec", "fisec"}));
  solve_cmd->add_option("--seed", solve.seed, "64-bit seed for the start tour and root choice")->required();
  solve_cmd->add_option("--chain-cap", solve.chain_cap, "full (2n) | half (n)")
      ->check(CLI::IsMember({"full", "half"}));
  solve_cmd->add_option("--tie-break", solve.tie_break, "nn (nn score breaks ties in f) | lex (smallest edges only)")
      ->check(CLI::IsMember({"nn", "lex"}));
  solve_cmd->add_option("--optima", solve.optima, "optima registry CSV (name,optimum)");
  solve_cmd->add_option("--csv", solve.csv, "write the result row to this CSV file");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Paired seeded runs over a directory of instances");
  bench_cmd->add_option("--instances", bench.instances, "directory of .tsp files")->required();
  bench_cmd->add_option("--algos", bench.algos, "comma-separated subset of sec,isec,fisec");
  bench_cmd->add_option("--repeats", bench.repeats, "start tours per instance");
  bench_cmd->add_option("--seed-base", bench.seed_base, "base seed; repeat r uses seed-base XOR r");
  bench_cmd->add_option("--optima", bench.optima, "optima registry CSV (name,optimum)");
  bench_cmd->add_option("--out", bench.out, "row CSV output path")->required();
  bench_cmd->add_option("--chain-cap", bench.chain_cap, "full (2n) | half (n)")
      ->check(CLI::IsMember({"full", "half"}));
  bench_cmd->add_option("--tie-break", bench.tie_break, "nn (nn score breaks ties in f) | lex (smallest edges only)")
      ->check(CLI::IsMember({"nn", "lex"}));

  std::string oracle_instance;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact optimum by Held-Karp (n <= 12)");
  oracle_cmd->add_option("--instance", oracle_instance, "TSPLIB file")->required()->check(CLI::ExistingFile);

  std::string tree_instance, include_text, exclude_text;
  auto* tree_cmd = app.add_subcommand("onetree", "Constrained 1-tree bound");
  tree_cmd->add_option("--instance", tree_instance, "TSPLIB file")->required()->check(CLI::ExistingFile);
  tree_cmd->add_option("--include", include_text, "forced edges, e.g. \"1,4;2,3\"");
  tree_cmd->add_option("--exclude", exclude_text, "forbidden edges, e.g. \"2,3\"");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUserError;
  }

  try {
    if (*solve_cmd) return do_solve(solve, out, err);
    if (*bench_cmd) return do_bench(bench, out, err);
    if (*oracle_cmd) return do_oracle(oracle_instance, out);
    if (*tree_cmd) return do_onetree(tree_instance, include_text, exclude_text, out);
  } catch (const InvariantViolation& e) {
    err << "internal invariant failure: " << e.what() << "\n";
    return kInternalError;
  } catch (const std::logic_error& e) {
    // ContradictoryConstraints and out_of_range arguments are user errors;
    // other logic errors mean a broken contract inside the library.
    if (dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::out_of_range*>(&e)) {
      err << "error: " << e.what() << "\n";
      return kUserError;
    }
    err << "internal invariant failure: " << e.what() << "\n";
    return kInternalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUserError;
  }
  return kUserError;
}

}  // namespace stemcycle::cli
