#pragma once

// Benchmark protocol: for every instance and repeat r, one start tour is drawn
// from seed = base_seed ^ r and every requested algorithm starts from it.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stemcycle/instance.hpp"
#include "stemcycle/search.hpp"

namespace stemcycle {

struct BenchConfig {
  std::vector<std::string> instance_paths;
  std::vector<Algo> algos{Algo::sec, Algo::isec, Algo::fisec};
  int repeats = 10;
  std::uint64_t base_seed = 0;
  ChainCap chain_cap = ChainCap::full;
  std::optional<std::string> optima_path;
  std::optional<std::string> output_path;
  int workers = 1;
  /// See SearchParams::nn_tie_break.
  bool nn_tie_break = true;
};

struct BenchRow {
  std::string instance;
  int n = 0;
  Algo algo = Algo::sec;
  std::uint64_t seed = 0;
  Weight start_length = 0;
  Weight best_length = 0;
  std::optional<Weight> optimum;
  std::optional<double> pct_dev;
  std::optional<double> stq;
  std::uint64_t nodes_expanded = 0;
  std::uint64_t nodes_generated = 0;
  std::uint64_t onetrees_computed = 0;
  std::uint64_t onetrees_reused = 0;
  double wall_ms = 0;
};

inline constexpr const char* kBenchCsvHeader =
    "instance,n,algo,seed,start_length,best_length,optimum,pct_dev,stq,nodes_expanded,nodes_generated,"
    "onetrees_computed,onetrees_reused,wall_ms";

/// Rows for one (instance, start seed), one per algorithm, all from the same start tour.
inline std::vector<BenchRow> run_paired(const TspInstance& inst, const std::vector<Algo>& algos, std::uint64_t seed,
                                        ChainCap cap, std::optional<Weight> optimum, bool nn_tie_break = true) {
  Rng rng(seed);
  const Tour start = random_start_tour(inst, rng);
  std::vector<BenchRow> rows;
  for (Algo algo : algos) {
    SearchParams params;
    params.algo = algo;
    params.chain_cap = cap;
    params.nn_tie_break = nn_tie_break;
    params.seed = seed;
    const SearchOutcome out = run_search(inst, start, params);
    BenchRow row;
    row.instance = inst.name();
    row.n = inst.n();
    row.algo = algo;
    row.seed = seed;
    row.start_length = out.start_length;
    row.best_length = out.best_length;
    row.optimum = optimum;
    if (optimum && *optimum > 0) {
      row.pct_dev = 100.0 * static_cast<double>(out.best_length - *optimum) / static_cast<double>(*optimum);
      row.stq = static_cast<double>(out.start_length) / static_cast<double>(*optimum);
    }
    row.nodes_expanded = out.nodes_expanded;
    row.nodes_generated = out.nodes_generated;
    row.onetrees_computed = out.onetrees_computed;
    row.onetrees_reused = out.onetrees_reused;
    row.wall_ms = out.wall_ms;
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Runs every (instance, repeat) job, in parallel when cfg.workers > 1. Row
/// order is (instance, repeat, algo) whatever the worker count.
inline std::vector<BenchRow> run_bench(const BenchConfig& cfg, std::vector<std::string>* warnings = nullptr) {
  if (cfg.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (cfg.algos.empty()) throw std::invalid_argument("no algorithms requested");
  OptimaRegistry optima;
  if (cfg.optima_path) optima = load_optima_csv(*cfg.optima_path);

  std::vector<TspInstance> instances;
  instances.reserve(cfg.instance_paths.size());
  for (const auto& path : cfg.instance_paths) instances.push_back(load_tsplib(path));

  struct Job {
    std::size_t instance;
    int repeat;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!optima.contains(instances[i].name()) && warnings)
      warnings->push_back("no known optimum for '" + instances[i].name() + "'; pct_dev and stq left empty");
    for (int r = 0; r < cfg.repeats; ++r) jobs.push_back({i, r});
  }

  std::vector<std::vector<BenchRow>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      try {
        const TspInstance& inst = instances[jobs[j].instance];
        std::optional<Weight> opt;
        if (auto it = optima.find(inst.name()); it != optima.end()) opt = it->second;
        const std::uint64_t seed = cfg.base_seed ^ static_cast<std::uint64_t>(jobs[j].repeat);
        results[j] = run_paired(inst, cfg.algos, seed, cfg.chain_cap, opt, cfg.nn_tie_break);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<BenchRow> rows;
  for (auto& chunk : results)
    for (auto& row : chunk) rows.push_back(std::move(row));
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline std::string format_csv_row(const BenchRow& r) {
  std::ostringstream out;
  out << r.instance << ',' << r.n << ',' << to_string(r.algo) << ',' << r.seed << ',' << r.start_length << ','
      << r.best_length << ',' << (r.optimum ? std::to_string(*r.optimum) : "") << ','
      << (r.pct_dev ? detail::fixed2(*r.pct_dev) : "") << ',' << (r.stq ? detail::fixed2(*r.stq) : "") << ','
      << r.nodes_expanded << ',' << r.nodes_generated << ',' << r.onetrees_computed << ',' << r.onetrees_reused
      << ',' << detail::fixed2(r.wall_ms);
  return out.str();
}

inline std::string format_csv(const std::vector<BenchRow>& rows) {
  std::string out = std::string(kBenchCsvHeader) + "\n";
  for (const auto& r : rows) out += format_csv_row(r) + "\n";
  return out;
}

inline void write_csv(const std::vector<BenchRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << format_csv(rows);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::vector<BenchRow> parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kBenchCsvHeader)
    throw std::runtime_error("bench csv: unexpected header");
  std::vector<BenchRow> rows;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(detail::trim(line));
    if (f.size() != 14) throw std::runtime_error("bench csv: expected 14 fields in '" + line + "'");
    BenchRow r;
    r.instance = f[0];
    r.n = std::stoi(f[1]);
    const auto algo = parse_algo(f[2]);
    if (!algo) throw std::runtime_error("bench csv: unknown algo '" + f[2] + "'");
    r.algo = *algo;
    r.seed = std::stoull(f[3]);
    r.start_length = std::stoll(f[4]);
    r.best_length = std::stoll(f[5]);
    if (!f[6].empty()) r.optimum = std::stoll(f[6]);
    if (!f[7].empty()) r.pct_dev = std::stod(f[7]);
    if (!f[8].empty()) r.stq = std::stod(f[8]);
    r.nodes_expanded = std::stoull(f[9]);
    r.nodes_generated = std::stoull(f[10]);
    r.onetrees_computed = std::stoull(f[11]);
    r.onetrees_reused = std::stoull(f[12]);
    r.wall_ms = std::stod(f[13]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Aggregation

struct SummaryRow {
  std::string instance;
  int n = 0;
  Algo algo = Algo::sec;
  int runs = 0;
  std::optional<double> min_pct_dev;
  std::optional<double> mean_pct_dev;
  double mean_wall_ms = 0;
  std::optional<double> mean_stq;
  double mean_expanded = 0;
  double mean_generated = 0;
  double reuse_fraction = 0;
};

/// Per-(instance, algo) min/mean over repeats, in first-appearance order.
inline std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("summarize: no rows");
  std::vector<SummaryRow> out;
  std::map<std::pair<std::string, Algo>, std::size_t> index;
  struct Acc {
    double dev_sum = 0, stq_sum = 0, wall_sum = 0, exp_sum = 0, gen_sum = 0;
    std::uint64_t computed = 0, reused = 0;
    int dev_count = 0;
  };
  std::vector<Acc> acc;
  for (const auto& r : rows) {
    auto [it, inserted] = index.try_emplace({r.instance, r.algo}, out.size());
    if (inserted) {
      SummaryRow row;
      row.instance = r.instance;
      row.n = r.n;
      row.algo = r.algo;
      out.push_back(std::move(row));
      acc.emplace_back();
    }
    SummaryRow& s = out[it->second];
    Acc& a = acc[it->second];
    ++s.runs;
    if (r.pct_dev) {
      s.min_pct_dev = s.min_pct_dev ? std::min(*s.min_pct_dev, *r.pct_dev) : *r.pct_dev;
      a.dev_sum += *r.pct_dev;
      a.stq_sum += r.stq.value_or(0);
      ++a.dev_count;
    }
    a.wall_sum += r.wall_ms;
    a.exp_sum += static_cast<double>(r.nodes_expanded);
    a.gen_sum += static_cast<double>(r.nodes_generated);
    a.computed += r.onetrees_computed;
    a.reused += r.onetrees_reused;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    SummaryRow& s = out[k];
    const Acc& a = acc[k];
    if (a.dev_count > 0) {
      s.mean_pct_dev = a.dev_sum / a.dev_count;
      s.mean_stq = a.stq_sum / a.dev_count;
    }
    s.mean_wall_ms = a.wall_sum / s.runs;
    s.mean_expanded = a.exp_sum / s.runs;
    s.mean_generated = a.gen_sum / s.runs;
    const auto total = a.computed + a.reused;
    s.reuse_fraction = total == 0 ? 0.0 : static_cast<double>(a.reused) / static_cast<double>(total);
  }
  return out;
}

inline const SummaryRow* find_summary(const std::vector<SummaryRow>& summary, const std::string& instance, Algo algo) {
  for (const auto& s : summary)
    if (s.instance == instance && s.algo == algo) return &s;
  return nullptr;
}

struct HeadToHead {
  int wins = 0;      // instances where mean_pct_dev(a) < mean_pct_dev(b)
  int compared = 0;  // instances where both means exist
};

inline HeadToHead head_to_head(const std::vector<SummaryRow>& summary, Algo a, Algo b) {
  HeadToHead h;
  for (const auto& s : summary) {
    if (s.algo != a || !s.mean_pct_dev) continue;
    const SummaryRow* other = find_summary(summary, s.instance, b);
    if (!other || !other->mean_pct_dev) continue;
    ++h.compared;
    if (*s.mean_pct_dev < *other->mean_pct_dev) ++h.wins;
  }
  return h;
}

/// Least-squares slope of mean nodes expanded against n for one algorithm.
inline double effort_slope(const std::vector<SummaryRow>& summary, Algo algo) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (const auto& s : summary) {
    if (s.algo != algo) continue;
    const double x = s.n, y = s.mean_expanded;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
  }
  const double denom = k * sxx - sx * sx;
  return (k < 2 || denom == 0) ? 0.0 : (k * sxy - sx * sy) / denom;
}

inline constexpr const char* kSummaryCsvHeader =
    "instance,n,algo,runs,min_pct_dev,mean_pct_dev,mean_cpu_ms,mean_stq,mean_expanded,mean_generated,reuse_fraction";

inline std::string format_summary_csv(const std::vector<SummaryRow>& summary) {
  auto opt = [](const std::optional<double>& v) { return v ? detail::fixed2(*v) : std::string(); };
  std::string out = std::string(kSummaryCsvHeader) + "\n";
  for (const auto& s : summary) {
    out += s.instance + ',' + std::to_string(s.n) + ',' + to_string(s.algo) + ',' + std::to_string(s.runs) + ',' +
           opt(s.min_pct_dev) + ',' + opt(s.mean_pct_dev) + ',' + detail::fixed2(s.mean_wall_ms) + ',' +
           opt(s.mean_stq) + ',' + detail::fixed2(s.mean_expanded) + ',' + detail::fixed2(s.mean_generated) + ',' +
           detail::fixed2(s.reuse_fraction) + '\n';
  }
  return out;
}

inline std::string format_summary_table(const std::vector<SummaryRow>& summary) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %5s %-6s %4s %9s %9s %11s %6s %10s %11s %6s\n", "instance", "n", "algo", "runs",
                "min%dev", "mean%dev", "cpu_ms", "stq", "expanded", "generated", "reuse");
  out += buf;
  auto opt = [](const std::optional<double>& v) { return v ? detail::fixed2(*v) : std::string("-"); };
  for (const auto& s : summary) {
    std::snprintf(buf, sizeof buf, "%-12s %5d %-6s %4d %9s %9s %11.2f %6s %10.1f %11.1f %6.2f\n", s.instance.c_str(),
                  s.n, to_string(s.algo), s.runs, opt(s.min_pct_dev).c_str(), opt(s.mean_pct_dev).c_str(),
                  s.mean_wall_ms, opt(s.mean_stq).c_str(), s.mean_expanded, s.mean_generated, s.reuse_fraction);
    out += buf;
  }
  return out;
}

inline void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace stemcycle
