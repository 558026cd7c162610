#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gselc/orchestrator.hpp"

namespace gselc {

// Multimodal 4-factor test surface, maximized over integer levels 1..10.
double levy4_value(const Point& x);

// 5-factor log-product test surface, maximized over integer levels 1..10.
// Requires 0 < x_i < 11 for every coordinate.
double paviani5_value(const Point& x);

struct TestFunction {
  std::string name;
  std::vector<int> grid;  // level counts per factor (integer levels 1..L)
  std::function<double(const Point&)> fn;
};

TestFunction levy4_function();
TestFunction paviani5_function();
// Lookup by name ("levy4" or "paviani5"); throws std::invalid_argument otherwise.
TestFunction test_function_by_name(const std::string& name);

// Ground truth for success accounting: every candidate ranked by value,
// descending, ties broken by enumeration order. Always computed by brute
// force over the full library.
struct LibraryRanking {
  std::vector<std::int64_t> order;  // order[r] = candidate index with rank r+1
  std::vector<std::int64_t> rank;   // rank[i] = 1-based rank of candidate i
  std::vector<double> top_values;   // values of ranks 1..min(5, M)
  bool ties_present = false;        // any two candidates share a value
};

LibraryRanking library_ranking(const TestFunction& fn, const DesignSpace& space);

// Smallest (best) 1-based library rank attained by any sampled point.
std::int64_t best_sampled_rank(const LibraryRanking& ranking, const DesignSpace& space,
                               const Dataset& data);

// Consistency checks every benchmark run must satisfy; throws
// std::logic_error naming the first violated property. Verifies the exact
// final sample count, monotone incumbent, per-round batch accounting, and —
// via the recorded history — that no sampled point matched a forbidden entry
// that existed when its batch was proposed.
void check_run_invariants(const RunState& state);

struct BenchSettings {
  std::vector<int> run_sizes;            // total evaluation budgets N
  std::vector<int> batches;              // batch sizes b
  std::vector<Mode> methods;
  int reps = 100;
  std::uint64_t base_seed = 1;           // replication i uses seed base_seed + i
  int n0 = 0;                            // initial design size; 0 -> 10 * dims
  int forbidden_order = -1;              // -1 -> library default; >= 0 explicit
  EiForm ei_form = EiForm::standard;
  int replay_reps = 0;                   // reps with index < replay_reps run twice
                                         // and must serialize byte-identically
  std::function<void(RunConfig&)> tweak; // optional extra per-run configuration
};

struct BenchCell {
  int run_size = 0;
  int batch = 0;
  Mode method = Mode::gselc;
  std::array<std::int64_t, 5> rank_counts{};  // success ranks 1..5, mutually exclusive
  int reps = 0;
  std::uint64_t base_seed = 0;
  double mean_wall_ms = 0.0;

  // Percentage of replications whose best sampled point has library rank k.
  double r(int k) const;
  // Percentage with rank <= 5.
  double total() const;
};

struct BenchReport {
  std::string function_name;
  std::int64_t library_size = 0;
  int dims = 0;
  int n0 = 0;
  bool ties_present = false;
  std::vector<double> top_values;
  std::vector<BenchCell> cells;  // run_sizes x batches x methods, in that order
};

// Runs every (run size, batch, method) cell with paired seeds across methods
// and aggregates success ranks against the brute-force library ranking.
BenchReport run_benchmark(const TestFunction& fn, const BenchSettings& settings);

struct RelabelCase {
  int factor = 0;  // 0-based factor index
  int shift = 0;   // cyclic shift applied to that factor's level labels
};

struct RelabelReport {
  RelabelCase relabeling;
  BenchReport report;
};

// Reruns the benchmark after cyclically relabeling one factor's levels in the
// oracle's input mapping; the ground-truth ranking is re-derived by brute
// force for each relabeling.
std::vector<RelabelReport> relabel_study(const TestFunction& fn, const BenchSettings& settings,
                                         const std::vector<RelabelCase>& cases);

// CSV with header run_size,batch,method,r1,r2,r3,r4,r5,total,reps,seed.
// Percentages only — no wall-clock times, so reruns are byte-identical.
std::string benchmark_csv(const BenchReport& report);
void write_benchmark_csv(const std::string& path, const BenchReport& report);

// Aligned plain-text table (includes mean wall-clock per run).
std::string benchmark_table(const BenchReport& report);

}  // namespace gselc
