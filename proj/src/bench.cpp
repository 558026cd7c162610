#include "gselc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "gselc/csv.hpp"
#include "gselc/state.hpp"

namespace gselc {

namespace {

double sq(double v) { return v * v; }

}  // namespace

double levy4_value(const Point& x) {
  if (x.size() != 4) throw std::invalid_argument("levy4: expected 4 coordinates");
  constexpr double pi = std::numbers::pi;
  double t = sq(std::sin(pi * (x[0] + 2.0) / 4.0));
  for (int i = 0; i + 1 < 4; ++i) {
    const double xi = x[i];
    t += sq((xi - 2.0) / 4.0) * (1.0 + 10.0 * sq(std::sin(pi * (xi + 2.0) / 4.0 + 1.0)));
  }
  const double xd = x[3];
  t += sq((xd - 2.0) / 4.0) * (1.0 + sq(std::sin(2.0 * pi * (xd - 1.0))));
  return t;
}

double paviani5_value(const Point& x) {
  if (x.size() != 5) throw std::invalid_argument("paviani5: expected 5 coordinates");
  double sum = 0.0;
  double prod = 1.0;
  for (int i = 0; i < 5; ++i) {
    const double xi = x[i];
    if (!(xi > 0.0 && xi < 11.0))
      throw std::invalid_argument("paviani5: coordinates must lie in (0, 11)");
    sum += sq(std::log(xi)) + sq(std::log(11.0 - xi));
    prod *= xi;
  }
  return sum - std::pow(prod, 0.2);
}

TestFunction levy4_function() { return {"levy4", {10, 10, 10, 10}, levy4_value}; }

TestFunction paviani5_function() { return {"paviani5", {10, 10, 10, 10, 10}, paviani5_value}; }

TestFunction test_function_by_name(const std::string& name) {
  if (name == "levy4") return levy4_function();
  if (name == "paviani5") return paviani5_function();
  throw std::invalid_argument("unknown test function '" + name + "' (use levy4 or paviani5)");
}

LibraryRanking library_ranking(const TestFunction& fn, const DesignSpace& space) {
  const std::int64_t M = space.size();
  if (M <= 0) throw std::invalid_argument("library_ranking: empty library");
  std::vector<double> values(static_cast<std::size_t>(M));
  for (std::int64_t i = 0; i < M; ++i)
    values[static_cast<std::size_t>(i)] = fn.fn(space.candidate(i));

  LibraryRanking out;
  out.order.resize(static_cast<std::size_t>(M));
  std::iota(out.order.begin(), out.order.end(), std::int64_t{0});
  std::sort(out.order.begin(), out.order.end(), [&values](std::int64_t a, std::int64_t b) {
    const double va = values[static_cast<std::size_t>(a)];
    const double vb = values[static_cast<std::size_t>(b)];
    if (va != vb) return va > vb;
    return a < b;
  });
  out.rank.assign(static_cast<std::size_t>(M), 0);
  for (std::int64_t r = 0; r < M; ++r)
    out.rank[static_cast<std::size_t>(out.order[static_cast<std::size_t>(r)])] = r + 1;
  const auto top_n = static_cast<std::size_t>(std::min<std::int64_t>(5, M));
  for (std::size_t r = 0; r < top_n; ++r)
    out.top_values.push_back(values[static_cast<std::size_t>(out.order[r])]);
  for (std::int64_t r = 0; r + 1 < M && !out.ties_present; ++r)
    out.ties_present = values[static_cast<std::size_t>(out.order[static_cast<std::size_t>(r)])] ==
                       values[static_cast<std::size_t>(out.order[static_cast<std::size_t>(r + 1)])];
  return out;
}

std::int64_t best_sampled_rank(const LibraryRanking& ranking, const DesignSpace& space,
                               const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("best_sampled_rank: no observations");
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (const auto& obs : data.all()) {
    const std::int64_t idx = space.index_of(obs.point);
    if (idx < 0) throw std::logic_error("best_sampled_rank: sampled point is not in the library");
    best = std::min(best, ranking.rank[static_cast<std::size_t>(idx)]);
  }
  return best;
}

void check_run_invariants(const RunState& state) {
  const auto& cfg = state.config;
  const auto n = static_cast<std::int64_t>(state.data.size());
  if (state.pending) throw std::logic_error("run invariant: batch left pending after completion");
  if (n != cfg.budget)
    throw std::logic_error("run invariant: final sample count " + std::to_string(n) +
                           " != budget " + std::to_string(cfg.budget));
  if (state.history.empty()) throw std::logic_error("run invariant: empty history");
  if (static_cast<int>(state.history.size()) != state.round)
    throw std::logic_error("run invariant: round counter disagrees with history length");

  // Every sampled point must be a distinct library candidate.
  std::unordered_set<std::int64_t> seen;
  for (const auto& obs : state.data.all()) {
    const std::int64_t idx = cfg.space.index_of(obs.point);
    if (idx < 0) throw std::logic_error("run invariant: sampled point outside the library");
    if (!seen.insert(idx).second)
      throw std::logic_error("run invariant: duplicate sampled point");
  }

  const auto total_forbidden = static_cast<std::int64_t>(state.forbidden.entries.size());
  std::int64_t prev_n = 0;
  double prev_fmax = -std::numeric_limits<double>::infinity();
  std::int64_t prev_forbidden = -1;
  for (std::size_t r = 0; r < state.history.size(); ++r) {
    const auto& row = state.history[r];
    if (row.round != static_cast<int>(r))
      throw std::logic_error("run invariant: history rounds are not consecutive");
    if (row.n <= prev_n || row.n > n)
      throw std::logic_error("run invariant: history sample counts are not increasing");
    const auto batch = static_cast<int>(row.n - prev_n);
    if (row.n_init + row.n_ei + row.n_selc + row.n_backfill != batch)
      throw std::logic_error("run invariant: batch origin counts do not add up");
    if (row.f_max < prev_fmax)
      throw std::logic_error("run invariant: incumbent decreased");
    if (row.forbidden_count < std::max<std::int64_t>(prev_forbidden, 0) ||
        row.forbidden_count > total_forbidden)
      throw std::logic_error("run invariant: forbidden entry count is inconsistent");

    // No point of this batch may match an entry that existed when the batch
    // was proposed (entries are appended chronologically).
    if (r > 0) {
      const auto& prev_row = state.history[r - 1];
      ForbiddenArray prefix;
      prefix.order = state.forbidden.order;
      prefix.strength = state.forbidden.strength;
      prefix.entries.assign(state.forbidden.entries.begin(),
                            state.forbidden.entries.begin() +
                                static_cast<std::ptrdiff_t>(prev_row.forbidden_count));
      for (std::int64_t i = prev_n; i < row.n; ++i)
        if (is_forbidden(prefix, state.data[static_cast<std::size_t>(i)].point))
          throw std::logic_error("run invariant: batch point was forbidden at proposal time");
    }

    prev_n = row.n;
    prev_fmax = row.f_max;
    prev_forbidden = row.forbidden_count;
  }
  if (prev_n != n) throw std::logic_error("run invariant: history does not cover all samples");
  if (prev_fmax != state.data.max_response())
    throw std::logic_error("run invariant: final incumbent disagrees with the data");
  if (prev_forbidden != total_forbidden)
    throw std::logic_error("run invariant: final forbidden count disagrees with the array");
}

double BenchCell::r(int k) const {
  if (k < 1 || k > 5) throw std::invalid_argument("BenchCell::r: k must be 1..5");
  if (reps <= 0) return 0.0;
  return 100.0 * static_cast<double>(rank_counts[static_cast<std::size_t>(k - 1)]) /
         static_cast<double>(reps);
}

double BenchCell::total() const {
  if (reps <= 0) return 0.0;
  const auto sum = std::accumulate(rank_counts.begin(), rank_counts.end(), std::int64_t{0});
  return 100.0 * static_cast<double>(sum) / static_cast<double>(reps);
}

BenchReport run_benchmark(const TestFunction& fn, const BenchSettings& settings) {
  if (settings.run_sizes.empty() || settings.batches.empty() || settings.methods.empty())
    throw std::invalid_argument("run_benchmark: run sizes, batches, and methods must be nonempty");
  if (settings.reps < 1) throw std::invalid_argument("run_benchmark: reps must be >= 1");
  if (settings.replay_reps < 0)
    throw std::invalid_argument("run_benchmark: replay_reps must be >= 0");

  const DesignSpace space = DesignSpace::grid(fn.grid);
  const int d = space.dims();
  const int n0 = settings.n0 > 0 ? settings.n0 : 10 * d;

  BenchReport report;
  report.function_name = fn.name;
  report.library_size = space.size();
  report.dims = d;
  report.n0 = n0;
  {
    const auto ranking = library_ranking(fn, space);
    report.ties_present = ranking.ties_present;
    report.top_values = ranking.top_values;
  }

  // Replications are paired: the initial design depends only on (space, n0,
  // seed), so one design per seed serves every method and cell identically.
  std::map<std::uint64_t, std::vector<Point>> design_cache;
  auto initial_design_for = [&](std::uint64_t seed) -> const std::vector<Point>& {
    auto it = design_cache.find(seed);
    if (it == design_cache.end()) {
      Rng design_rng(mix_seed(seed, 1));
      it = design_cache.emplace(seed, minimax_design(space, n0, design_rng)).first;
    }
    return it->second;
  };

  for (const int run_size : settings.run_sizes) {
    for (const int batch : settings.batches) {
      for (const Mode method : settings.methods) {
        BenchCell cell;
        cell.run_size = run_size;
        cell.batch = batch;
        cell.method = method;
        cell.reps = settings.reps;
        cell.base_seed = settings.base_seed;
        double wall_ms = 0.0;

        for (int rep = 0; rep < settings.reps; ++rep) {
          const std::uint64_t seed = settings.base_seed + static_cast<std::uint64_t>(rep);
          RunConfig cfg(space);
          cfg.n0 = n0;
          cfg.b = batch;
          cfg.budget = run_size;
          cfg.mode = method;
          cfg.seed = seed;
          cfg.ei_form = settings.ei_form;
          if (settings.forbidden_order >= 0) cfg.selc.order = settings.forbidden_order;
          if (settings.tweak) settings.tweak(cfg);
          cfg.initial_design = initial_design_for(seed);

          const auto t0 = std::chrono::steady_clock::now();
          const RunState state = run_to_budget(cfg, fn.fn);
          const auto t1 = std::chrono::steady_clock::now();
          wall_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();

          check_run_invariants(state);
          if (rep < settings.replay_reps) {
            const RunState replay = run_to_budget(cfg, fn.fn);
            if (state_to_json(state) != state_to_json(replay))
              throw std::logic_error("run invariant: identical seed did not replay identically");
          }

          const auto ranking = library_ranking(fn, space);
          const std::int64_t rank = best_sampled_rank(ranking, space, state.data);
          if (rank <= 5) ++cell.rank_counts[static_cast<std::size_t>(rank - 1)];
        }

        cell.mean_wall_ms = wall_ms / settings.reps;
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

std::vector<RelabelReport> relabel_study(const TestFunction& fn, const BenchSettings& settings,
                                         const std::vector<RelabelCase>& cases) {
  const DesignSpace space = DesignSpace::grid(fn.grid);
  std::vector<RelabelReport> out;
  out.reserve(cases.size());
  for (const auto& rc : cases) {
    if (rc.factor < 0 || rc.factor >= space.dims())
      throw std::invalid_argument("relabel_study: factor index out of range");
    const int levels = space.level_count(rc.factor);
    TestFunction relabeled = fn;
    relabeled.name =
        fn.name + "_f" + std::to_string(rc.factor + 1) + "_shift" + std::to_string(rc.shift);
    // A label shift of k means the point presented as x' carries level index
    // i' = i + k (mod L); the underlying surface is queried at the original
    // labels, so invert the shift before evaluating.
    const auto inverse = relabel_map(levels, -rc.shift);
    relabeled.fn = [base = fn.fn, space, factor = rc.factor, inverse](const Point& xp) {
      return base(relabel_point(xp, space, factor, inverse));
    };
    out.push_back({rc, run_benchmark(relabeled, settings)});
  }
  return out;
}

std::string benchmark_csv(const BenchReport& report) {
  std::string out = "run_size,batch,method,r1,r2,r3,r4,r5,total,reps,seed\n";
  for (const auto& cell : report.cells) {
    out += std::to_string(cell.run_size);
    out += ',';
    out += std::to_string(cell.batch);
    out += ',';
    out += to_string(cell.method);
    for (int k = 1; k <= 5; ++k) {
      out += ',';
      out += csv::format_double(cell.r(k));
    }
    out += ',';
    out += csv::format_double(cell.total());
    out += ',';
    out += std::to_string(cell.reps);
    out += ',';
    out += std::to_string(cell.base_seed);
    out += '\n';
  }
  return out;
}

void write_benchmark_csv(const std::string& path, const BenchReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << benchmark_csv(report);
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string benchmark_table(const BenchReport& report) {
  std::ostringstream out;
  out << "function " << report.function_name << ": " << report.library_size
      << " candidates, d=" << report.dims << ", n0=" << report.n0 << "\n";
  out << "top values:";
  char buf[64];
  for (const double v : report.top_values) {
    std::snprintf(buf, sizeof buf, " %.6f", v);
    out << buf;
  }
  out << (report.ties_present ? "  (ties present; ranks follow enumeration order)\n" : "\n");
  out << "    N    b  method    Max    2nd    3rd    4th    5th  Total  reps  mean_ms\n";
  for (const auto& cell : report.cells) {
    std::snprintf(buf, sizeof buf, "%5d %4d  %-6s", cell.run_size, cell.batch,
                  to_string(cell.method).c_str());
    out << buf;
    for (int k = 1; k <= 5; ++k) {
      std::snprintf(buf, sizeof buf, " %6.1f", cell.r(k));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, " %6.1f %5d %8.1f\n", cell.total(), cell.reps,
                  cell.mean_wall_ms);
    out << buf;
  }
  return out.str();
}

}  // namespace gselc
