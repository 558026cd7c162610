#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gselc/bench.hpp"
#include "gselc/csv.hpp"
#include "gselc/errors.hpp"
#include "gselc/state.hpp"

namespace {

using namespace gselc;

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": '" + item + "' is not an integer");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

std::vector<Mode> parse_methods(const std::string& text) {
  if (text == "all") return {Mode::ei, Mode::selc, Mode::gselc};
  std::vector<Mode> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    out.push_back(mode_from_string(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("--method: empty list");
  return out;
}

EiForm parse_ei_form(const std::string& text) {
  if (text == "standard") return EiForm::standard;
  if (text == "as_printed") return EiForm::as_printed;
  throw std::invalid_argument("--ei-form must be 'standard' or 'as_printed'");
}

struct BenchArgs {
  std::string function = "levy4";
  std::string budgets;
  std::string batches;
  std::string method = "all";
  int reps = 100;
  std::uint64_t seed = 1;
  int n0 = 0;
  int order = -1;
  int strength = 0;
  double w0 = -1.0;
  double c = -1.0;
  std::string ei_form = "standard";
  int replay = 0;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  const TestFunction fn = test_function_by_name(a.function);
  BenchSettings settings;
  settings.run_sizes = parse_int_list(a.budgets, "--budget");
  settings.batches = parse_int_list(a.batches, "--batch");
  settings.methods = parse_methods(a.method);
  settings.reps = a.reps;
  settings.base_seed = a.seed;
  settings.n0 = a.n0;
  settings.forbidden_order = a.order;
  settings.ei_form = parse_ei_form(a.ei_form);
  settings.replay_reps = a.replay;
  if (a.strength > 0 || a.w0 >= 0.0 || a.c > 0.0) {
    const int strength = a.strength;
    const double w0 = a.w0;
    const double c = a.c;
    settings.tweak = [strength, w0, c](RunConfig& cfg) {
      if (strength > 0) cfg.selc.strength = strength;
      if (w0 >= 0.0) cfg.selc.w0 = w0;
      if (c > 0.0) cfg.mixing.c = c;
    };
  }

  const BenchReport report = run_benchmark(fn, settings);
  if (!a.out.empty()) {
    write_benchmark_csv(a.out, report);
    std::filesystem::path txt(a.out);
    txt.replace_extension(".txt");
    std::ofstream tout(txt);
    if (!tout) throw StateError("cannot write " + txt.string());
    tout << benchmark_table(report);
    std::cout << "wrote " << a.out << " and " << txt.string() << "\n";
  }
  std::cout << benchmark_table(report);
  return 0;
}

int cmd_init(const std::string& config_path, const std::string& state_path,
             const std::string& pending_out, bool force) {
  if (std::filesystem::exists(state_path) && !force)
    throw StateError("state file " + state_path + " already exists (use --force to replace it)");
  const RunConfig cfg = load_run_config(config_path);
  StateLock lock(state_path);
  RunState state = init_run(cfg);

  std::vector<Point> pts;
  for (const auto& pp : state.pending->points) pts.push_back(pp.point);
  const std::string pending_path =
      pending_out.empty() ? state_path + ".pending.csv" : pending_out;
  csv::write_points_csv(pending_path, pts, cfg.space);
  save_state(state_path, state);

  std::cout << "initialized: " << cfg.space.size() << " candidates, " << cfg.space.dims()
            << " factors, budget " << cfg.budget << "\n"
            << "initial design (" << pts.size() << " points) written to " << pending_path
            << "\nevaluate those points, then run: ingest --state " << state_path
            << " --results <csv>\n";
  return 0;
}

int cmd_ingest(const std::string& state_path, const std::string& results_path) {
  StateLock lock(state_path);
  RunState state = load_state(state_path);
  const std::size_t n_before = state.data.size();
  const std::size_t forbidden_before = state.forbidden.entries.size();

  const auto results = csv::read_results_csv(results_path, state.config.space);
  ingest_results(state, results);
  save_state(state_path, state);

  std::cout << "ingested " << (state.data.size() - n_before) << " results: n=" << state.data.size()
            << ", f_max=" << csv::format_double(state.data.max_response())
            << ", new forbidden entries: " << (state.forbidden.entries.size() - forbidden_before)
            << " (total " << state.forbidden.entries.size() << ")\n";
  if (static_cast<std::int64_t>(state.data.size()) >= state.config.budget)
    std::cout << "evaluation budget reached\n";
  return 0;
}

int cmd_suggest(const std::string& state_path, int batch, const std::string& out) {
  StateLock lock(state_path);
  RunState state = load_state(state_path);
  const BatchProposal prop = propose_batch(state, batch);

  const std::string out_path = out.empty() ? state_path + ".proposal.csv" : out;
  csv::write_proposal_csv(out_path, prop, state.config.space);
  save_state(state_path, state);

  std::cout << "round " << prop.round << ": proposed " << prop.points.size() << " points ("
            << prop.ei_count << " ei, " << prop.selc_count << " selc, " << prop.backfill_count
            << " backfill)";
  if (!std::isnan(prop.alpha)) std::cout << ", alpha=" << csv::format_double(prop.alpha);
  std::cout << "\nwrote " << out_path << "\nevaluate those points, then ingest the results\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch-sequential optimizer for discrete design spaces"};
  app.require_subcommand(1);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "run simulation benchmark cells");
  bench->add_option("--function", bench_args.function, "test surface: levy4 or paviani5");
  bench->add_option("--budget", bench_args.budgets, "total run size N (comma list allowed)")
      ->required();
  bench->add_option("--batch", bench_args.batches, "batch size b (comma list allowed)")
      ->required();
  bench->add_option("--method", bench_args.method, "ei, selc, gselc, a comma list, or all");
  bench->add_option("--reps", bench_args.reps, "replications per cell");
  bench->add_option("--seed", bench_args.seed, "base seed; replication i uses seed+i");
  bench->add_option("--n0", bench_args.n0, "initial design size (default 10 x factors)");
  bench->add_option("--order", bench_args.order, "forbidden-array match order");
  bench->add_option("--strength", bench_args.strength, "worst runs banned per round");
  bench->add_option("--w0", bench_args.w0, "baseline share of the mutation distribution");
  bench->add_option("--c", bench_args.c, "promising-region threshold factor");
  bench->add_option("--ei-form", bench_args.ei_form, "standard or as_printed");
  bench->add_option("--replay", bench_args.replay, "first K reps rerun and compared");
  bench->add_option("--out", bench_args.out, "CSV output path (table goes to .txt)");

  std::string init_config, init_state, init_pending;
  bool init_force = false;
  auto* init = app.add_subcommand("init", "start a campaign from a JSON config");
  init->add_option("--config", init_config, "campaign config JSON")->required();
  init->add_option("--state", init_state, "state file to create")->required();
  init->add_option("--pending-out", init_pending, "where to write the initial design CSV");
  init->add_flag("--force", init_force, "replace an existing state file");

  std::string ingest_state, ingest_results_path;
  auto* ingest = app.add_subcommand("ingest", "record responses for the pending batch");
  ingest->add_option("--state", ingest_state, "state file")->required();
  ingest->add_option("--results", ingest_results_path, "CSV with factor columns + y")->required();

  std::string suggest_state, suggest_out;
  int suggest_batch = 0;
  auto* suggest = app.add_subcommand("suggest", "propose the next batch");
  suggest->add_option("--state", suggest_state, "state file")->required();
  suggest->add_option("--batch", suggest_batch, "override the configured batch size");
  suggest->add_option("--out", suggest_out, "proposal CSV path");

  try {
    app.parse(argc, argv);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (init->parsed()) return cmd_init(init_config, init_state, init_pending, init_force);
    if (ingest->parsed()) return cmd_ingest(ingest_state, ingest_results_path);
    if (suggest->parsed()) return cmd_suggest(suggest_state, suggest_batch, suggest_out);
    throw std::invalid_argument("no subcommand given");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const StateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
