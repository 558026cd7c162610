#include "gselc/state.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gselc/csv.hpp"
#include "gselc/errors.hpp"

namespace gselc {

namespace {

using nlohmann::json;

json from_double(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double to_double(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

json from_point(const Point& p) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) arr.push_back(p[i]);
  return arr;
}

Point to_point(const json& j) {
  Point p(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return p;
}

json from_points(const std::vector<Point>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(from_point(p));
  return arr;
}

std::vector<Point> to_points(const json& j) {
  std::vector<Point> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(to_point(e));
  return out;
}

json space_to_json(const DesignSpace& space) {
  json j;
  json levels = json::array();
  for (int f = 0; f < space.dims(); ++f) levels.push_back(space.levels(f));
  j["levels"] = levels;
  j["names"] = space.factor_names();
  if (space.has_explicit_candidates()) {
    const Eigen::MatrixXd cand = space.enumerate();
    json rows = json::array();
    for (Eigen::Index r = 0; r < cand.rows(); ++r) rows.push_back(from_point(cand.row(r)));
    j["candidates"] = rows;
  }
  return j;
}

DesignSpace space_from_json(const json& j) {
  std::vector<std::vector<double>> levels;
  for (const auto& lv : j.at("levels")) levels.push_back(lv.get<std::vector<double>>());
  std::vector<std::string> names = j.at("names").get<std::vector<std::string>>();
  if (!j.contains("candidates")) return DesignSpace(std::move(levels), std::move(names));
  const auto& rows = j.at("candidates");
  Eigen::MatrixXd cand(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(levels.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    cand.row(static_cast<Eigen::Index>(r)) = to_point(rows[r]);
  return DesignSpace(std::move(levels), std::move(cand), std::move(names));
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["space"] = space_to_json(cfg.space);
  j["n0"] = cfg.n0;
  j["b"] = cfg.b;
  j["budget"] = cfg.budget;
  j["mode"] = to_string(cfg.mode);
  j["seed"] = cfg.seed;
  j["ei_form"] = cfg.ei_form == EiForm::standard ? "standard" : "as_printed";
  j["fit"] = {{"starts", cfg.fit.starts},
              {"nm_max_evals", cfg.fit.nm_max_evals},
              {"nm_tol", cfg.fit.nm_tol},
              {"theta_min", cfg.fit.theta_min},
              {"theta_max", cfg.fit.theta_max},
              {"p_exponent", cfg.fit.p_exponent},
              {"nugget_ladder", cfg.fit.nugget_ladder},
              {"polish_max_rounds", cfg.fit.polish_max_rounds}};
  j["selc"] = {{"strength", cfg.selc.strength},
               {"order", cfg.selc.order},
               {"w0", cfg.selc.w0},
               {"p_mut", cfg.selc.p_mut},
               {"retry_factor", cfg.selc.retry_factor},
               {"significance_alpha", cfg.selc.significance_alpha}};
  j["mixing"] = {{"c", cfg.mixing.c},
                 {"k_max", cfg.mixing.k_max},
                 {"silhouette_threshold", cfg.mixing.silhouette_threshold},
                 {"kmeans_restarts", cfg.mixing.kmeans_restarts},
                 {"kmeans_max_iters", cfg.mixing.kmeans_max_iters},
                 {"silhouette_cap", cfg.mixing.silhouette_cap}};
  j["cluster_diagnostics"] = cfg.cluster_diagnostics;
  j["prior_forbidden"] = from_points(cfg.prior_forbidden);
  j["initial_design"] = from_points(cfg.initial_design);
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg(space_from_json(j.at("space")));
  cfg.n0 = j.at("n0").get<int>();
  cfg.b = j.at("b").get<int>();
  cfg.budget = j.at("budget").get<std::int64_t>();
  cfg.mode = mode_from_string(j.at("mode").get<std::string>());
  cfg.seed = j.at("seed").get<std::uint64_t>();
  const auto form = j.at("ei_form").get<std::string>();
  if (form != "standard" && form != "as_printed")
    throw std::invalid_argument("config: unknown ei_form '" + form + "'");
  cfg.ei_form = form == "standard" ? EiForm::standard : EiForm::as_printed;
  const auto& fit = j.at("fit");
  cfg.fit.starts = fit.at("starts").get<int>();
  cfg.fit.nm_max_evals = fit.at("nm_max_evals").get<int>();
  cfg.fit.nm_tol = fit.at("nm_tol").get<double>();
  cfg.fit.theta_min = fit.at("theta_min").get<double>();
  cfg.fit.theta_max = fit.at("theta_max").get<double>();
  cfg.fit.p_exponent = fit.at("p_exponent").get<double>();
  cfg.fit.nugget_ladder = fit.at("nugget_ladder").get<std::vector<double>>();
  cfg.fit.polish_max_rounds = fit.at("polish_max_rounds").get<int>();
  const auto& selc = j.at("selc");
  cfg.selc.strength = selc.at("strength").get<int>();
  cfg.selc.order = selc.at("order").get<int>();
  cfg.selc.w0 = selc.at("w0").get<double>();
  cfg.selc.p_mut = selc.at("p_mut").get<double>();
  cfg.selc.retry_factor = selc.at("retry_factor").get<int>();
  cfg.selc.significance_alpha = selc.at("significance_alpha").get<double>();
  const auto& mixing = j.at("mixing");
  cfg.mixing.c = mixing.at("c").get<double>();
  cfg.mixing.k_max = mixing.at("k_max").get<int>();
  cfg.mixing.silhouette_threshold = mixing.at("silhouette_threshold").get<double>();
  cfg.mixing.kmeans_restarts = mixing.at("kmeans_restarts").get<int>();
  cfg.mixing.kmeans_max_iters = mixing.at("kmeans_max_iters").get<int>();
  cfg.mixing.silhouette_cap = mixing.at("silhouette_cap").get<std::int64_t>();
  cfg.cluster_diagnostics = j.at("cluster_diagnostics").get<bool>();
  cfg.prior_forbidden = to_points(j.at("prior_forbidden"));
  cfg.initial_design = to_points(j.at("initial_design"));
  return cfg;
}

json proposal_to_json(const BatchProposal& prop) {
  json pts = json::array();
  for (const auto& pp : prop.points)
    pts.push_back({{"point", from_point(pp.point)},
                   {"origin", to_string(pp.origin)},
                   {"y_hat", from_double(pp.y_hat)},
                   {"s2", from_double(pp.s2)},
                   {"ei", from_double(pp.ei)}});
  return {{"round", prop.round},
          {"points", pts},
          {"alpha", from_double(prop.alpha)},
          {"region_size", prop.region_size},
          {"library_size", prop.library_size},
          {"cluster_k", prop.cluster_k},
          {"ei_count", prop.ei_count},
          {"selc_count", prop.selc_count},
          {"backfill_count", prop.backfill_count},
          {"truncated", prop.truncated},
          {"fit_degenerate", prop.fit_degenerate},
          {"fit_nugget", from_double(prop.fit_nugget)}};
}

BatchProposal proposal_from_json(const json& j) {
  BatchProposal prop;
  prop.round = j.at("round").get<int>();
  for (const auto& e : j.at("points")) {
    ProposalPoint pp;
    pp.point = to_point(e.at("point"));
    pp.origin = origin_from_string(e.at("origin").get<std::string>());
    pp.y_hat = to_double(e.at("y_hat"));
    pp.s2 = to_double(e.at("s2"));
    pp.ei = to_double(e.at("ei"));
    prop.points.push_back(std::move(pp));
  }
  prop.alpha = to_double(j.at("alpha"));
  prop.region_size = j.at("region_size").get<std::int64_t>();
  prop.library_size = j.at("library_size").get<std::int64_t>();
  prop.cluster_k = j.at("cluster_k").get<int>();
  prop.ei_count = j.at("ei_count").get<int>();
  prop.selc_count = j.at("selc_count").get<int>();
  prop.backfill_count = j.at("backfill_count").get<int>();
  prop.truncated = j.at("truncated").get<bool>();
  prop.fit_degenerate = j.at("fit_degenerate").get<bool>();
  prop.fit_nugget = to_double(j.at("fit_nugget"));
  return prop;
}

json history_to_json(const std::vector<HistoryRow>& history) {
  json arr = json::array();
  for (const auto& r : history)
    arr.push_back({{"round", r.round},
                   {"n", r.n},
                   {"f_max", r.f_max},
                   {"alpha", from_double(r.alpha)},
                   {"region_size", r.region_size},
                   {"cluster_k", r.cluster_k},
                   {"n_init", r.n_init},
                   {"n_ei", r.n_ei},
                   {"n_selc", r.n_selc},
                   {"n_backfill", r.n_backfill},
                   {"forbidden_count", r.forbidden_count}});
  return arr;
}

std::vector<HistoryRow> history_from_json(const json& j) {
  std::vector<HistoryRow> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    HistoryRow r;
    r.round = e.at("round").get<int>();
    r.n = e.at("n").get<std::int64_t>();
    r.f_max = e.at("f_max").get<double>();
    r.alpha = to_double(e.at("alpha"));
    r.region_size = e.at("region_size").get<std::int64_t>();
    r.cluster_k = e.at("cluster_k").get<int>();
    r.n_init = e.at("n_init").get<int>();
    r.n_ei = e.at("n_ei").get<int>();
    r.n_selc = e.at("n_selc").get<int>();
    r.n_backfill = e.at("n_backfill").get<int>();
    r.forbidden_count = e.at("forbidden_count").get<std::int64_t>();
    out.push_back(r);
  }
  return out;
}

}  // namespace

std::string state_to_json(const RunState& state) {
  json j;
  j["format_version"] = kStateFormatVersion;
  j["config"] = config_to_json(state.config);
  json pts = json::array();
  json ys = json::array();
  for (std::size_t i = 0; i < state.data.size(); ++i) {
    pts.push_back(from_point(state.data[i].point));
    ys.push_back(state.data[i].y);
  }
  j["data"] = {{"points", pts}, {"y", ys}};
  j["forbidden"] = {{"entries", from_points(state.forbidden.entries)},
                    {"strength", state.forbidden.strength},
                    {"order", state.forbidden.order}};
  j["rng"] = state.rng.serialize();
  j["round"] = state.round;
  j["pending"] = state.pending ? proposal_to_json(*state.pending) : json(nullptr);
  j["history"] = history_to_json(state.history);
  return j.dump(2) + "\n";
}

RunState state_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kStateFormatVersion)
      throw StateError("state file has format version " + std::to_string(version) +
                       "; this build reads version " + std::to_string(kStateFormatVersion));
    RunState state(config_from_json(j.at("config")));
    state.config.validate();
    const auto& data = j.at("data");
    const auto& pts = data.at("points");
    const auto& ys = data.at("y");
    if (pts.size() != ys.size()) throw StateError("state file: points/y length mismatch");
    for (std::size_t i = 0; i < pts.size(); ++i)
      state.data.add(to_point(pts[i]), ys[i].get<double>());
    const auto& fa = j.at("forbidden");
    state.forbidden.entries = to_points(fa.at("entries"));
    state.forbidden.strength = fa.at("strength").get<int>();
    state.forbidden.order = fa.at("order").get<int>();
    state.rng = Rng::deserialize(j.at("rng").get<std::string>());
    state.round = j.at("round").get<int>();
    if (!j.at("pending").is_null()) state.pending = proposal_from_json(j.at("pending"));
    state.history = history_from_json(j.at("history"));
    return state;
  } catch (const StateError&) {
    throw;
  } catch (const std::exception& e) {
    throw StateError(std::string("state file is malformed: ") + e.what());
  }
}

void save_state(const std::string& path, const RunState& state) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw StateError("save_state: cannot write " + tmp);
    out << state_to_json(state);
    if (!out) throw StateError("save_state: write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StateError("save_state: rename to " + path + " failed: " + ec.message());
}

RunState load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StateError("load_state: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return state_from_json(buf.str());
}

namespace {

// Key handling for user config files; the caller normalizes any nlohmann
// exception that escapes (missing key, wrong type) to invalid_argument.
RunConfig run_config_from_file_json(const json& j, const std::filesystem::path& dir) {
  static const std::vector<std::string> known{
      "grid", "names", "factors", "candidates_csv", "n0", "batch", "budget", "mode", "seed",
      "ei_form", "c", "strength", "order", "w0", "p_mut", "retry_factor", "significance_alpha",
      "theta_min", "theta_max", "starts", "nm_max_evals", "p_exponent", "k_max",
      "silhouette_threshold", "kmeans_restarts", "cluster_diagnostics", "initial_design_csv",
      "prior_forbidden_csv"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("config: unknown key '" + key + "'");

  auto resolve = [&dir](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (dir / fp).string();
  };

  // Factor structure.
  std::vector<std::vector<double>> levels;
  std::vector<std::string> names;
  if (j.contains("grid") == j.contains("factors"))
    throw std::invalid_argument("config: give exactly one of 'grid' or 'factors'");
  if (j.contains("grid")) {
    const auto counts = j.at("grid").get<std::vector<int>>();
    for (int c : counts) {
      if (c < 1) throw std::invalid_argument("config: grid entries must be >= 1");
      std::vector<double> lv(static_cast<std::size_t>(c));
      for (int i = 0; i < c; ++i) lv[static_cast<std::size_t>(i)] = i + 1;
      levels.push_back(std::move(lv));
    }
    if (j.contains("names")) names = j.at("names").get<std::vector<std::string>>();
  } else {
    if (j.contains("names"))
      throw std::invalid_argument("config: 'names' belongs inside 'factors' entries");
    for (const auto& f : j.at("factors")) {
      names.push_back(f.at("name").get<std::string>());
      levels.push_back(f.at("levels").get<std::vector<double>>());
    }
  }

  DesignSpace full(levels, names);
  DesignSpace space = full;
  if (j.contains("candidates_csv")) {
    const auto pts = csv::read_points_csv(resolve(j.at("candidates_csv").get<std::string>()), full);
    Eigen::MatrixXd cand(static_cast<Eigen::Index>(pts.size()), full.dims());
    for (std::size_t r = 0; r < pts.size(); ++r) cand.row(static_cast<Eigen::Index>(r)) = pts[r];
    space = DesignSpace(levels, std::move(cand), names);
  }

  RunConfig cfg(std::move(space));
  cfg.n0 = j.at("n0").get<int>();
  cfg.b = j.at("batch").get<int>();
  cfg.budget = j.at("budget").get<std::int64_t>();
  if (j.contains("mode")) cfg.mode = mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("ei_form")) {
    const auto form = j.at("ei_form").get<std::string>();
    if (form != "standard" && form != "as_printed")
      throw std::invalid_argument("config: unknown ei_form '" + form + "'");
    cfg.ei_form = form == "standard" ? EiForm::standard : EiForm::as_printed;
  }
  if (j.contains("c")) cfg.mixing.c = j.at("c").get<double>();
  if (j.contains("strength")) cfg.selc.strength = j.at("strength").get<int>();
  if (j.contains("order")) cfg.selc.order = j.at("order").get<int>();
  if (j.contains("w0")) cfg.selc.w0 = j.at("w0").get<double>();
  if (j.contains("p_mut")) cfg.selc.p_mut = j.at("p_mut").get<double>();
  if (j.contains("retry_factor")) cfg.selc.retry_factor = j.at("retry_factor").get<int>();
  if (j.contains("significance_alpha"))
    cfg.selc.significance_alpha = j.at("significance_alpha").get<double>();
  if (j.contains("theta_min")) cfg.fit.theta_min = j.at("theta_min").get<double>();
  if (j.contains("theta_max")) cfg.fit.theta_max = j.at("theta_max").get<double>();
  if (j.contains("starts")) cfg.fit.starts = j.at("starts").get<int>();
  if (j.contains("nm_max_evals")) cfg.fit.nm_max_evals = j.at("nm_max_evals").get<int>();
  if (j.contains("p_exponent")) cfg.fit.p_exponent = j.at("p_exponent").get<double>();
  if (j.contains("k_max")) cfg.mixing.k_max = j.at("k_max").get<int>();
  if (j.contains("silhouette_threshold"))
    cfg.mixing.silhouette_threshold = j.at("silhouette_threshold").get<double>();
  if (j.contains("kmeans_restarts")) cfg.mixing.kmeans_restarts = j.at("kmeans_restarts").get<int>();
  if (j.contains("cluster_diagnostics"))
    cfg.cluster_diagnostics = j.at("cluster_diagnostics").get<bool>();
  if (j.contains("initial_design_csv"))
    cfg.initial_design = csv::read_points_csv(resolve(j.at("initial_design_csv").get<std::string>()),
                                              cfg.space);
  if (j.contains("prior_forbidden_csv"))
    cfg.prior_forbidden = csv::read_points_csv(resolve(j.at("prior_forbidden_csv").get<std::string>()),
                                               full);
  cfg.validate();
  return cfg;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
  }
  try {
    return run_config_from_file_json(j, std::filesystem::path(path).parent_path());
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
}

StateLock::StateLock(const std::string& state_path) : lock_path_(state_path + ".lock") {
  const int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0)
    throw StateError("another process holds " + lock_path_ +
                     " (remove the file if that process is gone)");
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

StateLock::~StateLock() { ::unlink(lock_path_.c_str()); }

}  // namespace gselc
