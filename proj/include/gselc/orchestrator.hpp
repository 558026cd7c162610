#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gselc/design_space.hpp"
#include "gselc/ei.hpp"
#include "gselc/errors.hpp"
#include "gselc/gp.hpp"
#include "gselc/mixing.hpp"
#include "gselc/rng.hpp"
#include "gselc/selc.hpp"

namespace gselc {

enum class Mode { gselc, ei, selc };
enum class Origin { init, ei, selc, selc_backfill };

std::string to_string(Mode mode);
std::string to_string(Origin origin);
Mode mode_from_string(const std::string& text);
Origin origin_from_string(const std::string& text);

struct RunConfig {
  DesignSpace space;
  int n0 = 10;
  int b = 6;
  std::int64_t budget = 0;  // total evaluations including the initial design
  Mode mode = Mode::gselc;
  std::uint64_t seed = 1;
  EiForm ei_form = EiForm::standard;
  FitSettings fit;
  SelcSettings selc;
  MixingSettings mixing;
  bool cluster_diagnostics = false;       // region clustering uses its own stream
  std::vector<Point> prior_forbidden;     // entries known before any run
  std::vector<Point> initial_design;      // empty -> space-filling design

  explicit RunConfig(DesignSpace s) : space(std::move(s)) {}
  void validate() const;  // throws std::invalid_argument on bad combinations
};

struct ProposalPoint {
  Point point;
  Origin origin = Origin::init;
  double y_hat = std::numeric_limits<double>::quiet_NaN();
  double s2 = std::numeric_limits<double>::quiet_NaN();
  double ei = std::numeric_limits<double>::quiet_NaN();
};

struct BatchProposal {
  int round = 0;  // 0 is the initial design
  std::vector<ProposalPoint> points;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::int64_t region_size = -1;
  std::int64_t library_size = 0;
  int cluster_k = 0;
  int ei_count = 0;
  int selc_count = 0;
  int backfill_count = 0;
  bool truncated = false;  // library exhaustion shrank the batch
  bool fit_degenerate = false;
  double fit_nugget = std::numeric_limits<double>::quiet_NaN();
};

struct HistoryRow {
  int round = 0;
  std::int64_t n = 0;  // observations after the round's ingest
  double f_max = 0.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::int64_t region_size = -1;
  int cluster_k = 0;
  int n_init = 0;
  int n_ei = 0;
  int n_selc = 0;
  int n_backfill = 0;
  std::int64_t forbidden_count = 0;  // entries after the round's update
};

struct RunState {
  RunConfig config;
  Dataset data;
  ForbiddenArray forbidden;
  Rng rng{1};
  int round = 0;  // completed ingests
  std::optional<BatchProposal> pending;
  std::vector<HistoryRow> history;

  // Derived lookups, rebuilt on demand after deserialization.
  struct Caches {
    bool ready = false;
    Eigen::MatrixXd candidates;
    std::vector<char> excluded;  // sampled or forbidden
    std::int64_t excluded_count = 0;
    std::size_t data_seen = 0;
    std::size_t forbidden_seen = 0;
  };
  Caches caches;

  explicit RunState(RunConfig cfg) : config(std::move(cfg)) {}
};

// Starts a campaign: resolves defaults, installs prior forbidden entries and
// leaves the initial design pending (results to be ingested like any batch).
// Derives independent named sub-streams from one campaign seed (salt 1 feeds
// the initial design; salts 1000+round feed the optional cluster diagnostic,
// keeping it off the campaign's own stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

RunState init_run(RunConfig config);

// Proposes the next batch (EI share plus SELC share in gselc mode) and
// records it as pending. Throws StateError when a batch is already pending,
// the budget is spent, or no eligible candidate remains. A positive
// b_override replaces the configured batch size for this one round.
BatchProposal propose_batch(RunState& state, int b_override = 0);

// Ingests responses for the pending batch. Results may arrive in any order
// but must match the pending points one-to-one; on any validation failure the
// state is left untouched.
void ingest_results(RunState& state, const std::vector<Observation>& results);

// Drives a full campaign against an oracle.
RunState run_to_budget(RunConfig config, const std::function<double(const Point&)>& oracle);

}  // namespace gselc
