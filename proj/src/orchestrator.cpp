#include "gselc/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace gselc {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void ensure_caches(RunState& state) {
  auto& c = state.caches;
  const auto M = state.config.space.size();
  if (!c.ready) {
    c.candidates = state.config.space.enumerate();
    c.excluded.assign(static_cast<std::size_t>(M), 0);
    c.excluded_count = 0;
    c.data_seen = 0;
    c.forbidden_seen = 0;
    c.ready = true;
  }
  auto mark = [&c](std::int64_t idx) {
    if (!c.excluded[static_cast<std::size_t>(idx)]) {
      c.excluded[static_cast<std::size_t>(idx)] = 1;
      ++c.excluded_count;
    }
  };
  for (; c.data_seen < state.data.size(); ++c.data_seen) {
    const std::int64_t idx = state.config.space.index_of(state.data[c.data_seen].point);
    if (idx < 0) throw StateError("run state holds an observation outside the library");
    mark(idx);
  }
  for (; c.forbidden_seen < state.forbidden.entries.size(); ++c.forbidden_seen) {
    ForbiddenArray one;
    one.strength = state.forbidden.strength;
    one.order = state.forbidden.order;
    one.entries.push_back(state.forbidden.entries[c.forbidden_seen]);
    for (std::int64_t i = 0; i < M; ++i)
      if (!c.excluded[static_cast<std::size_t>(i)] && is_forbidden(one, c.candidates.row(i)))
        mark(i);
  }
}

std::unordered_set<std::int64_t> sampled_indices(const RunState& state) {
  std::unordered_set<std::int64_t> out;
  out.reserve(state.data.size() * 2);
  for (std::size_t i = 0; i < state.data.size(); ++i)
    out.insert(state.config.space.index_of(state.data[i].point));
  return out;
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::gselc: return "gselc";
    case Mode::ei: return "ei";
    case Mode::selc: return "selc";
  }
  throw std::invalid_argument("to_string: unknown mode");
}

std::string to_string(Origin origin) {
  switch (origin) {
    case Origin::init: return "init";
    case Origin::ei: return "ei";
    case Origin::selc: return "selc";
    case Origin::selc_backfill: return "selc_backfill";
  }
  throw std::invalid_argument("to_string: unknown origin");
}

Mode mode_from_string(const std::string& text) {
  if (text == "gselc") return Mode::gselc;
  if (text == "ei") return Mode::ei;
  if (text == "selc") return Mode::selc;
  throw std::invalid_argument("mode_from_string: expected gselc, ei or selc, got '" + text + "'");
}

Origin origin_from_string(const std::string& text) {
  if (text == "init") return Origin::init;
  if (text == "ei") return Origin::ei;
  if (text == "selc") return Origin::selc;
  if (text == "selc_backfill") return Origin::selc_backfill;
  throw std::invalid_argument("origin_from_string: unknown origin '" + text + "'");
}

void RunConfig::validate() const {
  const auto M = space.size();
  if (n0 < 1) throw std::invalid_argument("RunConfig: n0 must be >= 1");
  if (b < 1) throw std::invalid_argument("RunConfig: batch size must be >= 1");
  if (budget < n0) throw std::invalid_argument("RunConfig: budget must cover the initial design");
  if (budget > M) throw std::invalid_argument("RunConfig: budget exceeds the library size");
  if (!(mixing.c > 0.0 && mixing.c < 1.0))
    throw std::invalid_argument("RunConfig: region threshold c must lie in (0, 1)");
  if (selc.strength < 0) throw std::invalid_argument("RunConfig: strength must be >= 0");
  if (selc.order < 0 || selc.order > space.dims())
    throw std::invalid_argument("RunConfig: order must lie in [0, d]");
  if (!(selc.w0 >= 0.0 && selc.w0 <= 1.0))
    throw std::invalid_argument("RunConfig: w0 must lie in [0, 1]");
  if (selc.retry_factor < 1) throw std::invalid_argument("RunConfig: retry factor must be >= 1");
  if (!initial_design.empty()) {
    if (static_cast<int>(initial_design.size()) != n0)
      throw std::invalid_argument("RunConfig: explicit initial design must have n0 points");
    std::unordered_set<std::int64_t> seen;
    for (const auto& p : initial_design) {
      const auto idx = space.index_of(p);
      if (idx < 0) throw std::invalid_argument("RunConfig: initial design point outside the library");
      if (!seen.insert(idx).second)
        throw std::invalid_argument("RunConfig: duplicate initial design point");
    }
  }
  for (const auto& p : prior_forbidden)
    if (p.size() != space.dims())
      throw std::invalid_argument("RunConfig: prior forbidden entry has wrong dimension");
}

RunState init_run(RunConfig config) {
  config.validate();
  if (config.selc.order == 0) config.selc.order = std::max(1, config.space.dims() - 1);

  RunState state(std::move(config));
  state.rng = Rng(state.config.seed);
  state.forbidden.strength = state.config.selc.strength;
  state.forbidden.order = state.config.selc.order;
  state.forbidden.entries = state.config.prior_forbidden;

  std::vector<Point> design = state.config.initial_design;
  if (design.empty()) {
    // The design draws from its own stream so campaigns that share a seed
    // share the design regardless of mode or later settings.
    Rng design_rng(mix_seed(state.config.seed, 1));
    design = minimax_design(state.config.space, state.config.n0, design_rng);
  }

  BatchProposal init;
  init.round = 0;
  init.library_size = state.config.space.size();
  for (auto& p : design) init.points.push_back({std::move(p), Origin::init, kNaN, kNaN, kNaN});
  state.pending = std::move(init);
  return state;
}

BatchProposal propose_batch(RunState& state, int b_override) {
  if (state.pending) throw StateError("propose_batch: a batch is already pending ingest");
  if (b_override < 0) throw std::invalid_argument("propose_batch: batch override must be positive");
  const auto& cfg = state.config;
  const int b_want = b_override > 0 ? b_override : cfg.b;
  const auto n = static_cast<std::int64_t>(state.data.size());
  if (n >= cfg.budget) throw StateError("propose_batch: evaluation budget is spent");
  if (n == 0) throw StateError("propose_batch: initial design was never ingested");
  ensure_caches(state);
  const auto& caches = state.caches;
  const std::int64_t M = cfg.space.size();

  const std::int64_t available = M - caches.excluded_count;
  if (available <= 0)
    throw StateError("propose_batch: no unsampled, non-forbidden candidate remains");
  const int b_eff = static_cast<int>(std::min<std::int64_t>(
      {static_cast<std::int64_t>(b_want), cfg.budget - n, available}));

  BatchProposal prop;
  prop.round = state.round;
  prop.library_size = M;
  prop.truncated = b_eff < b_want && (cfg.budget - n) >= b_want;

  const double f_max = state.data.max_response();
  const bool want_fit = cfg.mode != Mode::selc;
  const bool constant_data = state.data.max_response() == state.data.min_response();

  GpFit fit;
  Eigen::VectorXd y_hat, mse, ei_scores;
  bool have_fit = false;
  if (want_fit) {
    if (n < 2 || constant_data)
      fit = make_constant_fit(state.data);
    else
      fit = fit_gp(state.data, cfg.fit, state.rng);
    have_fit = true;
    prop.fit_degenerate = fit.degenerate;
    prop.fit_nugget = fit.degenerate ? kNaN : fit.nugget;
    predict_batch(fit, caches.candidates, y_hat, mse);
    ei_scores.resize(M);
    for (std::int64_t i = 0; i < M; ++i)
      ei_scores[i] = expected_improvement(y_hat[i], mse[i], f_max, cfg.ei_form);
  }

  int m_ei = 0;
  switch (cfg.mode) {
    case Mode::ei:
      prop.alpha = 1.0;
      m_ei = b_eff;
      break;
    case Mode::selc:
      prop.alpha = 0.0;
      m_ei = 0;
      break;
    case Mode::gselc: {
      if (fit.degenerate) {
        prop.alpha = 0.0;
        prop.region_size = 0;
        m_ei = 0;
      } else {
        const auto members =
            region_s_from_predictions(y_hat, response_shift(fit.train_y), cfg.mixing.c, f_max);
        prop.region_size = static_cast<std::int64_t>(members.size());
        prop.alpha = mixing_alpha(prop.region_size, M);
        m_ei = ei_batch_count(prop.region_size, M, b_eff);
        if (cfg.cluster_diagnostics && !members.empty()) {
          Eigen::MatrixXd pts(static_cast<Eigen::Index>(members.size()), cfg.space.dims());
          for (std::size_t i = 0; i < members.size(); ++i)
            pts.row(static_cast<Eigen::Index>(i)) = caches.candidates.row(members[i]);
          // Separate stream: the diagnostic must not disturb the campaign.
          Rng cluster_rng(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(state.round)));
          prop.cluster_k = cluster_count(pts, cfg.mixing, cluster_rng).k;
        }
      }
      break;
    }
  }

  std::vector<char> taken = caches.excluded;  // grows with this batch's picks
  auto take = [&](std::int64_t idx) { taken[static_cast<std::size_t>(idx)] = 1; };

  if (m_ei > 0) {
    const auto picks = top_scoring_indices(ei_scores, taken, m_ei);
    for (const auto idx : picks) {
      prop.points.push_back(
          {caches.candidates.row(idx), Origin::ei, y_hat[idx], mse[idx], ei_scores[idx]});
      take(idx);
    }
    prop.ei_count = m_ei;
  }

  const int m_selc = b_eff - m_ei;
  if (m_selc > 0) {
    auto exclude = sampled_indices(state);
    for (int i = 0; i < prop.ei_count; ++i)
      exclude.insert(cfg.space.index_of(prop.points[static_cast<std::size_t>(i)].point));

    const auto weights = mutation_weights(state.data, cfg.space, cfg.selc);
    const auto batch =
        propose_selc_batch(state.data, state.forbidden, weights, cfg.space, m_selc, exclude,
                           cfg.selc, state.rng);
    for (const auto& p : batch.points) {
      const auto idx = cfg.space.index_of(p);
      ProposalPoint pp{p, Origin::selc, kNaN, kNaN, kNaN};
      if (have_fit && !fit.degenerate) {
        pp.y_hat = y_hat[idx];
        pp.s2 = mse[idx];
        pp.ei = ei_scores[idx];
      }
      prop.points.push_back(std::move(pp));
      take(idx);
    }
    prop.selc_count = static_cast<int>(batch.points.size());

    if (batch.shortfall > 0) {
      // Backfill from the EI ranking when one exists, otherwise from the
      // library in enumeration order.
      std::int64_t eligible = 0;
      for (std::int64_t i = 0; i < M; ++i)
        if (!taken[static_cast<std::size_t>(i)]) ++eligible;
      const int fill = static_cast<int>(
          std::min<std::int64_t>(static_cast<std::int64_t>(batch.shortfall), eligible));
      if (fill < batch.shortfall) prop.truncated = true;
      if (fill > 0) {
        std::vector<std::int64_t> picks;
        if (have_fit && !fit.degenerate) {
          picks = top_scoring_indices(ei_scores, taken, fill);
        } else {
          for (std::int64_t i = 0; i < M && static_cast<int>(picks.size()) < fill; ++i)
            if (!taken[static_cast<std::size_t>(i)]) picks.push_back(i);
        }
        for (const auto idx : picks) {
          ProposalPoint pp{caches.candidates.row(idx), Origin::selc_backfill, kNaN, kNaN, kNaN};
          if (have_fit && !fit.degenerate) {
            pp.y_hat = y_hat[idx];
            pp.s2 = mse[idx];
            pp.ei = ei_scores[idx];
          }
          prop.points.push_back(std::move(pp));
          take(idx);
        }
        prop.backfill_count = fill;
      }
    }
  }

  state.pending = prop;
  return prop;
}

void ingest_results(RunState& state, const std::vector<Observation>& results) {
  if (!state.pending) throw StateError("ingest_results: no batch is pending");
  const auto& pending = *state.pending;
  if (results.size() != pending.points.size())
    throw std::invalid_argument("ingest_results: expected " + std::to_string(pending.points.size()) +
                                " results, got " + std::to_string(results.size()));

  // Match each result to a pending point; order-insensitive, one-to-one.
  std::vector<double> ys(pending.points.size(), 0.0);
  std::vector<char> used(results.size(), 0);
  for (std::size_t i = 0; i < pending.points.size(); ++i) {
    bool found = false;
    for (std::size_t r = 0; r < results.size(); ++r) {
      if (used[r] || results[r].point != pending.points[i].point) continue;
      if (!std::isfinite(results[r].y))
        throw std::invalid_argument("ingest_results: non-finite response");
      ys[i] = results[r].y;
      used[r] = 1;
      found = true;
      break;
    }
    if (!found)
      throw std::invalid_argument("ingest_results: missing result for a pending point (row " +
                                  std::to_string(i) + ")");
  }
  for (std::size_t i = 0; i < pending.points.size(); ++i)
    if (state.data.contains(pending.points[i].point))
      throw StateError("ingest_results: pending point already observed");

  // All checks passed; apply in pending order.
  std::vector<Observation> batch;
  batch.reserve(pending.points.size());
  for (std::size_t i = 0; i < pending.points.size(); ++i) {
    state.data.add(pending.points[i].point, ys[i]);
    batch.push_back({pending.points[i].point, ys[i]});
  }
  state.forbidden = update_forbidden(state.forbidden, batch);

  HistoryRow row;
  row.round = pending.round;
  row.n = static_cast<std::int64_t>(state.data.size());
  row.f_max = state.data.max_response();
  row.alpha = pending.alpha;
  row.region_size = pending.region_size;
  row.cluster_k = pending.cluster_k;
  row.forbidden_count = static_cast<std::int64_t>(state.forbidden.entries.size());
  for (const auto& p : pending.points) {
    switch (p.origin) {
      case Origin::init: ++row.n_init; break;
      case Origin::ei: ++row.n_ei; break;
      case Origin::selc: ++row.n_selc; break;
      case Origin::selc_backfill: ++row.n_backfill; break;
    }
  }
  state.history.push_back(row);
  state.round += 1;
  state.pending.reset();
  if (state.caches.ready) ensure_caches(state);  // fold the new points and entries in
}

RunState run_to_budget(RunConfig config, const std::function<double(const Point&)>& oracle) {
  if (!oracle) throw std::invalid_argument("run_to_budget: oracle is required");
  RunState state = init_run(std::move(config));
  while (state.pending || static_cast<std::int64_t>(state.data.size()) < state.config.budget) {
    if (!state.pending) propose_batch(state);
    std::vector<Observation> results;
    results.reserve(state.pending->points.size());
    for (const auto& p : state.pending->points) results.push_back({p.point, oracle(p.point)});
    ingest_results(state, results);
  }
  return state;
}

}  // namespace gselc
