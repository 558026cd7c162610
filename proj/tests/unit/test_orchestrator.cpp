#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gselc/bench.hpp"
#include "gselc/design_space.hpp"
#include "gselc/errors.hpp"
#include "gselc/orchestrator.hpp"
#include "gselc/state.hpp"

using gselc::BatchProposal;
using gselc::DesignSpace;
using gselc::Mode;
using gselc::Observation;
using gselc::Origin;
using gselc::Point;
using gselc::Rng;
using gselc::RunConfig;
using gselc::RunState;

namespace {

Point pt(std::initializer_list<double> vals) {
  Point p(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double v : vals) p[i++] = v;
  return p;
}

bool same_point(const Point& a, const Point& b) {
  return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() == 0.0;
}

double smooth_oracle(const Point& x) {
  return -((x[0] - 4.0) * (x[0] - 4.0) + (x[1] - 2.0) * (x[1] - 2.0)) + 0.25 * x[0];
}

std::vector<Observation> answer_pending(const RunState& state,
                                        const std::function<double(const Point&)>& oracle) {
  std::vector<Observation> out;
  for (const auto& p : state.pending->points) out.push_back({p.point, oracle(p.point)});
  return out;
}

}  // namespace

TEST_CASE("seed mixing matches its reference recurrence") {
  CHECK(gselc::mix_seed(11, 1) == 4839782808629744545ULL);
  CHECK(gselc::mix_seed(1, 1000) == 8601875543100917166ULL);
  CHECK(gselc::mix_seed(0, 0) == 16294208416658607535ULL);
  CHECK(gselc::mix_seed(11, 1) != gselc::mix_seed(11, 2));
  CHECK(gselc::mix_seed(11, 1) != gselc::mix_seed(12, 1));
}

TEST_CASE("run start leaves the initial design pending") {
  RunConfig cfg(DesignSpace::grid({6, 6}));
  cfg.n0 = 8;
  cfg.b = 3;
  cfg.budget = 20;
  cfg.seed = 11;
  cfg.prior_forbidden = {pt({3, 3})};

  const RunState state = gselc::init_run(cfg);
  CHECK(state.round == 0);
  CHECK(state.data.empty());
  CHECK(state.history.empty());
  REQUIRE(state.pending.has_value());
  CHECK(state.pending->round == 0);
  CHECK(state.pending->library_size == 36);
  CHECK(std::isnan(state.pending->alpha));
  REQUIRE(state.pending->points.size() == 8);
  for (const auto& p : state.pending->points) {
    CHECK(p.origin == Origin::init);
    CHECK(std::isnan(p.y_hat));
    CHECK(std::isnan(p.ei));
    CHECK(state.config.space.contains(p.point));
  }

  // Priors are installed and the match order resolves to d - 1.
  REQUIRE(state.forbidden.entries.size() == 1);
  CHECK(same_point(state.forbidden.entries[0], pt({3, 3})));
  CHECK(state.forbidden.order == 1);
  CHECK(state.config.selc.order == 1);

  // The design comes from its own derived stream, so it is reproducible from
  // the campaign seed alone.
  Rng design_rng(gselc::mix_seed(11, 1));
  const auto expect = gselc::minimax_design(state.config.space, 8, design_rng);
  REQUIRE(expect.size() == 8);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(same_point(state.pending->points[i].point, expect[i]));
}

TEST_CASE("explicit initial designs are used verbatim") {
  RunConfig cfg(DesignSpace::grid({4, 4}));
  cfg.n0 = 3;
  cfg.budget = 10;
  cfg.initial_design = {pt({1, 1}), pt({2, 4}), pt({4, 2})};
  const RunState state = gselc::init_run(cfg);
  REQUIRE(state.pending->points.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(same_point(state.pending->points[i].point, cfg.initial_design[i]));

  RunConfig wrong = cfg;
  wrong.n0 = 4;  // design size must equal n0
  CHECK_THROWS_AS(gselc::init_run(wrong), std::invalid_argument);
  RunConfig off = cfg;
  off.initial_design[1] = pt({2, 5});
  CHECK_THROWS_AS(gselc::init_run(off), std::invalid_argument);
  RunConfig dup = cfg;
  dup.initial_design[1] = pt({1, 1});
  CHECK_THROWS_AS(gselc::init_run(dup), std::invalid_argument);
}

TEST_CASE("configuration validation rejects bad combinations") {
  const DesignSpace space = DesignSpace::grid({4, 4});
  auto base = [&] {
    RunConfig c(space);
    c.n0 = 4;
    c.budget = 12;
    return c;
  };
  CHECK_NOTHROW(base().validate());

  RunConfig c1 = base();
  c1.budget = 3;  // smaller than the initial design
  CHECK_THROWS_AS(c1.validate(), std::invalid_argument);
  RunConfig c2 = base();
  c2.budget = 17;  // larger than the library
  CHECK_THROWS_AS(c2.validate(), std::invalid_argument);
  RunConfig c3 = base();
  c3.mixing.c = 1.0;
  CHECK_THROWS_AS(c3.validate(), std::invalid_argument);
  RunConfig c4 = base();
  c4.mixing.c = 0.0;
  CHECK_THROWS_AS(c4.validate(), std::invalid_argument);
  RunConfig c5 = base();
  c5.selc.order = 3;  // beyond the dimension count
  CHECK_THROWS_AS(c5.validate(), std::invalid_argument);
  RunConfig c6 = base();
  c6.n0 = 0;
  CHECK_THROWS_AS(c6.validate(), std::invalid_argument);
  RunConfig c7 = base();
  c7.b = 0;
  CHECK_THROWS_AS(c7.validate(), std::invalid_argument);
  RunConfig c8 = base();
  c8.prior_forbidden = {pt({1, 2, 3})};
  CHECK_THROWS_AS(c8.validate(), std::invalid_argument);
}

TEST_CASE("ingest matches results to the pending batch atomically") {
  RunConfig cfg(DesignSpace::grid({4, 4}));
  cfg.n0 = 4;
  cfg.b = 3;
  cfg.budget = 12;
  cfg.initial_design = {pt({1, 1}), pt({2, 3}), pt({3, 2}), pt({4, 4})};
  RunState state = gselc::init_run(cfg);
  const std::string before = gselc::state_to_json(state);

  // Too few results.
  std::vector<Observation> three = {{pt({1, 1}), 1.0}, {pt({2, 3}), 2.0}, {pt({3, 2}), 3.0}};
  CHECK_THROWS_AS(gselc::ingest_results(state, three), std::invalid_argument);
  CHECK(gselc::state_to_json(state) == before);

  // A result for a point that was never proposed.
  std::vector<Observation> alien = {
      {pt({1, 1}), 1.0}, {pt({2, 3}), 2.0}, {pt({3, 2}), 3.0}, {pt({4, 3}), 4.0}};
  CHECK_THROWS_AS(gselc::ingest_results(state, alien), std::invalid_argument);
  CHECK(gselc::state_to_json(state) == before);

  // A non-finite response.
  std::vector<Observation> nan_y = {
      {pt({1, 1}), 1.0}, {pt({2, 3}), 2.0}, {pt({3, 2}), 3.0},
      {pt({4, 4}), std::numeric_limits<double>::infinity()}};
  CHECK_THROWS_AS(gselc::ingest_results(state, nan_y), std::invalid_argument);
  CHECK(gselc::state_to_json(state) == before);

  // Results may arrive in any order; they are applied in pending order.
  std::vector<Observation> reversed = {
      {pt({4, 4}), 4.5}, {pt({3, 2}), 3.5}, {pt({2, 3}), 2.5}, {pt({1, 1}), 1.5}};
  gselc::ingest_results(state, reversed);
  CHECK(state.round == 1);
  CHECK_FALSE(state.pending.has_value());
  REQUIRE(state.data.size() == 4);
  CHECK(same_point(state.data[0].point, pt({1, 1})));
  CHECK(state.data[0].y == 1.5);
  CHECK(same_point(state.data[3].point, pt({4, 4})));
  CHECK(state.data[3].y == 4.5);

  REQUIRE(state.history.size() == 1);
  const auto& row = state.history[0];
  CHECK(row.round == 0);
  CHECK(row.n == 4);
  CHECK(row.f_max == 4.5);
  CHECK(row.n_init == 4);
  CHECK(row.n_ei + row.n_selc + row.n_backfill == 0);
  CHECK(std::isnan(row.alpha));
  CHECK(row.forbidden_count == 1);  // strength 1 absorbed the worst run

  // No batch is pending now.
  CHECK_THROWS_AS(gselc::ingest_results(state, reversed), gselc::StateError);
}

TEST_CASE("campaigns run to their budget and satisfy the run invariants") {
  RunConfig cfg(DesignSpace::grid({5, 5}));
  cfg.n0 = 6;
  cfg.b = 4;
  cfg.budget = 18;
  cfg.seed = 3;
  cfg.selc.order = 2;  // exact-match bans keep the small library open
  const RunState state = gselc::run_to_budget(cfg, smooth_oracle);

  CHECK(state.data.size() == 18);
  CHECK_FALSE(state.pending.has_value());
  CHECK(state.history.size() == static_cast<std::size_t>(state.round));
  CHECK_NOTHROW(gselc::check_run_invariants(state));
  CHECK(state.history.back().f_max == state.data.max_response());

  // Identical seeds replay the identical campaign, different seeds do not.
  const RunState again = gselc::run_to_budget(cfg, smooth_oracle);
  CHECK(gselc::state_to_json(again) == gselc::state_to_json(state));
  RunConfig other = cfg;
  other.seed = 4;
  const RunState different = gselc::run_to_budget(other, smooth_oracle);
  CHECK(gselc::state_to_json(different) != gselc::state_to_json(state));
}

TEST_CASE("pure model mode and pure offspring mode fill whole batches") {
  RunConfig cfg(DesignSpace::grid({5, 5}));
  cfg.n0 = 6;
  cfg.b = 4;
  cfg.budget = 16;
  cfg.seed = 9;
  cfg.selc.order = 2;  // exact-match bans keep the small library open

  cfg.mode = Mode::ei;
  const RunState ei_state = gselc::run_to_budget(cfg, smooth_oracle);
  CHECK_NOTHROW(gselc::check_run_invariants(ei_state));
  for (std::size_t i = 1; i < ei_state.history.size(); ++i) {
    const auto& row = ei_state.history[i];
    CHECK(row.alpha == 1.0);
    CHECK(row.n_selc == 0);
    CHECK(row.n_backfill == 0);
    CHECK(row.n_ei > 0);
  }

  cfg.mode = Mode::selc;
  const RunState selc_state = gselc::run_to_budget(cfg, smooth_oracle);
  CHECK_NOTHROW(gselc::check_run_invariants(selc_state));
  for (std::size_t i = 1; i < selc_state.history.size(); ++i) {
    const auto& row = selc_state.history[i];
    CHECK(row.alpha == 0.0);
    CHECK(row.n_ei == 0);
    CHECK(row.n_selc + row.n_backfill > 0);
  }

  // Both campaigns share the seed-derived initial design.
  for (int i = 0; i < cfg.n0; ++i)
    CHECK(same_point(ei_state.data[i].point, selc_state.data[i].point));
}

TEST_CASE("batch override, budget caps and library exhaustion") {
  RunConfig cfg(DesignSpace::grid({5, 5}));
  cfg.n0 = 6;
  cfg.b = 4;
  cfg.budget = 18;
  cfg.seed = 21;
  cfg.selc.strength = 0;  // keep availability arithmetic exact for this test
  RunState state = gselc::init_run(cfg);
  gselc::ingest_results(state, answer_pending(state, smooth_oracle));

  CHECK_THROWS_AS(gselc::propose_batch(state, -2), std::invalid_argument);

  // One-off override shrinks the round without touching the config.
  const BatchProposal two = gselc::propose_batch(state, 2);
  CHECK(two.points.size() == 2);
  CHECK_FALSE(two.truncated);
  CHECK_THROWS_AS(gselc::propose_batch(state), gselc::StateError);  // already pending
  gselc::ingest_results(state, answer_pending(state, smooth_oracle));

  const BatchProposal four = gselc::propose_batch(state);
  CHECK(four.points.size() == 4);
  gselc::ingest_results(state, answer_pending(state, smooth_oracle));

  // Remaining budget (6) caps an oversized override; that is not library
  // truncation.
  const BatchProposal capped = gselc::propose_batch(state, 10);
  CHECK(capped.points.size() == 6);
  CHECK_FALSE(capped.truncated);
  gselc::ingest_results(state, answer_pending(state, smooth_oracle));
  CHECK(state.data.size() == 18);
  CHECK_THROWS_AS(gselc::propose_batch(state), gselc::StateError);  // budget spent

  // A fresh state with no ingested design cannot propose.
  RunState raw{[&] {
    RunConfig c(DesignSpace::grid({5, 5}));
    c.n0 = 6;
    c.budget = 18;
    return c;
  }()};
  CHECK_THROWS_AS(gselc::propose_batch(raw), gselc::StateError);
}

TEST_CASE("wide prior bans truncate batches and exhaust the library") {
  RunConfig cfg(DesignSpace::grid({4, 4}));
  cfg.n0 = 5;
  cfg.b = 6;
  cfg.budget = 16;
  cfg.selc.strength = 0;  // keep the banned set fixed at the prior
  cfg.selc.order = 1;     // a ban blocks everything sharing a coordinate
  cfg.prior_forbidden = {pt({1, 1})};
  cfg.initial_design = {pt({2, 2}), pt({2, 3}), pt({3, 2}), pt({3, 4}), pt({4, 3})};
  RunState state = gselc::init_run(cfg);
  gselc::ingest_results(state, answer_pending(state, smooth_oracle));

  // Only the 3x3 block away from level 1 is eligible: 9 points, 5 sampled.
  const BatchProposal prop = gselc::propose_batch(state);
  CHECK(prop.points.size() == 4);
  CHECK(prop.truncated);
  for (const auto& p : prop.points) {
    CHECK(p.point[0] != 1.0);
    CHECK(p.point[1] != 1.0);
    CHECK_FALSE(gselc::is_forbidden(state.forbidden, p.point));
  }
  gselc::ingest_results(state, answer_pending(state, smooth_oracle));
  CHECK(state.data.size() == 9);

  // Budget remains but every eligible candidate is spent.
  CHECK_THROWS_AS(gselc::propose_batch(state), gselc::StateError);
}

TEST_CASE("exact-match prior bans are never sampled") {
  RunConfig cfg(DesignSpace::grid({4, 4}));
  cfg.n0 = 5;
  cfg.b = 4;
  cfg.budget = 15;        // everything except the single banned point
  cfg.selc.strength = 0;  // no new bans
  cfg.selc.order = 2;     // full-coordinate match only
  cfg.seed = 14;
  cfg.prior_forbidden = {pt({2, 3})};
  cfg.initial_design = {pt({1, 1}), pt({1, 4}), pt({4, 1}), pt({4, 4}), pt({3, 2})};

  const RunState state = gselc::run_to_budget(cfg, smooth_oracle);
  CHECK(state.data.size() == 15);
  CHECK_FALSE(state.data.contains(pt({2, 3})));
  CHECK_NOTHROW(gselc::check_run_invariants(state));
}

TEST_CASE("cluster diagnostics never disturb the campaign trajectory") {
  RunConfig cfg(DesignSpace::grid({5, 5}));
  cfg.n0 = 6;
  cfg.b = 4;
  cfg.budget = 16;
  cfg.seed = 33;
  cfg.selc.order = 2;  // exact-match bans keep the small library open

  const RunState plain = gselc::run_to_budget(cfg, smooth_oracle);
  cfg.cluster_diagnostics = true;
  const RunState diag = gselc::run_to_budget(cfg, smooth_oracle);

  REQUIRE(plain.data.size() == diag.data.size());
  for (std::size_t i = 0; i < plain.data.size(); ++i) {
    CHECK(same_point(plain.data[i].point, diag.data[i].point));
    CHECK(plain.data[i].y == diag.data[i].y);
  }
  REQUIRE(plain.history.size() == diag.history.size());
  for (std::size_t i = 0; i < plain.history.size(); ++i) {
    if (std::isnan(plain.history[i].alpha))
      CHECK(std::isnan(diag.history[i].alpha));
    else
      CHECK(plain.history[i].alpha == diag.history[i].alpha);
    CHECK(plain.history[i].region_size == diag.history[i].region_size);
    CHECK(plain.history[i].cluster_k == 0);
    if (i >= 1 && diag.history[i].region_size > 0) CHECK(diag.history[i].cluster_k >= 1);
  }
}
