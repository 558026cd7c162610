// End-to-end acceptance checks. Each numbered criterion prints one
// [PASS]/[FAIL] line; the process exit code is the number of failures.
//
// Usage:
//   acceptance --cli <path-to-cli-binary> --fixtures <fixture-dir>
//              [--criteria 1,2,5]
//
// Criteria 3-5 run full benchmark campaigns (hundreds of seeded runs) and
// dominate the runtime; everything else finishes in seconds.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gselc/bench.hpp"
#include "gselc/csv.hpp"
#include "gselc/design_space.hpp"
#include "gselc/ei.hpp"
#include "gselc/errors.hpp"
#include "gselc/gp.hpp"
#include "gselc/mixing.hpp"
#include "gselc/orchestrator.hpp"
#include "gselc/rng.hpp"
#include "gselc/selc.hpp"
#include "gselc/state.hpp"

using namespace gselc;

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Small utilities

Point pt(std::initializer_list<double> vals) {
  Point p(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double v : vals) p[i++] = v;
  return p;
}

std::string fmt(double v) { return csv::format_double(v); }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gselc_acceptance_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

// Runs a shell command, returns its exit code (-1: could not run).
int run_cmd(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -2;
}

// Collects check failures with a readable trail.
struct Checker {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
  std::string failures() const {
    std::string out;
    for (std::size_t i = 0; i < notes.size(); ++i) out += (i ? "; " : "") + notes[i];
    return out;
  }
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Shared benchmark context: criteria 3 and 4 reuse the same cells, and every
// report is computed at most once per process.

const BenchCell& cell(const BenchReport& report, int run_size, int batch, Mode method) {
  for (const auto& c : report.cells)
    if (c.run_size == run_size && c.batch == batch && c.method == method) return c;
  throw std::logic_error("benchmark report is missing a requested cell");
}

struct Context {
  std::string cli;
  std::string fixtures;

  const BenchReport& levy_main() {
    return memo(levy_main_, "levy4 N=150 b=6, ei/selc/gselc x 100 reps", [] {
      return run_benchmark(levy4_function(),
                           settings({150}, {6}, {Mode::ei, Mode::selc, Mode::gselc}, 100));
    });
  }
  const BenchReport& levy_g_grid() {
    return memo(levy_g_grid_, "levy4 N=150,300 b=4,10, gselc x 100 reps", [] {
      return run_benchmark(levy4_function(), settings({150, 300}, {4, 10}, {Mode::gselc}, 100));
    });
  }
  const BenchReport& levy_g_300b6() {
    return memo(levy_g_300b6_, "levy4 N=300 b=6, gselc x 100 reps", [] {
      return run_benchmark(levy4_function(), settings({300}, {6}, {Mode::gselc}, 100));
    });
  }
  const BenchReport& levy_e_grid() {
    return memo(levy_e_grid_, "levy4 N=150 b=4,10, ei x 100 reps", [] {
      return run_benchmark(levy4_function(), settings({150}, {4, 10}, {Mode::ei}, 100));
    });
  }
  const BenchReport& paviani() {
    return memo(paviani_, "paviani5 N=200 b=10, ei/selc/gselc x 100 reps", [] {
      BenchSettings s = settings({200}, {10}, {Mode::ei, Mode::selc, Mode::gselc}, 100);
      s.n0 = 0;             // default: 10 x factors = 50
      s.forbidden_order = 3;
      return run_benchmark(paviani5_function(), s);
    });
  }

 private:
  static BenchSettings settings(std::vector<int> run_sizes, std::vector<int> batches,
                                std::vector<Mode> methods, int reps) {
    BenchSettings s;
    s.run_sizes = std::move(run_sizes);
    s.batches = std::move(batches);
    s.methods = std::move(methods);
    s.reps = reps;
    // The harness default base seed; shared across calls so replications stay
    // paired between methods and cells.
    s.base_seed = 1;
    s.n0 = 40;
    return s;
  }

  template <class F>
  const BenchReport& memo(std::optional<BenchReport>& slot, const char* label, F&& compute) {
    if (!slot) {
      std::cout << "  [running " << label << " ...]" << std::endl;
      slot = compute();
      std::cout << benchmark_table(*slot) << std::flush;
    }
    return *slot;
  }

  std::optional<BenchReport> levy_main_;
  std::optional<BenchReport> levy_g_grid_;
  std::optional<BenchReport> levy_g_300b6_;
  std::optional<BenchReport> levy_e_grid_;
  std::optional<BenchReport> paviani_;
};

// ---------------------------------------------------------------------------
// Criterion 1: the hand-worked example. Two weak runs induce exactly six
// banned pairwise patterns; the weighted-mutation probability for the best
// level reproduces its closed-form value; the region share alpha = 157/1600
// turns a 16-point batch into 2 model picks.

Outcome criterion1() {
  Checker ck;

  // Nine runs on a 3x3x3 grid; the two lowest responses sit at (3,1,3) and
  // (1,1,1).
  const double runs[9][4] = {{1, 1, 1, 10.1}, {1, 2, 2, 53.6}, {1, 3, 3, 43.8},
                             {2, 1, 2, 13.4}, {2, 2, 3, 46.9}, {2, 3, 1, 55.1},
                             {3, 1, 3, 5.7},  {3, 2, 1, 43.6}, {3, 3, 2, 47.0}};
  std::vector<Observation> batch;
  for (const auto& r : runs) batch.push_back({pt({r[0], r[1], r[2]}), r[3]});

  ForbiddenArray fa;
  fa.strength = 2;
  fa.order = 2;
  fa = update_forbidden(fa, batch);

  ck.require(fa.entries.size() == 2, "expected two banned runs");
  ck.require(fa.entries.size() == 2 && (fa.entries[0] - pt({3, 1, 3})).cwiseAbs().maxCoeff() == 0.0,
             "worst run (3,1,3) must be banned first");
  ck.require(fa.entries.size() == 2 && (fa.entries[1] - pt({1, 1, 1})).cwiseAbs().maxCoeff() == 0.0,
             "second-worst run (1,1,1) must be banned next");

  // The six pairwise patterns spelled out: for each banned run, fixing any
  // two of its three coordinates bans every completion of the third.
  const DesignSpace g3 = DesignSpace::grid({3, 3, 3});
  const std::vector<Point> entries = {pt({3, 1, 3}), pt({1, 1, 1})};
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  std::int64_t banned = 0;
  bool pointwise = true;
  for (std::int64_t i = 0; i < g3.size(); ++i) {
    const Point x = g3.candidate(i);
    bool expect = false;
    for (const auto& e : entries)
      for (const auto& pr : pairs)
        expect = expect || (x[pr[0]] == e[pr[0]] && x[pr[1]] == e[pr[1]]);
    if (expect) ++banned;
    pointwise = pointwise && (is_forbidden(fa, x) == expect);
  }
  ck.require(pointwise, "banned set must equal the union of the six patterns");
  ck.require(banned == 12, "six patterns must cover 12 of the 27 candidates, saw " +
                               std::to_string(banned));

  // Weighted mutation: a four-level factor whose level means are exactly
  // {0.8, 0.36, -1.0, 0.0} (three observations per level, zero-sum jitter)
  // gives the best level probability w0/4 + (1-w0) * 0.8/1.16 at w0 = 0.25.
  const DesignSpace g43 = DesignSpace::grid({4, 3});
  const double mu[4] = {0.8, 0.36, -1.0, 0.0};
  const double jitter[4][3] = {{1, -1, 0}, {0, 1, -1}, {-1, 0, 1}, {0, 0, 0}};
  Dataset data;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 3; ++b)
      data.add(pt({double(a + 1), double(b + 1)}), mu[a] + 0.001 * jitter[a][b]);

  SelcSettings ss;
  ss.w0 = 0.25;
  const MutationWeights w = mutation_weights(data, g43, ss);
  const double expected = 0.25 * (1.0 / 4.0) + (0.8 / 1.16) * (3.0 / 4.0);
  ck.require(!w.boosted.empty() && w.boosted[0] != 0,
             "the informative factor must get a response-weighted marginal");
  const double got = w.marginal.at(0)[0];
  ck.require(std::abs(got - expected) <= 1e-6,
             "best-level mutation probability " + fmt(got) + " != " + fmt(expected));

  // Region share to batch split: |S| = 157 of M = 1600 gives alpha = 0.098125
  // and 2 model-driven picks in a batch of 16.
  const double alpha = mixing_alpha(157, 1600);
  ck.require(std::abs(alpha - 0.098125) <= 1e-15, "alpha 157/1600 misevaluated: " + fmt(alpha));
  ck.require(ei_batch_count(157, 1600, 16) == 2, "ceil(alpha*16) must be 2");
  ck.require(ei_batch_count(alpha, 16) == 2, "ceil(alpha*16) must be 2 via the real-valued form");

  if (!ck.pass) return {false, ck.failures()};
  return {true, "six banned patterns (12/27 candidates), best-level mutation p=" + fmt(got) +
                    ", alpha=0.098125 -> 2 of 16 model picks"};
}

// ---------------------------------------------------------------------------
// Criterion 2: surrogate and acquisition properties. Interpolation at the
// data, nonnegative predictive variance, nonnegative acquisition vanishing at
// sampled points, agreement with a dense-inverse reference on 50 random
// problems, translation behavior, and stencil local-optimality of the fitted
// length-scales.

// Reference quantities computed with a plain dense inverse.
struct DenseRef {
  double mu = 0.0;
  double sigma2 = 0.0;
  double loglik = 0.0;
  Eigen::MatrixXd rinv;
  Eigen::VectorXd resid;
  Eigen::VectorXd ones;

  DenseRef(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& theta) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd R(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < X.cols(); ++k) {
          const double d = X(i, k) - X(j, k);
          s += theta[k] * d * d;
        }
        R(i, j) = std::exp(-s);
      }
    rinv = R.inverse();
    ones = Eigen::VectorXd::Ones(n);
    const double oq = ones.dot(rinv * ones);
    mu = ones.dot(rinv * y) / oq;
    resid = y - mu * ones;
    sigma2 = resid.dot(rinv * resid) / static_cast<double>(n);
    loglik = -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI * sigma2) +
                     std::log(R.determinant()) + static_cast<double>(n));
  }

  Eigen::VectorXd cross(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta,
                        const Point& x) const {
    Eigen::VectorXd r(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < X.cols(); ++k) {
        const double d = x[k] - X(i, k);
        s += theta[k] * d * d;
      }
      r[i] = std::exp(-s);
    }
    return r;
  }

  double predict(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta, const Point& x) const {
    return mu + cross(X, theta, x).dot(rinv * resid);
  }

  double mse(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta, const Point& x) const {
    const Eigen::VectorXd r = cross(X, theta, x);
    const double q = r.dot(rinv * r);
    const double h = 1.0 - ones.dot(rinv * r);
    const double oq = ones.dot(rinv * ones);
    return std::max(0.0, sigma2 * (1.0 - q + h * h / oq));
  }
};

Outcome criterion2() {
  Checker ck;
  const FitSettings fit_settings;

  // (a) interpolation, variance sign, and acquisition behavior on a smooth
  // two-factor surface observed at 12 of 36 grid points.
  {
    const DesignSpace space = DesignSpace::grid({6, 6});
    Rng rng(71);
    Dataset data;
    for (auto idx : rng.sample_indices(space.size(), 12)) {
      const Point x = space.candidate(idx);
      data.add(x, std::sin(0.9 * x[0]) + 0.3 * x[1]);
    }
    Rng fit_rng(172);
    const GpFit fit = fit_gp(data, fit_settings, fit_rng);
    ck.require(!fit.degenerate, "fit must not be degenerate");

    bool interpolates = true;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double y_hat = predict(fit, data[i].point);
      interpolates = interpolates &&
                     std::abs(y_hat - data[i].y) <= 1e-6 * (1.0 + std::abs(data[i].y));
    }
    ck.require(interpolates, "predictions must reproduce the observations");

    const double f_max = data.max_response();
    bool mse_ok = true, ei_ok = true, ei_zero = true;
    for (std::int64_t i = 0; i < space.size(); ++i) {
      const Point x = space.candidate(i);
      const double s2 = predict_mse(fit, x);
      const double ei = expected_improvement(predict(fit, x), s2, f_max, EiForm::standard);
      mse_ok = mse_ok && s2 >= 0.0 && std::isfinite(s2);
      ei_ok = ei_ok && ei >= 0.0 && std::isfinite(ei);
      if (data.contains(x)) ei_zero = ei_zero && ei <= 1e-8 * (1.0 + std::abs(f_max));
    }
    ck.require(mse_ok, "predictive variance must be finite and nonnegative");
    ck.require(ei_ok, "acquisition must be finite and nonnegative");
    ck.require(ei_zero, "acquisition must vanish at sampled points");

    // (e) stencil local-optimality of the fitted length-scales.
    const Eigen::VectorXd theta = fit.params.theta;
    bool stencil = true;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      for (double factor : {1.1, 0.9}) {
        Eigen::VectorXd probe = theta;
        probe[k] *= factor;
        const double ll = profile_log_likelihood(fit.train_x, fit.train_y, probe, fit_settings);
        stencil = stencil && ll <= fit.log_likelihood + 1e-9 * (1.0 + std::abs(fit.log_likelihood));
      }
    }
    ck.require(stencil, "fitted length-scales must be stencil-locally optimal");
  }

  // (c) dense-inverse agreement on 50 random 10-point problems.
  {
    Rng rng(20260817);
    int checked = 0;
    bool agree = true;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-8 * (1.0 + std::abs(b)); };
    for (int rep = 0; rep < 50; ++rep) {
      const Eigen::Index n = 10, d = 2;
      Eigen::MatrixXd X(n, d);
      Eigen::VectorXd y(n);
      Dataset data;
      for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = rng.next_in(0.0, 7.0);
        X(i, 1) = rng.next_in(0.0, 7.0);
        y[i] = rng.next_in(-2.0, 2.0);
        data.add(Point(X.row(i)), y[i]);
      }
      Eigen::VectorXd theta(d);
      for (Eigen::Index k = 0; k < d; ++k)
        theta[k] = std::exp(rng.next_in(std::log(0.05), std::log(2.0)));

      const GpFit fit = fit_gp_at(data, theta, fit_settings);
      if (fit.nugget != 0.0) continue;  // the reference has no jitter term
      const DenseRef ref(X, y, theta);
      agree = agree && close(fit.mu_hat, ref.mu) && close(fit.sigma2_hat, ref.sigma2) &&
              close(fit.log_likelihood, ref.loglik);
      for (int t = 0; t < 5; ++t) {
        const Point x = pt({rng.next_in(0.0, 7.0), rng.next_in(0.0, 7.0)});
        agree = agree && close(predict(fit, x), ref.predict(X, theta, x)) &&
                close(predict_mse(fit, x), ref.mse(X, theta, x));
      }
      ++checked;
    }
    ck.require(agree, "solver must agree with the dense-inverse reference at 1e-8");
    ck.require(checked >= 45, "nearly all random problems must factorize without jitter, got " +
                                  std::to_string(checked));
  }

  // (d) translation behavior: shifting every response by a constant shifts the
  // mean and predictions and leaves spread, variance, and acquisition alone.
  {
    const DesignSpace space = DesignSpace::grid({7, 5});
    Rng rng(515);
    Dataset data, shifted;
    const double delta = 25.0;
    for (auto idx : rng.sample_indices(space.size(), 11)) {
      const Point x = space.candidate(idx);
      const double y = std::cos(0.7 * x[0]) - 0.2 * x[1];
      data.add(x, y);
      shifted.add(x, y + delta);
    }
    Rng r1(626), r2(626);
    const GpFit base = fit_gp(data, fit_settings, r1);
    const GpFit moved = fit_gp(shifted, fit_settings, r2);
    auto close10 = [](double a, double b) { return std::abs(a - b) <= 1e-10 * (1.0 + std::abs(b)); };
    ck.require((base.params.theta - moved.params.theta).cwiseAbs().maxCoeff() == 0.0,
               "length-scale search must be translation-invariant");
    ck.require(close10(moved.mu_hat, base.mu_hat + delta), "mean must shift with the data");
    ck.require(close10(moved.sigma2_hat, base.sigma2_hat), "variance must not shift");
    bool preds = true;
    const double f_max = data.max_response();
    for (std::int64_t i = 0; i < space.size(); ++i) {
      const Point x = space.candidate(i);
      preds = preds && close10(predict(moved, x), predict(base, x) + delta) &&
              close10(predict_mse(moved, x), predict_mse(base, x)) &&
              close10(expected_improvement(predict(moved, x), predict_mse(moved, x), f_max + delta,
                                           EiForm::standard),
                      expected_improvement(predict(base, x), predict_mse(base, x), f_max,
                                           EiForm::standard));
    }
    ck.require(preds, "predictions and acquisition must translate with the data");
  }

  if (!ck.pass) return {false, ck.failures()};
  return {true,
          "interpolation, variance sign, acquisition sign/zeroing, 50-problem dense-reference "
          "agreement at 1e-8, translation behavior, stencil optimality"};
}

// ---------------------------------------------------------------------------
// Criteria 3-5: benchmark statistics.

Outcome criterion3(Context& ctx) {
  const BenchReport& rep = ctx.levy_main();
  const BenchCell& g = cell(rep, 150, 6, Mode::gselc);
  const BenchCell& s = cell(rep, 150, 6, Mode::selc);
  const BenchCell& e = cell(rep, 150, 6, Mode::ei);

  Checker ck;
  ck.require(g.total() >= s.total() && s.total() >= e.total(),
             "expected Total ordering gselc >= selc >= ei, saw " + fmt(g.total()) + " / " +
                 fmt(s.total()) + " / " + fmt(e.total()));
  ck.require(g.total() >= 79.8 && g.total() <= 99.8,
             "gselc Total " + fmt(g.total()) + " outside [79.8, 99.8]");
  ck.require(std::abs(s.r(1) - 23.4) <= 10.0,
             "selc best-rank share " + fmt(s.r(1)) + " outside 23.4 +/- 10");
  ck.require(std::abs(e.r(1) - 19.6) <= 10.0,
             "ei best-rank share " + fmt(e.r(1)) + " outside 19.6 +/- 10");

  const std::string seen = "Totals g/s/e = " + fmt(g.total()) + "/" + fmt(s.total()) + "/" +
                           fmt(e.total()) + "; best-rank% s=" + fmt(s.r(1)) +
                           ", e=" + fmt(e.r(1));
  if (!ck.pass) return {false, ck.failures() + " [" + seen + "]"};
  return {true, seen};
}

Outcome criterion4(Context& ctx) {
  const BenchReport& main_rep = ctx.levy_main();
  const BenchReport& g_grid = ctx.levy_g_grid();
  const BenchReport& g_300b6 = ctx.levy_g_300b6();
  const BenchReport& e_grid = ctx.levy_e_grid();

  const double g150[3] = {cell(g_grid, 150, 4, Mode::gselc).total(),
                          cell(main_rep, 150, 6, Mode::gselc).total(),
                          cell(g_grid, 150, 10, Mode::gselc).total()};
  const double g300[3] = {cell(g_grid, 300, 4, Mode::gselc).total(),
                          cell(g_300b6, 300, 6, Mode::gselc).total(),
                          cell(g_grid, 300, 10, Mode::gselc).total()};
  const double e150[3] = {cell(e_grid, 150, 4, Mode::ei).total(),
                          cell(main_rep, 150, 6, Mode::ei).total(),
                          cell(e_grid, 150, 10, Mode::ei).total()};

  Checker ck;
  const int batches[3] = {4, 6, 10};
  for (int i = 0; i < 3; ++i)
    ck.require(g300[i] > g150[i], "gselc Total must grow with the budget at b=" +
                                      std::to_string(batches[i]) + ": " + fmt(g150[i]) + " -> " +
                                      fmt(g300[i]));
  ck.require(e150[0] < e150[1] && e150[1] < e150[2],
             "ei Total must grow with batch size at N=150: " + fmt(e150[0]) + " / " +
                 fmt(e150[1]) + " / " + fmt(e150[2]));

  const std::string seen = "gselc Totals N150 b4/6/10 = " + fmt(g150[0]) + "/" + fmt(g150[1]) +
                           "/" + fmt(g150[2]) + ", N300 = " + fmt(g300[0]) + "/" + fmt(g300[1]) +
                           "/" + fmt(g300[2]) + "; ei Totals b4/6/10 = " + fmt(e150[0]) + "/" +
                           fmt(e150[1]) + "/" + fmt(e150[2]);
  if (!ck.pass) return {false, ck.failures() + " [" + seen + "]"};
  return {true, seen};
}

Outcome criterion5(Context& ctx) {
  const BenchReport& rep = ctx.paviani();
  const BenchCell& g = cell(rep, 200, 10, Mode::gselc);
  const BenchCell& s = cell(rep, 200, 10, Mode::selc);
  const BenchCell& e = cell(rep, 200, 10, Mode::ei);

  Checker ck;
  ck.require(g.total() >= s.total(), "expected gselc Total >= selc Total, saw " + fmt(g.total()) +
                                         " vs " + fmt(s.total()));
  ck.require(g.total() >= e.total(), "expected gselc Total >= ei Total, saw " + fmt(g.total()) +
                                         " vs " + fmt(e.total()));

  const std::string seen =
      "Totals g/s/e = " + fmt(g.total()) + "/" + fmt(s.total()) + "/" + fmt(e.total());
  if (!ck.pass) return {false, ck.failures() + " [" + seen + "]"};
  return {true, seen};
}

// ---------------------------------------------------------------------------
// Criterion 6: run invariants and seed replay. The harness already validates
// every campaign it runs (exact final count, monotone incumbent, batch
// accounting, forbidden-pattern avoidance); here a dedicated small study also
// reruns every replication and demands byte-identical serialized states, and
// a direct pair of identically-seeded campaigns is compared end to end.

Outcome criterion6() {
  BenchSettings s;
  s.run_sizes = {70};
  s.batches = {6};
  s.methods = {Mode::gselc};
  s.reps = 5;
  s.base_seed = 9003;
  s.n0 = 40;
  s.replay_reps = 5;  // every replication runs twice and must serialize identically
  const BenchReport rep = run_benchmark(levy4_function(), s);
  const double covered = cell(rep, 70, 6, Mode::gselc).total();

  RunConfig cfg(DesignSpace::grid({10, 10, 10, 10}));
  cfg.n0 = 40;
  cfg.b = 6;
  cfg.budget = 70;
  cfg.seed = 424;
  const RunState a = run_to_budget(cfg, levy4_value);
  const RunState b = run_to_budget(cfg, levy4_value);
  check_run_invariants(a);
  if (state_to_json(a) != state_to_json(b))
    return {false, "identically seeded campaigns serialized differently"};

  return {true, "5 replications replayed byte-identically (cell Total " + fmt(covered) +
                    "); direct seed-424 rerun byte-identical; invariants checked on every "
                    "campaign this binary ran"};
}

// ---------------------------------------------------------------------------
// Criterion 7: relabeling robustness. Cyclically relabeling one factor's
// levels must leave the harness sound; the shift-0 study is the identity and
// must reproduce the plain report byte for byte. Cross-shift performance is
// reported, not asserted.

Outcome criterion7() {
  BenchSettings s;
  s.run_sizes = {100};
  s.batches = {6};
  s.methods = {Mode::gselc};
  s.reps = 5;
  s.base_seed = 9004;
  s.n0 = 40;

  const BenchReport base = run_benchmark(levy4_function(), s);
  const std::vector<RelabelCase> cases = {{0, 0}, {0, 1}, {0, 2}};
  const std::vector<RelabelReport> studies = relabel_study(levy4_function(), s, cases);
  if (studies.size() != 3) return {false, "expected three relabeling studies"};

  Checker ck;
  ck.require(benchmark_csv(studies[0].report) == benchmark_csv(base),
             "shift-0 study must reproduce the plain report byte for byte");
  const std::string names[3] = {"levy4_f1_shift0", "levy4_f1_shift1", "levy4_f1_shift2"};
  for (int k = 0; k < 3; ++k)
    ck.require(studies[static_cast<std::size_t>(k)].report.function_name == names[k],
               "unexpected study name " + studies[static_cast<std::size_t>(k)].report.function_name);

  std::string totals;
  for (int k = 0; k < 3; ++k) {
    const auto& c = cell(studies[static_cast<std::size_t>(k)].report, 100, 6, Mode::gselc);
    totals += (k ? "/" : "") + fmt(c.total());
  }
  if (!ck.pass) return {false, ck.failures()};
  return {true, "shift-0 byte-identical; Totals for shifts 0/1/2 = " + totals +
                    " (differences reported, not asserted)"};
}

// ---------------------------------------------------------------------------
// Criterion 8: CLI round-trip through real processes and the shipped fixture
// campaign: start, ingest the 50-run fixture, propose; a byte-copied state
// must propose the identical batch, and failed ingests must leave the state
// file untouched.

Outcome criterion8(Context& ctx) {
  if (ctx.cli.empty() || ctx.fixtures.empty())
    return {false, "needs --cli and --fixtures to locate the binary and input files"};
  if (!fs::exists(ctx.cli)) return {false, "cli binary not found: " + ctx.cli};
  const fs::path fx(ctx.fixtures);
  for (const char* f : {"campaign.json", "initial_50_points.csv", "initial_50_results.csv"})
    if (!fs::exists(fx / f)) return {false, std::string("missing fixture ") + f};

  TempDir dir;
  const std::string state = dir.file("state.json");
  const std::string log = dir.file("out.txt");
  const std::string cli = shell_quote(ctx.cli);
  auto logged = [&](const std::string& cmd) { return cmd + " > " + shell_quote(log) + " 2>&1"; };

  Checker ck;

  // Start the campaign; the pending initial design must echo the configured
  // 50-point file.
  const std::string init_points = dir.file("init_points.csv");
  int rc = run_cmd(logged(cli + " init --config " + shell_quote((fx / "campaign.json").string()) +
                          " --state " + shell_quote(state) + " --pending-out " +
                          shell_quote(init_points)));
  ck.require(rc == 0, "init exited with " + std::to_string(rc));
  ck.require(fs::exists(state), "init must write the state file");
  ck.require(read_file(init_points) == read_file((fx / "initial_50_points.csv").string()),
             "pending initial design must match the configured design file");

  // Re-running init on an existing state is refused (exit 2).
  rc = run_cmd(logged(cli + " init --config " + shell_quote((fx / "campaign.json").string()) +
                      " --state " + shell_quote(state)));
  ck.require(rc == 2, "second init should exit 2, got " + std::to_string(rc));

  // Ingest the 50 fixture results; the reported incumbent is 33.
  rc = run_cmd(logged(cli + " ingest --state " + shell_quote(state) + " --results " +
                      shell_quote((fx / "initial_50_results.csv").string())));
  ck.require(rc == 0, "ingest exited with " + std::to_string(rc));
  ck.require(read_file(log).find("f_max=33") != std::string::npos,
             "ingest must report the incumbent 33");

  const std::string snapshot = read_file(state);

  // Failed ingests: no pending batch (exit 2), malformed results file
  // (exit 1); both must leave the state file byte-identical.
  rc = run_cmd(logged(cli + " ingest --state " + shell_quote(state) + " --results " +
                      shell_quote((fx / "initial_50_results.csv").string())));
  ck.require(rc == 2, "ingest without a pending batch should exit 2, got " + std::to_string(rc));
  ck.require(read_file(state) == snapshot, "failed ingest (no pending) altered the state file");

  const std::string bogus = dir.file("bogus.csv");
  std::ofstream(bogus) << "A,B,C\n1,1,1\n";  // points file, not a results file
  rc = run_cmd(logged(cli + " ingest --state " + shell_quote(state) + " --results " +
                      shell_quote(bogus)));
  ck.require(rc == 1, "ingest of a malformed results file should exit 1, got " + std::to_string(rc));
  ck.require(read_file(state) == snapshot, "failed ingest (bad file) altered the state file");

  // Byte-copy the state; the copy must propose the identical batch and land
  // in the identical state.
  const std::string state2 = dir.file("state_copy.json");
  std::ofstream(state2, std::ios::binary) << snapshot;
  const std::string prop1 = dir.file("prop1.csv");
  const std::string prop2 = dir.file("prop2.csv");
  rc = run_cmd(logged(cli + " suggest --state " + shell_quote(state) + " --out " +
                      shell_quote(prop1)));
  ck.require(rc == 0, "suggest exited with " + std::to_string(rc));
  rc = run_cmd(logged(cli + " suggest --state " + shell_quote(state2) + " --out " +
                      shell_quote(prop2)));
  ck.require(rc == 0, "suggest on the copied state exited with " + std::to_string(rc));
  ck.require(read_file(prop1) == read_file(prop2),
             "reloaded state must propose the identical batch");
  ck.require(read_file(state) == read_file(state2),
             "reloaded state must land in the identical state");

  // The batch is pending now; asking again is refused and changes nothing.
  const std::string after = read_file(state);
  rc = run_cmd(logged(cli + " suggest --state " + shell_quote(state)));
  ck.require(rc == 2, "suggest with a pending batch should exit 2, got " + std::to_string(rc));
  ck.require(read_file(state) == after, "failed suggest altered the state file");

  if (!ck.pass) return {false, ck.failures()};
  return {true,
          "init/ingest/suggest round-trip: copied state proposed byte-identical batch; failed "
          "ingest and suggest left the state byte-identical; exit codes 0/1/2 as documented"};
}

// ---------------------------------------------------------------------------

struct Criterion {
  const char* label;
  std::function<Outcome(Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  std::set<int> selected = {1, 2, 3, 4, 5, 6, 7, 8};

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << arg << "\n";
        std::exit(99);
      }
      return argv[++i];
    };
    if (arg == "--cli") {
      ctx.cli = value();
    } else if (arg == "--fixtures") {
      ctx.fixtures = value();
    } else if (arg == "--criteria") {
      selected.clear();
      std::istringstream is(value());
      std::string item;
      while (std::getline(is, item, ',')) {
        const int k = std::atoi(item.c_str());
        if (k < 1 || k > 8) {
          std::cerr << "--criteria entries must be 1..8, got '" << item << "'\n";
          return 99;
        }
        selected.insert(k);
      }
    } else {
      std::cerr << "unknown argument '" << arg << "'\n"
                << "usage: acceptance --cli <binary> --fixtures <dir> [--criteria 1,2,...]\n";
      return 99;
    }
  }

  const std::map<int, Criterion> criteria = {
      {1, {"worked-example mechanics", [](Context&) { return criterion1(); }}},
      {2, {"surrogate and acquisition properties", [](Context&) { return criterion2(); }}},
      {3, {"four-factor headline comparison", [](Context& c) { return criterion3(c); }}},
      {4, {"four-factor budget and batch trends", [](Context& c) { return criterion4(c); }}},
      {5, {"five-factor comparison", [](Context& c) { return criterion5(c); }}},
      {6, {"run invariants and seed replay", [](Context&) { return criterion6(); }}},
      {7, {"level-relabeling robustness", [](Context&) { return criterion7(); }}},
      {8, {"command-line state round-trip", [](Context& c) { return criterion8(c); }}},
  };

  int failures = 0;
  for (int k : selected) {
    const auto& crit = criteria.at(k);
    Outcome o;
    try {
      o = crit.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("unhandled exception: ") + e.what()};
    }
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << k << ": " << crit.label
              << (o.detail.empty() ? "" : " -- " + o.detail) << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures;
}
