#include "gselc/gp.hpp"

#include <Eigen/Cholesky>

#include "gselc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace gselc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr Eigen::Index kPredictChunk = 4096;

void validate_settings(const FitSettings& s, int d) {
  if (s.starts < 1) throw std::invalid_argument("FitSettings: starts must be >= 1");
  if (s.nm_max_evals < d + 2) throw std::invalid_argument("FitSettings: eval budget too small");
  if (!(s.theta_min > 0.0) || !(s.theta_max >= s.theta_min))
    throw std::invalid_argument("FitSettings: need 0 < theta_min <= theta_max");
  if (!(s.p_exponent > 0.0) || s.p_exponent > 2.0)
    throw std::invalid_argument("FitSettings: exponent must lie in (0, 2]");
  for (double v : s.nugget_ladder)
    if (v < 0.0) throw std::invalid_argument("FitSettings: nugget values must be >= 0");
}

// Shared likelihood machinery: per-factor |x_i - x_j|^p matrices are built
// once per fit so each theta evaluation is one weighted sum, one exp pass and
// one Cholesky factorization.
class LikelihoodEvaluator {
 public:
  LikelihoodEvaluator(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitSettings& s)
      : X_(X), y_(y), settings_(s), n_(X.rows()), d_(X.cols()) {
    dist_pows_.reserve(static_cast<std::size_t>(d_));
    for (Eigen::Index k = 0; k < d_; ++k) {
      Eigen::MatrixXd D(n_, n_);
      for (Eigen::Index j = 0; j < n_; ++j) {
        D(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < n_; ++i) {
          const double a = std::abs(X(i, k) - X(j, k));
          const double v = settings_.p_exponent == 2.0 ? a * a : std::pow(a, settings_.p_exponent);
          D(i, j) = v;
          D(j, i) = v;
        }
      }
      dist_pows_.push_back(std::move(D));
    }
    const double y_mean = y_.mean();
    y_var_ = (y_.array() - y_mean).square().sum() / static_cast<double>(n_);
  }

  struct Result {
    bool ok = false;
    double loglik = kNegInf;
    double mu = 0.0;
    double sigma2 = 0.0;
    double nugget = 0.0;
    Eigen::MatrixXd chol_lower;
    Eigen::VectorXd rinv_y;
    Eigen::VectorXd rinv_ones;
  };

  Result eval(const Eigen::VectorXd& theta, bool want_factors) const {
    Result res;
    Eigen::MatrixXd A = theta[0] * dist_pows_[0];
    for (Eigen::Index k = 1; k < d_; ++k) A.noalias() += theta[k] * dist_pows_[static_cast<std::size_t>(k)];
    Eigen::MatrixXd R = (-A.array()).exp();

    const std::vector<double> default_ladder{0.0};
    const auto& ladder = settings_.nugget_ladder.empty() ? default_ladder : settings_.nugget_ladder;
    // diag(R) is identically 1, so the ladder scale factor mean(diag) is 1.
    Eigen::LLT<Eigen::MatrixXd> llt;
    double used_nugget = 0.0;
    bool factored = false;
    for (double delta : ladder) {
      Eigen::MatrixXd Rj = R;
      if (delta > 0.0) Rj.diagonal().array() += delta;
      llt.compute(Rj);
      if (llt.info() == Eigen::Success) {
        used_nugget = delta;
        factored = true;
        break;
      }
    }
    if (!factored) return res;

    const auto& L = llt.matrixL();
    Eigen::VectorXd vy = L.solve(y_);
    Eigen::VectorXd v1 = L.solve(Eigen::VectorXd::Ones(n_));
    const double ones_quad = v1.squaredNorm();
    if (!(ones_quad > 0.0)) return res;
    const double mu = v1.dot(vy) / ones_quad;
    const double sigma2 = (vy - mu * v1).squaredNorm() / static_cast<double>(n_);
    if (!(sigma2 > 1e-12 * y_var_)) return res;  // numerically exact fit: reject this theta

    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i) logdet += std::log(llt.matrixLLT()(i, i));
    logdet *= 2.0;

    const double n = static_cast<double>(n_);
    res.loglik = -0.5 * (n * std::log(2.0 * M_PI * sigma2) + logdet + n);
    if (!std::isfinite(res.loglik)) return res;
    res.ok = true;
    res.mu = mu;
    res.sigma2 = sigma2;
    res.nugget = used_nugget;
    if (want_factors) {
      res.chol_lower = llt.matrixLLT().triangularView<Eigen::Lower>();
      res.rinv_y = llt.solve(y_);
      res.rinv_ones = llt.solve(Eigen::VectorXd::Ones(n_));
    }
    return res;
  }

  Eigen::Index dims() const { return d_; }

 private:
  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  FitSettings settings_;
  Eigen::Index n_;
  Eigen::Index d_;
  std::vector<Eigen::MatrixXd> dist_pows_;
  double y_var_ = 0.0;
};

// Derivative-free simplex maximization with a fixed evaluation budget.
// Deterministic for a given starting point.
template <class F>
std::pair<Eigen::VectorXd, double> simplex_maximize(const F& f, const Eigen::VectorXd& x0,
                                                    double step, int max_evals, double tol) {
  const auto d = static_cast<int>(x0.size());
  struct Vertex {
    Eigen::VectorXd x;
    double val;
  };
  std::vector<Vertex> simplex;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };

  simplex.push_back({x0, eval(x0)});
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd x = x0;
    x[k] += step;
    simplex.push_back({x, eval(x)});
  }
  auto order = [&]() {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.val > b.val; });
  };
  order();

  while (evals < max_evals) {
    const double spread = simplex.front().val - simplex.back().val;
    if (std::isfinite(simplex.front().val) && spread < tol * (std::abs(simplex.front().val) + tol))
      break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += simplex[static_cast<std::size_t>(i)].x;
    centroid /= static_cast<double>(d);
    Vertex& worst = simplex.back();

    Eigen::VectorXd xr = centroid + (centroid - worst.x);
    const double fr = eval(xr);
    if (fr > simplex.front().val) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst.x);
      const double fe = (evals < max_evals) ? eval(xe) : kNegInf;
      if (fe > fr)
        worst = {xe, fe};
      else
        worst = {xr, fr};
    } else if (fr > simplex[static_cast<std::size_t>(d - 1)].val) {
      worst = {xr, fr};
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (worst.x - centroid);
      const double fc = (evals < max_evals) ? eval(xc) : kNegInf;
      if (fc > worst.val) {
        worst = {xc, fc};
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i].x = simplex.front().x + 0.5 * (simplex[i].x - simplex.front().x);
          simplex[i].val = (evals < max_evals) ? eval(simplex[i].x) : kNegInf;
        }
      }
    }
    order();
  }
  return {simplex.front().x, simplex.front().val};
}

void finalize_fit(GpFit& fit, const LikelihoodEvaluator::Result& res) {
  fit.mu_hat = res.mu;
  fit.sigma2_hat = res.sigma2;
  fit.nugget = res.nugget;
  fit.log_likelihood = res.loglik;
  fit.chol_lower = res.chol_lower;
  fit.ones_weights = res.rinv_ones;
  fit.resid_weights = res.rinv_y - res.mu * res.rinv_ones;
  fit.ones_quad = res.rinv_ones.sum();
}

}  // namespace

double correlation(const Point& a, const Point& b, const CorrelationParams& params) {
  if (a.size() != b.size() || a.size() != params.theta.size() || a.size() != params.p.size())
    throw std::invalid_argument("correlation: dimension mismatch");
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double dk = std::abs(a[k] - b[k]);
    s += params.theta[k] * (params.p[k] == 2.0 ? dk * dk : std::pow(dk, params.p[k]));
  }
  return std::exp(-s);
}

double profile_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& theta, const FitSettings& settings) {
  if (X.rows() != y.size() || X.rows() < 2)
    throw std::invalid_argument("profile_log_likelihood: need n >= 2 rows matching y");
  if (theta.size() != X.cols())
    throw std::invalid_argument("profile_log_likelihood: one theta per factor");
  LikelihoodEvaluator ev(X, y, settings);
  return ev.eval(theta, false).loglik;
}

GpFit make_constant_fit(const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("make_constant_fit: empty dataset");
  GpFit fit;
  fit.train_x = data.points_matrix();
  fit.train_y = data.responses();
  fit.degenerate = true;
  fit.mu_hat = fit.train_y.mean();
  fit.sigma2_hat = 0.0;
  const auto d = fit.train_x.cols();
  fit.params.theta = Eigen::VectorXd::Zero(d);
  fit.params.p = Eigen::VectorXd::Constant(d, 2.0);
  return fit;
}

GpFit fit_gp_at(const Dataset& data, const Eigen::VectorXd& theta, const FitSettings& settings) {
  if (data.size() < 2) throw std::invalid_argument("fit_gp_at: need at least two observations");
  const Eigen::MatrixXd X = data.points_matrix();
  const Eigen::VectorXd y = data.responses();
  if (theta.size() != X.cols()) throw std::invalid_argument("fit_gp_at: one theta per factor");

  GpFit fit;
  fit.train_x = X;
  fit.train_y = y;
  fit.params.theta = theta;
  fit.params.p = Eigen::VectorXd::Constant(X.cols(), settings.p_exponent);
  if (data.max_response() == data.min_response()) {
    fit.degenerate = true;
    fit.mu_hat = y[0];
    return fit;
  }
  LikelihoodEvaluator ev(X, y, settings);
  const auto res = ev.eval(theta, true);
  if (!res.ok) throw NumericalError("fit_gp_at: correlation matrix would not factorize");
  finalize_fit(fit, res);
  return fit;
}

GpFit fit_gp(const Dataset& data, const FitSettings& settings, Rng& rng) {
  if (data.size() < 2) throw std::invalid_argument("fit_gp: need at least two observations");
  const Eigen::MatrixXd X = data.points_matrix();
  const Eigen::VectorXd y = data.responses();
  const auto d = X.cols();
  validate_settings(settings, static_cast<int>(d));

  GpFit fit;
  fit.train_x = X;
  fit.train_y = y;
  fit.params.p = Eigen::VectorXd::Constant(d, settings.p_exponent);

  if (data.max_response() == data.min_response()) {
    fit.degenerate = true;
    fit.mu_hat = y[0];
    fit.sigma2_hat = 0.0;
    fit.params.theta = Eigen::VectorXd::Zero(d);
    return fit;
  }

  LikelihoodEvaluator ev(X, y, settings);
  const double zlo = std::log(settings.theta_min);
  const double zhi = std::log(settings.theta_max);

  // Penalized objective in log-theta space: outside the search box the value
  // slopes back toward it.
  auto objective = [&](const Eigen::VectorXd& z) {
    double violation = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      if (z[k] < zlo) violation += zlo - z[k];
      if (z[k] > zhi) violation += z[k] - zhi;
    }
    if (violation > 0.0) return -1e12 * (1.0 + violation);
    return ev.eval(z.array().exp(), false).loglik;
  };

  Eigen::VectorXd best_z;
  double best_val = kNegInf;
  for (int s = 0; s < settings.starts; ++s) {
    Eigen::VectorXd z0(d);
    for (Eigen::Index k = 0; k < d; ++k) z0[k] = rng.next_in(zlo, zhi);
    auto [z, val] = simplex_maximize(objective, z0, 0.5, settings.nm_max_evals, settings.nm_tol);
    if (val > best_val) {
      best_val = val;
      best_z = z;
    }
  }
  if (!std::isfinite(best_val))
    throw NumericalError("fit_gp: likelihood search failed at every start");

  // Coordinate polish: accept any +-10% per-coordinate step that improves the
  // likelihood, so the returned theta is locally optimal on that stencil.
  Eigen::VectorXd theta = best_z.array().exp().cwiseMax(settings.theta_min).cwiseMin(settings.theta_max);
  double current = ev.eval(theta, false).loglik;
  for (int round = 0; round < settings.polish_max_rounds; ++round) {
    Eigen::VectorXd best_step = theta;
    double best_step_val = current;
    for (Eigen::Index k = 0; k < d; ++k) {
      for (double factor : {1.1, 0.9}) {
        Eigen::VectorXd t = theta;
        t[k] *= factor;
        const double val = ev.eval(t, false).loglik;
        if (val > best_step_val) {
          best_step_val = val;
          best_step = t;
        }
      }
    }
    if (best_step_val <= current) break;
    theta = best_step;
    current = best_step_val;
  }

  const auto res = ev.eval(theta, true);
  if (!res.ok) throw NumericalError("fit_gp: final factorization failed");
  fit.params.theta = theta;
  finalize_fit(fit, res);
  return fit;
}

double predict(const GpFit& fit, const Point& x) {
  Eigen::VectorXd y_hat, mse;
  Eigen::MatrixXd pts(1, x.size());
  pts.row(0) = x;
  predict_batch(fit, pts, y_hat, mse);
  return y_hat[0];
}

double predict_mse(const GpFit& fit, const Point& x) {
  Eigen::VectorXd y_hat, mse;
  Eigen::MatrixXd pts(1, x.size());
  pts.row(0) = x;
  predict_batch(fit, pts, y_hat, mse);
  return mse[0];
}

void predict_batch(const GpFit& fit, const Eigen::MatrixXd& points, Eigen::VectorXd& y_hat,
                   Eigen::VectorXd& mse) {
  const Eigen::Index m = points.rows();
  y_hat.resize(m);
  mse.resize(m);
  if (fit.degenerate) {
    y_hat.setConstant(fit.mu_hat);
    mse.setZero();
    return;
  }
  if (points.cols() != fit.train_x.cols())
    throw std::invalid_argument("predict_batch: dimension mismatch");
  const Eigen::Index n = fit.train_x.rows();
  const Eigen::Index d = fit.train_x.cols();

  for (Eigen::Index start = 0; start < m; start += kPredictChunk) {
    const Eigen::Index rows = std::min(kPredictChunk, m - start);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, n);
    for (Eigen::Index k = 0; k < d; ++k) {
      const auto diff = (points.col(k).segment(start, rows).replicate(1, n) -
                         fit.train_x.col(k).transpose().replicate(rows, 1))
                            .array()
                            .abs();
      if (fit.params.p[k] == 2.0)
        A.array() += fit.params.theta[k] * diff.square();
      else
        A.array() += fit.params.theta[k] * diff.pow(fit.params.p[k]);
    }
    Eigen::MatrixXd cross = (-A.array()).exp();

    y_hat.segment(start, rows) = (cross * fit.resid_weights).array() + fit.mu_hat;

    Eigen::MatrixXd v = fit.chol_lower.triangularView<Eigen::Lower>().solve(cross.transpose());
    const auto q = v.colwise().squaredNorm().transpose().array();
    const auto h = 1.0 - (cross * fit.ones_weights).array();
    mse.segment(start, rows) =
        (fit.sigma2_hat * (1.0 - q + h.square() / fit.ones_quad)).cwiseMax(0.0);
  }
}

}  // namespace gselc
