#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "gselc/design_space.hpp"
#include "gselc/rng.hpp"

namespace gselc {

// Product power-exponential correlation: corr(a, b) = exp(-sum_k theta_k |a_k - b_k|^{p_k}).
struct CorrelationParams {
  Eigen::VectorXd theta;
  Eigen::VectorXd p;
};

double correlation(const Point& a, const Point& b, const CorrelationParams& params);

struct FitSettings {
  int starts = 8;              // multistart count for the likelihood search
  int nm_max_evals = 100;      // simplex-search evaluation budget per start
  double nm_tol = 1e-7;        // simplex convergence tolerance (spread of values)
  double theta_min = 1e-3;     // search box for theta, per coordinate
  double theta_max = 10.0;
  double p_exponent = 2.0;     // smoothness exponent applied to every factor
  std::vector<double> nugget_ladder{0.0, 1e-10, 1e-8, 1e-6};  // scaled by mean(diag)
  int polish_max_rounds = 200;  // coordinate polish rounds after the search
};

// Fitted constant-mean kriging model with cached factorization products.
struct GpFit {
  Eigen::MatrixXd train_x;  // n x d
  Eigen::VectorXd train_y;
  CorrelationParams params;
  double mu_hat = 0.0;
  double sigma2_hat = 0.0;
  double nugget = 0.0;  // absolute jitter added to the diagonal
  bool degenerate = false;
  double log_likelihood = -std::numeric_limits<double>::infinity();

  Eigen::MatrixXd chol_lower;     // L with L L^T = R + nugget I
  Eigen::VectorXd resid_weights;  // R^{-1} (y - mu 1)
  Eigen::VectorXd ones_weights;   // R^{-1} 1
  double ones_quad = 0.0;         // 1^T R^{-1} 1
};

// Profile log-likelihood of theta given the data (mu and sigma^2 profiled
// out). Climbs the nugget ladder until the correlation matrix factorizes.
// Returns -infinity when no ladder entry factorizes or the profiled variance
// is not positive.
double profile_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& theta, const FitSettings& settings);

// Maximum-likelihood fit. Requires n >= 2 observations; a constant response
// vector yields a degenerate fit (sigma2_hat == 0, flag set) rather than an
// error. The rng drives the multistart draws.
GpFit fit_gp(const Dataset& data, const FitSettings& settings, Rng& rng);

// Constant model used when too little data exists for a real fit (n == 1).
GpFit make_constant_fit(const Dataset& data);

// Fit with theta held fixed: profiles out the mean and variance and caches
// the factorization, with no hyperparameter search.
GpFit fit_gp_at(const Dataset& data, const Eigen::VectorXd& theta, const FitSettings& settings);

double predict(const GpFit& fit, const Point& x);
double predict_mse(const GpFit& fit, const Point& x);

// Vectorized prediction over many points (rows of `points`). Outputs are
// resized to points.rows(). Processes the rows in fixed-size chunks so the
// cross-correlation block stays small.
void predict_batch(const GpFit& fit, const Eigen::MatrixXd& points, Eigen::VectorXd& y_hat,
                   Eigen::VectorXd& mse);

}  // namespace gselc
