#pragma once

#include <cstdint>
#include <vector>

#include "gselc/gp.hpp"
#include "gselc/rng.hpp"

namespace gselc {

struct MixingSettings {
  double c = 0.75;                    // region threshold as a share of f_max
  int k_max = 5;                      // largest cluster count considered
  double silhouette_threshold = 0.25; // below this, the region counts as one cluster
  int kmeans_restarts = 5;
  int kmeans_max_iters = 50;
  std::int64_t silhouette_cap = 512;  // subsample size for silhouette scoring
};

// Shift added to responses so the incumbent best is positive: 0 when
// f_max > 0, otherwise -min(y) + 0.05 * range(y).
double response_shift(const Eigen::VectorXd& y);

// Indices (into `candidates` rows) of the promising region: points whose
// prediction exceeds c * f_max after both sides are shifted by
// response_shift(fit.train_y). Sampled candidates are included.
std::vector<std::int64_t> region_s(const GpFit& fit, const Eigen::MatrixXd& candidates, double c,
                                   double f_max);

// Same membership rule applied to precomputed predictions.
std::vector<std::int64_t> region_s_from_predictions(const Eigen::VectorXd& y_hat, double shift,
                                                    double c, double f_max);

// Share of the library lying in the promising region.
double mixing_alpha(std::int64_t region_size, std::int64_t library_size);

// Smallest batch share matching alpha: ceil(alpha * b), capped at b.
// The integer overload is exact for alpha = region_size / library_size.
int ei_batch_count(double alpha, int b);
int ei_batch_count(std::int64_t region_size, std::int64_t library_size, int b);

struct Clustering {
  int k = 1;
  std::vector<int> assignment;  // one label per input row
  double silhouette = 0.0;      // of the chosen k (0 when k == 1)
};

// Distinct-cluster estimate of a point set: best-of-restarts partitions for
// k = 2..k_max scored by mean silhouette, falling back to one cluster when
// the best score is weak. Diagnostic only.
Clustering cluster_count(const Eigen::MatrixXd& points, const MixingSettings& settings, Rng& rng);

}  // namespace gselc
