#include "gselc/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gselc {

namespace {

struct KmeansResult {
  std::vector<int> assignment;
  Eigen::MatrixXd centers;
  double wcss = std::numeric_limits<double>::infinity();
};

KmeansResult lloyd(const Eigen::MatrixXd& pts, int k, const std::vector<std::int64_t>& seeds,
                   int max_iters) {
  const Eigen::Index m = pts.rows();
  KmeansResult res;
  res.centers.resize(k, pts.cols());
  for (int c = 0; c < k; ++c) res.centers.row(c) = pts.row(seeds[static_cast<std::size_t>(c)]);
  res.assignment.assign(static_cast<std::size_t>(m), -1);

  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < m; ++i) {
      int best = 0;
      double best_d = (pts.row(i) - res.centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double dd = (pts.row(i) - res.centers.row(c)).squaredNorm();
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      if (res.assignment[static_cast<std::size_t>(i)] != best) {
        res.assignment[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    // Recompute means; an emptied cluster is reseeded on the point farthest
    // from its current center.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, pts.cols());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < m; ++i) {
      sums.row(res.assignment[static_cast<std::size_t>(i)]) += pts.row(i);
      ++counts[static_cast<std::size_t>(res.assignment[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        res.centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
          const int a = res.assignment[static_cast<std::size_t>(i)];
          const double dd = (pts.row(i) - res.centers.row(a)).squaredNorm();
          if (dd > far_d) {
            far_d = dd;
            far = i;
          }
        }
        res.centers.row(c) = pts.row(far);
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
  }

  res.wcss = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    res.wcss += (pts.row(i) - res.centers.row(res.assignment[static_cast<std::size_t>(i)])).squaredNorm();
  return res;
}

double mean_silhouette(const Eigen::MatrixXd& pts, const std::vector<int>& assignment, int k,
                       std::int64_t cap, Rng& rng) {
  const Eigen::Index m = pts.rows();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
  for (int a : assignment) ++counts[static_cast<std::size_t>(a)];

  std::vector<std::int64_t> chosen;
  if (m <= cap) {
    chosen.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) chosen[static_cast<std::size_t>(i)] = i;
  } else {
    chosen = rng.sample_indices(m, cap);
    std::sort(chosen.begin(), chosen.end());
  }

  double total = 0.0;
  for (const auto i : chosen) {
    const int own = assignment[static_cast<std::size_t>(i)];
    if (counts[static_cast<std::size_t>(own)] < 2) continue;  // singleton scores 0
    std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])] +=
          (pts.row(i) - pts.row(j)).norm();
    }
    const double a = sums[static_cast<std::size_t>(own)] /
                     static_cast<double>(counts[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || counts[static_cast<std::size_t>(c)] == 0) continue;
      b = std::min(b, sums[static_cast<std::size_t>(c)] /
                          static_cast<double>(counts[static_cast<std::size_t>(c)]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return chosen.empty() ? 0.0 : total / static_cast<double>(chosen.size());
}

}  // namespace

double response_shift(const Eigen::VectorXd& y) {
  if (y.size() == 0) throw std::invalid_argument("response_shift: empty responses");
  const double y_max = y.maxCoeff();
  if (y_max > 0.0) return 0.0;
  const double y_min = y.minCoeff();
  return -y_min + 0.05 * (y_max - y_min);
}

std::vector<std::int64_t> region_s_from_predictions(const Eigen::VectorXd& y_hat, double shift,
                                                    double c, double f_max) {
  std::vector<std::int64_t> members;
  const double bar = c * (f_max + shift);
  for (Eigen::Index i = 0; i < y_hat.size(); ++i)
    if (y_hat[i] + shift > bar) members.push_back(i);
  return members;
}

std::vector<std::int64_t> region_s(const GpFit& fit, const Eigen::MatrixXd& candidates, double c,
                                   double f_max) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("region_s: c must lie in (0, 1)");
  Eigen::VectorXd y_hat, mse;
  predict_batch(fit, candidates, y_hat, mse);
  return region_s_from_predictions(y_hat, response_shift(fit.train_y), c, f_max);
}

double mixing_alpha(std::int64_t region_size, std::int64_t library_size) {
  if (library_size < 1) throw std::invalid_argument("mixing_alpha: empty library");
  if (region_size < 0 || region_size > library_size)
    throw std::invalid_argument("mixing_alpha: region size out of range");
  return static_cast<double>(region_size) / static_cast<double>(library_size);
}

int ei_batch_count(double alpha, int b) {
  if (b < 1) throw std::invalid_argument("ei_batch_count: b must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("ei_batch_count: alpha outside [0, 1]");
  if (alpha == 0.0) return 0;
  const auto count = static_cast<int>(std::ceil(alpha * b - 1e-9));
  return std::clamp(count, 0, b);
}

int ei_batch_count(std::int64_t region_size, std::int64_t library_size, int b) {
  if (b < 1) throw std::invalid_argument("ei_batch_count: b must be >= 1");
  if (library_size < 1 || region_size < 0 || region_size > library_size)
    throw std::invalid_argument("ei_batch_count: bad region/library sizes");
  if (region_size == 0) return 0;
  const std::int64_t count = (region_size * b + library_size - 1) / library_size;
  return static_cast<int>(std::min<std::int64_t>(count, b));
}

Clustering cluster_count(const Eigen::MatrixXd& points, const MixingSettings& settings, Rng& rng) {
  const Eigen::Index m = points.rows();
  Clustering out;
  if (m == 0) {
    out.k = 0;
    return out;
  }
  out.assignment.assign(static_cast<std::size_t>(m), 0);
  if (m == 1 || settings.k_max < 2) return out;

  int best_k = 1;
  double best_sil = -std::numeric_limits<double>::infinity();
  std::vector<int> best_assignment;
  const int k_hi = static_cast<int>(std::min<std::int64_t>(settings.k_max, m));
  for (int k = 2; k <= k_hi; ++k) {
    KmeansResult best_run;
    for (int r = 0; r < std::max(settings.kmeans_restarts, 1); ++r) {
      const auto seeds = rng.sample_indices(m, k);
      KmeansResult run = lloyd(points, k, seeds, settings.kmeans_max_iters);
      if (run.wcss < best_run.wcss) best_run = std::move(run);
    }
    const double sil = mean_silhouette(points, best_run.assignment, k, settings.silhouette_cap, rng);
    if (sil > best_sil) {
      best_sil = sil;
      best_k = k;
      best_assignment = best_run.assignment;
    }
  }
  if (best_sil >= settings.silhouette_threshold) {
    out.k = best_k;
    out.assignment = best_assignment;
    out.silhouette = best_sil;
  }
  return out;
}

}  // namespace gselc
