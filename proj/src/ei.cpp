#include "gselc/ei.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gselc/stats.hpp"

namespace gselc {

double improvement(double y, double f_max) { return std::max(y - f_max, 0.0); }

double expected_improvement(double y_hat, double s2, double f_max, EiForm form) {
  if (std::isnan(y_hat) || std::isnan(s2) || std::isnan(f_max))
    throw std::invalid_argument("expected_improvement: NaN input");
  if (s2 <= 0.0) return improvement(y_hat, f_max);
  const double s = std::sqrt(s2);
  const double diff = y_hat - f_max;
  const double u = diff / s;
  const double spread = (form == EiForm::standard) ? s : s2;
  const double value = diff * stats::normal_cdf(u) + spread * stats::normal_pdf(u);
  return std::max(value, 0.0);
}

std::vector<std::int64_t> top_scoring_indices(const Eigen::VectorXd& scores,
                                              const std::vector<char>& excluded, int m) {
  if (m < 0) throw std::invalid_argument("top_scoring_indices: m must be >= 0");
  if (static_cast<std::size_t>(scores.size()) != excluded.size())
    throw std::invalid_argument("top_scoring_indices: size mismatch");
  std::vector<std::int64_t> eligible;
  eligible.reserve(static_cast<std::size_t>(scores.size()));
  for (std::int64_t i = 0; i < scores.size(); ++i)
    if (!excluded[static_cast<std::size_t>(i)]) eligible.push_back(i);
  if (static_cast<std::int64_t>(eligible.size()) < m)
    throw std::invalid_argument("top_scoring_indices: fewer than m eligible entries");
  const auto mid = eligible.begin() + m;
  std::partial_sort(eligible.begin(), mid, eligible.end(),
                    [&scores](std::int64_t a, std::int64_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  eligible.resize(static_cast<std::size_t>(m));
  return eligible;
}

std::vector<EiScore> select_top_ei(const GpFit& fit, const DesignSpace& space,
                                   const std::vector<Point>& sampled, double f_max, int m,
                                   EiForm form) {
  const Eigen::MatrixXd cand = space.enumerate();
  std::vector<char> excluded(static_cast<std::size_t>(cand.rows()), 0);
  for (const auto& p : sampled) {
    const std::int64_t idx = space.index_of(p);
    if (idx < 0) throw std::invalid_argument("select_top_ei: sampled point is not a candidate");
    excluded[static_cast<std::size_t>(idx)] = 1;
  }

  Eigen::VectorXd y_hat, mse;
  predict_batch(fit, cand, y_hat, mse);
  Eigen::VectorXd ei(cand.rows());
  for (Eigen::Index i = 0; i < cand.rows(); ++i)
    ei[i] = expected_improvement(y_hat[i], mse[i], f_max, form);

  const auto top = top_scoring_indices(ei, excluded, m);
  std::vector<EiScore> out;
  out.reserve(top.size());
  for (auto idx : top)
    out.push_back({idx, cand.row(idx), y_hat[idx], mse[idx], ei[idx]});
  return out;
}

}  // namespace gselc
