#pragma once

#include <cstdint>
#include <vector>

#include "gselc/design_space.hpp"
#include "gselc/gp.hpp"

namespace gselc {

// Two published closed forms for the improvement criterion. `standard` uses
// s * pdf(u) in the exploration term; `as_printed` follows sources that print
// the variance there instead of the standard deviation.
enum class EiForm { standard, as_printed };

// max(y - f_max, 0).
double improvement(double y, double f_max);

// Expected improvement of a Gaussian prediction (y_hat, s2) over f_max.
// Never negative; collapses to improvement(y_hat, f_max) when s2 == 0.
double expected_improvement(double y_hat, double s2, double f_max,
                            EiForm form = EiForm::standard);

struct EiScore {
  std::int64_t candidate = -1;  // library index
  Point point;
  double y_hat = 0.0;
  double s2 = 0.0;
  double ei = 0.0;
};

// Indices of the m best-scoring entries (descending score, ties broken by
// lower index). Entries with excluded[i] != 0 are skipped. Throws when fewer
// than m eligible entries exist.
std::vector<std::int64_t> top_scoring_indices(const Eigen::VectorXd& scores,
                                              const std::vector<char>& excluded, int m);

// Rank every unsampled candidate by expected improvement and return the top
// m, in descending order. `sampled` points must be candidates of the space.
std::vector<EiScore> select_top_ei(const GpFit& fit, const DesignSpace& space,
                                   const std::vector<Point>& sampled, double f_max, int m,
                                   EiForm form = EiForm::standard);

}  // namespace gselc
