#pragma once

#include <string>
#include <vector>

#include "gselc/design_space.hpp"

namespace gselc::stats {

// Regularized incomplete beta function I_x(a, b) for a, b > 0 and x in [0, 1].
double ibeta(double a, double b, double x);

// Upper-tail probability P(F > f) for an F distribution with d1 and d2
// degrees of freedom.
double f_survival(double f, double d1, double d2);

// Standard normal density and distribution function.
double normal_pdf(double u);
double normal_cdf(double u);

// Partial F-test result for one model term.
struct TermTest {
  std::string label;
  int factor_a = -1;  // first factor of the term
  int factor_b = -1;  // second factor for interactions, -1 for main effects
  int df1 = 0;        // rank lost when the term is dropped
  int df2 = 0;        // residual degrees of freedom of the full model
  double f_stat = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

// Screen of main effects and pairwise interactions for factors treated as
// categorical. Interactions enter the model only when every observed level
// pair of the two factors has at least two observations. When the full model
// cannot be estimated (rank-deficient or no residual degrees of freedom),
// nothing is declared significant.
struct EffectScreen {
  bool estimable = false;
  std::vector<TermTest> mains;         // one per factor with >= 2 observed levels
  std::vector<TermTest> interactions;  // only pairs that met the cell-count rule
  bool main_significant(int factor) const;
  bool pair_significant(int factor_a, int factor_b) const;
};

EffectScreen screen_effects(const Dataset& data, const DesignSpace& space, double alpha);

}  // namespace gselc::stats
