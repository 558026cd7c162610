#include "gselc/stats.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace gselc::stats {

namespace {

// Continued-fraction kernel of the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3.0e-16;
  constexpr double kFpMin = 1.0e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double ibeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("ibeta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("ibeta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double f_survival(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("f_survival: dfs must be positive");
  if (std::isnan(f)) throw std::invalid_argument("f_survival: f must not be NaN");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return ibeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double normal_pdf(double u) {
  static const double kInvSqrt2Pi = 0.3989422804014326779;
  return kInvSqrt2Pi * std::exp(-0.5 * u * u);
}

double normal_cdf(double u) { return 0.5 * std::erfc(-u * 0.7071067811865475244); }

bool EffectScreen::main_significant(int factor) const {
  for (const auto& t : mains)
    if (t.factor_a == factor) return t.significant;
  return false;
}

bool EffectScreen::pair_significant(int factor_a, int factor_b) const {
  const int lo = std::min(factor_a, factor_b);
  const int hi = std::max(factor_a, factor_b);
  for (const auto& t : interactions)
    if (t.factor_a == lo && t.factor_b == hi) return t.significant;
  return false;
}

EffectScreen screen_effects(const Dataset& data, const DesignSpace& space, double alpha) {
  EffectScreen out;
  const auto n = static_cast<Eigen::Index>(data.size());
  const int d = space.dims();

  // Observed level indices per factor, in level order.
  std::vector<std::vector<int>> observed(static_cast<std::size_t>(d));
  {
    std::vector<std::set<int>> seen(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < data.size(); ++i)
      for (int j = 0; j < d; ++j) {
        const int li = space.level_index(j, data[i].point[j]);
        if (li < 0) throw std::invalid_argument("screen_effects: point off the level lists");
        seen[static_cast<std::size_t>(j)].insert(li);
      }
    for (int j = 0; j < d; ++j)
      observed[static_cast<std::size_t>(j)].assign(seen[static_cast<std::size_t>(j)].begin(),
                                                   seen[static_cast<std::size_t>(j)].end());
  }

  // Dummy block per factor with >= 2 observed levels: reference coding on the
  // lowest observed level.
  struct Block {
    std::string label;
    int factor_a;
    int factor_b;
    std::vector<Eigen::VectorXd> cols;
  };
  std::vector<Block> blocks;

  auto level_pos = [&](int factor, std::size_t i) {
    return space.level_index(factor, data[i].point[factor]);
  };

  std::vector<int> main_block_of(static_cast<std::size_t>(d), -1);
  for (int j = 0; j < d; ++j) {
    const auto& obs = observed[static_cast<std::size_t>(j)];
    if (obs.size() < 2) continue;
    Block b{space.factor_names()[static_cast<std::size_t>(j)], j, -1, {}};
    for (std::size_t t = 1; t < obs.size(); ++t) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
      for (std::size_t i = 0; i < data.size(); ++i)
        if (level_pos(j, i) == obs[t]) col[static_cast<Eigen::Index>(i)] = 1.0;
      b.cols.push_back(std::move(col));
    }
    main_block_of[static_cast<std::size_t>(j)] = static_cast<int>(blocks.size());
    blocks.push_back(std::move(b));
  }

  // Interaction blocks: pair (j, k) qualifies only when every observed level
  // pair has at least two observations.
  for (int j = 0; j < d; ++j) {
    if (main_block_of[static_cast<std::size_t>(j)] < 0) continue;
    for (int k = j + 1; k < d; ++k) {
      if (main_block_of[static_cast<std::size_t>(k)] < 0) continue;
      std::map<std::pair<int, int>, int> cells;
      for (std::size_t i = 0; i < data.size(); ++i) ++cells[{level_pos(j, i), level_pos(k, i)}];
      bool replicated = true;
      for (const auto& [cell, count] : cells)
        if (count < 2) {
          replicated = false;
          break;
        }
      if (!replicated || cells.size() < 2) continue;

      const auto& bj = blocks[static_cast<std::size_t>(main_block_of[static_cast<std::size_t>(j)])];
      const auto& bk = blocks[static_cast<std::size_t>(main_block_of[static_cast<std::size_t>(k)])];
      Block b{bj.label + ":" + bk.label, j, k, {}};
      for (const auto& cj : bj.cols)
        for (const auto& ck : bk.cols) {
          Eigen::VectorXd col = cj.cwiseProduct(ck);
          if (col.cwiseAbs().sum() > 0.0) b.cols.push_back(std::move(col));
        }
      if (!b.cols.empty()) blocks.push_back(std::move(b));
    }
  }

  auto finish_not_estimable = [&]() {
    for (const auto& b : blocks) {
      TermTest t;
      t.label = b.label;
      t.factor_a = b.factor_a;
      t.factor_b = b.factor_b;
      if (b.factor_b < 0)
        out.mains.push_back(t);
      else
        out.interactions.push_back(t);
    }
    out.estimable = false;
    return out;
  };

  if (blocks.empty() || n < 2) return finish_not_estimable();

  Eigen::Index p_cols = 1;
  for (const auto& b : blocks) p_cols += static_cast<Eigen::Index>(b.cols.size());
  if (n <= p_cols) return finish_not_estimable();

  Eigen::MatrixXd X(n, p_cols);
  X.col(0).setOnes();
  {
    Eigen::Index c = 1;
    for (const auto& b : blocks)
      for (const auto& col : b.cols) X.col(c++) = col;
  }
  const Eigen::VectorXd y = data.responses();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_full(X);
  const auto rank_full = qr_full.rank();
  if (rank_full < p_cols || n - rank_full < 1) return finish_not_estimable();
  out.estimable = true;

  const double rss_full = (y - X * qr_full.solve(y)).squaredNorm();
  const double y_mean = y.mean();
  const double tss = (y.array() - y_mean).square().sum();
  const double tol = 1e-9 * std::max(1.0, tss);
  const auto df2 = static_cast<int>(n - rank_full);

  Eigen::Index offset = 1;
  for (const auto& b : blocks) {
    const auto width = static_cast<Eigen::Index>(b.cols.size());
    Eigen::MatrixXd Xr(n, p_cols - width);
    Xr.leftCols(offset) = X.leftCols(offset);
    Xr.rightCols(p_cols - width - offset) = X.rightCols(p_cols - width - offset);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_red(Xr);
    const auto df1 = static_cast<int>(rank_full - qr_red.rank());
    const double rss_red = (y - Xr * qr_red.solve(y)).squaredNorm();

    TermTest t;
    t.label = b.label;
    t.factor_a = b.factor_a;
    t.factor_b = b.factor_b;
    t.df1 = df1;
    t.df2 = df2;
    if (df1 >= 1) {
      const double num = std::max(rss_red - rss_full, 0.0) / df1;
      const double den = rss_full / df2;
      if (den <= tol) {
        t.f_stat = (num <= tol) ? 0.0 : std::numeric_limits<double>::infinity();
        t.p_value = (num <= tol) ? 1.0 : 0.0;
      } else {
        t.f_stat = num / den;
        t.p_value = f_survival(t.f_stat, df1, df2);
      }
      t.significant = t.p_value < alpha;
    }
    if (b.factor_b < 0)
      out.mains.push_back(t);
    else
      out.interactions.push_back(t);
    offset += width;
  }
  return out;
}

}  // namespace gselc::stats
