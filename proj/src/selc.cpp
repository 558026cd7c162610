#include "gselc/selc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gselc {

namespace {

int effective_order(const ForbiddenArray& fa, int d) {
  if (fa.order >= 1) return fa.order;
  return std::max(1, d - 1);
}

}  // namespace

bool is_forbidden(const ForbiddenArray& fa, const Point& x) {
  if (fa.entries.empty()) return false;
  const int d = static_cast<int>(x.size());
  const int need = effective_order(fa, d);
  for (const auto& e : fa.entries) {
    if (e.size() != x.size()) throw std::invalid_argument("is_forbidden: dimension mismatch");
    int matches = 0;
    for (Eigen::Index j = 0; j < x.size(); ++j)
      if (e[j] == x[j]) ++matches;
    if (matches >= need) return true;
  }
  return false;
}

ForbiddenArray update_forbidden(const ForbiddenArray& fa, const std::vector<Observation>& batch) {
  ForbiddenArray out = fa;
  if (fa.strength <= 0 || batch.empty()) return out;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&batch](std::size_t a, std::size_t b) { return batch[a].y < batch[b].y; });
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(fa.strength), batch.size());
  for (std::size_t t = 0; t < take; ++t) {
    const Point& p = batch[order[t]].point;
    const bool known = std::any_of(out.entries.begin(), out.entries.end(),
                                   [&p](const Point& e) { return e == p; });
    if (!known) out.entries.push_back(p);
  }
  return out;
}

MutationWeights mutation_weights(const Dataset& data, const DesignSpace& space,
                                 const SelcSettings& settings) {
  const int d = space.dims();
  if (!(settings.w0 >= 0.0 && settings.w0 <= 1.0))
    throw std::invalid_argument("mutation_weights: w0 must lie in [0, 1]");

  stats::EffectScreen screen;
  if (data.size() >= 2) screen = stats::screen_effects(data, space, settings.significance_alpha);

  // Per-level response averages, and the baseline-plus-boost distribution.
  std::vector<Eigen::VectorXd> boosted_marginal(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const int levels = space.level_count(j);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(levels);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(levels);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int li = space.level_index(j, data[i].point[j]);
      if (li < 0) throw std::invalid_argument("mutation_weights: point off the level lists");
      sum[li] += data[i].y;
      count[li] += 1.0;
    }
    Eigen::VectorXd boost = Eigen::VectorXd::Zero(levels);
    for (int l = 0; l < levels; ++l)
      if (count[l] > 0.0) boost[l] = std::max(sum[l] / count[l], 0.0);
    const double denom = boost.sum();
    Eigen::VectorXd marg(levels);
    if (denom > 0.0)
      marg = Eigen::VectorXd::Constant(levels, settings.w0 / levels) +
             (1.0 - settings.w0) * boost / denom;
    else
      marg.setConstant(1.0 / levels);
    boosted_marginal[static_cast<std::size_t>(j)] = std::move(marg);
  }

  MutationWeights out;
  out.marginal.resize(static_cast<std::size_t>(d));
  out.boosted.assign(static_cast<std::size_t>(d), 0);

  // Joint tables for significant pairs.
  for (const auto& t : screen.interactions) {
    if (!t.significant) continue;
    const int a = t.factor_a, b = t.factor_b;
    const int la = space.level_count(a), lb = space.level_count(b);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(la, lb);
    Eigen::MatrixXd count = Eigen::MatrixXd::Zero(la, lb);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int ia = space.level_index(a, data[i].point[a]);
      const int ib = space.level_index(b, data[i].point[b]);
      sum(ia, ib) += data[i].y;
      count(ia, ib) += 1.0;
    }
    Eigen::MatrixXd boost = Eigen::MatrixXd::Zero(la, lb);
    for (int r = 0; r < la; ++r)
      for (int c = 0; c < lb; ++c)
        if (count(r, c) > 0.0) boost(r, c) = std::max(sum(r, c) / count(r, c), 0.0);
    const double denom = boost.sum();
    Eigen::MatrixXd table(la, lb);
    if (denom > 0.0)
      table = Eigen::MatrixXd::Constant(la, lb, settings.w0 / (la * lb)) +
              (1.0 - settings.w0) * boost / denom;
    else
      table.setConstant(1.0 / (la * lb));
    out.joint.emplace(std::make_pair(a, b), std::move(table));
  }

  for (int j = 0; j < d; ++j) {
    // A factor inside a significant pair mutates from that table's marginal
    // when its partner is not mutating; the first such pair (map order) wins.
    const Eigen::MatrixXd* table = nullptr;
    bool is_row = false;
    for (const auto& [pr, tbl] : out.joint) {
      if (pr.first == j) {
        table = &tbl;
        is_row = true;
        break;
      }
      if (pr.second == j) {
        table = &tbl;
        is_row = false;
        break;
      }
    }
    if (table != nullptr) {
      out.marginal[static_cast<std::size_t>(j)] =
          is_row ? Eigen::VectorXd(table->rowwise().sum())
                 : Eigen::VectorXd(table->colwise().sum().transpose());
      out.boosted[static_cast<std::size_t>(j)] = 1;
    } else if (screen.main_significant(j)) {
      out.marginal[static_cast<std::size_t>(j)] = boosted_marginal[static_cast<std::size_t>(j)];
      out.boosted[static_cast<std::size_t>(j)] = 1;
    } else {
      const int levels = space.level_count(j);
      out.marginal[static_cast<std::size_t>(j)] = Eigen::VectorXd::Constant(levels, 1.0 / levels);
    }
  }
  return out;
}

SelcBatch propose_selc_batch(const Dataset& data, const ForbiddenArray& fa,
                             const MutationWeights& weights, const DesignSpace& space, int m,
                             const std::unordered_set<std::int64_t>& exclude,
                             const SelcSettings& settings, Rng& rng) {
  if (m < 0) throw std::invalid_argument("propose_selc_batch: m must be >= 0");
  SelcBatch batch;
  if (m == 0) return batch;
  if (data.empty()) throw std::invalid_argument("propose_selc_batch: no parents available");
  const int d = space.dims();
  if (weights.marginal.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("propose_selc_batch: weights do not match the space");

  const Eigen::VectorXd y = data.responses();
  const double y_min = y.minCoeff();
  const double range = y.maxCoeff() - y_min;
  Eigen::VectorXd fitness;
  if (range > 0.0)
    fitness = (y.array() - y_min + 1e-6 * range).matrix();
  else
    fitness = Eigen::VectorXd::Ones(y.size());

  const double p_mut = settings.p_mut > 0.0 ? settings.p_mut : 1.0 / d;
  const std::int64_t cap =
      static_cast<std::int64_t>(settings.retry_factor) * static_cast<std::int64_t>(m);
  std::unordered_set<std::int64_t> in_batch;
  std::vector<char> mutate(static_cast<std::size_t>(d));

  while (static_cast<int>(batch.points.size()) < m && batch.attempts < cap) {
    ++batch.attempts;
    const auto i1 = static_cast<std::size_t>(rng.pick_weighted(fitness));
    const auto i2 = static_cast<std::size_t>(rng.pick_weighted(fitness));
    Point child = data[i1].point;
    if (d >= 2) {
      const auto cut = 1 + rng.next_below(d - 1);
      const auto tail = d - cut;
      child.tail(tail) = data[i2].point.tail(tail);
    }

    for (int j = 0; j < d; ++j) mutate[static_cast<std::size_t>(j)] = rng.next_double() < p_mut;

    for (const auto& [pr, table] : weights.joint) {
      const auto a = static_cast<std::size_t>(pr.first);
      const auto b = static_cast<std::size_t>(pr.second);
      if (!mutate[a] || !mutate[b]) continue;
      const Eigen::Map<const Eigen::VectorXd> flat(table.data(), table.size());
      const int pick = rng.pick_weighted(flat);
      const auto row = pick % table.rows();  // column-major flattening
      const auto col = pick / table.rows();
      child[pr.first] = space.levels(pr.first)[static_cast<std::size_t>(row)];
      child[pr.second] = space.levels(pr.second)[static_cast<std::size_t>(col)];
      mutate[a] = 0;
      mutate[b] = 0;
    }
    for (int j = 0; j < d; ++j) {
      if (!mutate[static_cast<std::size_t>(j)]) continue;
      const int level = rng.pick_weighted(weights.marginal[static_cast<std::size_t>(j)]);
      child[j] = space.levels(j)[static_cast<std::size_t>(level)];
    }

    const std::int64_t idx = space.index_of(child);
    if (idx < 0) continue;
    if (is_forbidden(fa, child)) continue;
    if (exclude.count(idx) || in_batch.count(idx)) continue;
    in_batch.insert(idx);
    batch.points.push_back(std::move(child));
  }
  batch.shortfall = m - static_cast<int>(batch.points.size());
  return batch;
}

}  // namespace gselc
