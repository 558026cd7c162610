#include "gselc/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace gselc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Entering candidates inspected per exchange step, nearest to the
// worst-covered point first. Only candidates inside the current radius of
// that point can reduce it, so a short, closest-first list suffices.
constexpr int kShortlistCap = 48;
constexpr int kMinimaxRestarts = 4;
}  // namespace

std::string Dataset::key_of(const Point& p) {
  std::string key;
  key.resize(static_cast<std::size_t>(p.size()) * sizeof(double));
  std::memcpy(key.data(), p.data(), key.size());
  return key;
}

void Dataset::add(const Point& point, double y) {
  if (point.size() == 0) throw std::invalid_argument("Dataset::add: empty point");
  if (!obs_.empty() && point.size() != obs_.front().point.size())
    throw std::invalid_argument("Dataset::add: dimension mismatch");
  if (!std::isfinite(y)) throw std::invalid_argument("Dataset::add: response must be finite");
  for (Eigen::Index j = 0; j < point.size(); ++j)
    if (!std::isfinite(point[j])) throw std::invalid_argument("Dataset::add: point must be finite");
  auto [it, inserted] = index_.emplace(key_of(point), obs_.size());
  if (!inserted) throw std::invalid_argument("Dataset::add: duplicate point");
  obs_.push_back({point, y});
}

bool Dataset::contains(const Point& p) const { return index_.count(key_of(p)) > 0; }

Eigen::MatrixXd Dataset::points_matrix() const {
  if (obs_.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(obs_.size()), obs_.front().point.size());
  for (std::size_t i = 0; i < obs_.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = obs_[i].point;
  return m;
}

Eigen::VectorXd Dataset::responses() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(obs_.size()));
  for (std::size_t i = 0; i < obs_.size(); ++i) y[static_cast<Eigen::Index>(i)] = obs_[i].y;
  return y;
}

double Dataset::max_response() const {
  if (obs_.empty()) throw std::logic_error("Dataset::max_response: empty dataset");
  return obs_[argmax_response()].y;
}

double Dataset::min_response() const {
  if (obs_.empty()) throw std::logic_error("Dataset::min_response: empty dataset");
  double m = obs_.front().y;
  for (const auto& o : obs_) m = std::min(m, o.y);
  return m;
}

std::size_t Dataset::argmax_response() const {
  if (obs_.empty()) throw std::logic_error("Dataset::argmax_response: empty dataset");
  std::size_t best = 0;
  for (std::size_t i = 1; i < obs_.size(); ++i)
    if (obs_[i].y > obs_[best].y) best = i;
  return best;
}

void DesignSpace::init_levels(std::vector<std::vector<double>> levels, std::vector<std::string> names) {
  if (levels.empty()) throw std::invalid_argument("DesignSpace: need at least one factor");
  if (!names.empty() && names.size() != levels.size())
    throw std::invalid_argument("DesignSpace: one name per factor required");
  if (names.empty()) {
    names.reserve(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j) names.push_back("x" + std::to_string(j + 1));
  }
  levels_ = std::move(levels);
  names_ = std::move(names);
  level_lookup_.resize(levels_.size());
  for (std::size_t j = 0; j < levels_.size(); ++j) {
    if (levels_[j].empty()) throw std::invalid_argument("DesignSpace: factor with no levels");
    for (std::size_t i = 0; i < levels_[j].size(); ++i) {
      const double v = levels_[j][i];
      if (!std::isfinite(v)) throw std::invalid_argument("DesignSpace: level values must be finite");
      auto [it, inserted] = level_lookup_[j].emplace(v, static_cast<int>(i));
      if (!inserted) throw std::invalid_argument("DesignSpace: duplicate level value in a factor");
    }
  }
  strides_.assign(levels_.size(), 1);
  full_size_ = 1;
  for (std::size_t j = levels_.size(); j-- > 0;) {
    strides_[j] = full_size_;
    const auto count = static_cast<std::int64_t>(levels_[j].size());
    if (full_size_ > std::numeric_limits<std::int64_t>::max() / count)
      throw std::invalid_argument("DesignSpace: factorial size overflows");
    full_size_ *= count;
  }
}

DesignSpace::DesignSpace(std::vector<std::vector<double>> levels, std::vector<std::string> names) {
  init_levels(std::move(levels), std::move(names));
  explicit_ = false;
  size_ = full_size_;
}

DesignSpace::DesignSpace(std::vector<std::vector<double>> levels, Eigen::MatrixXd candidates,
                         std::vector<std::string> names) {
  init_levels(std::move(levels), std::move(names));
  if (candidates.rows() == 0) throw std::invalid_argument("DesignSpace: empty candidate list");
  if (candidates.cols() != dims())
    throw std::invalid_argument("DesignSpace: candidate columns must match factor count");
  explicit_ = true;
  candidates_ = std::move(candidates);
  explicit_index_.reserve(static_cast<std::size_t>(candidates_.rows()));
  for (Eigen::Index r = 0; r < candidates_.rows(); ++r) {
    const std::int64_t g = full_grid_index(candidates_.row(r));
    if (g < 0)
      throw std::invalid_argument("DesignSpace: candidate row " + std::to_string(r) +
                                  " uses a value that is not an admissible level");
    auto [it, inserted] = explicit_index_.emplace(g, r);
    if (!inserted)
      throw std::invalid_argument("DesignSpace: duplicate candidate row " + std::to_string(r));
  }
  size_ = candidates_.rows();
}

DesignSpace DesignSpace::grid(const std::vector<int>& counts, std::vector<std::string> names) {
  std::vector<std::vector<double>> levels;
  levels.reserve(counts.size());
  for (int c : counts) {
    if (c < 1) throw std::invalid_argument("DesignSpace::grid: each factor needs >= 1 level");
    std::vector<double> lv(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) lv[static_cast<std::size_t>(i)] = i + 1;
    levels.push_back(std::move(lv));
  }
  return DesignSpace(std::move(levels), std::move(names));
}

int DesignSpace::level_index(int factor, double value) const {
  const auto& lookup = level_lookup_.at(static_cast<std::size_t>(factor));
  auto it = lookup.find(value);
  return it == lookup.end() ? -1 : it->second;
}

std::int64_t DesignSpace::full_grid_index(const Point& p) const {
  if (p.size() != dims()) return -1;
  std::int64_t idx = 0;
  for (int j = 0; j < dims(); ++j) {
    const int li = level_index(j, p[j]);
    if (li < 0) return -1;
    idx += strides_[static_cast<std::size_t>(j)] * li;
  }
  return idx;
}

Point DesignSpace::candidate(std::int64_t index) const {
  if (index < 0 || index >= size_) throw std::out_of_range("DesignSpace::candidate: index out of range");
  if (explicit_) return candidates_.row(index);
  Point p(dims());
  for (int j = 0; j < dims(); ++j) {
    const auto li = (index / strides_[static_cast<std::size_t>(j)]) %
                    static_cast<std::int64_t>(levels_[static_cast<std::size_t>(j)].size());
    p[j] = levels_[static_cast<std::size_t>(j)][static_cast<std::size_t>(li)];
  }
  return p;
}

std::int64_t DesignSpace::index_of(const Point& p) const {
  const std::int64_t g = full_grid_index(p);
  if (g < 0) return -1;
  if (!explicit_) return g;
  auto it = explicit_index_.find(g);
  return it == explicit_index_.end() ? -1 : it->second;
}

Eigen::MatrixXd DesignSpace::enumerate(std::int64_t cap) const {
  if (size_ > cap)
    throw std::length_error("DesignSpace::enumerate: library size " + std::to_string(size_) +
                            " exceeds cap " + std::to_string(cap));
  if (explicit_) return candidates_;
  Eigen::MatrixXd m(size_, dims());
  for (std::int64_t i = 0; i < size_; ++i) m.row(i) = candidate(i);
  return m;
}

double distance(const Point& a, const Point& b) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  return (a - b).norm();
}

double covering_radius(const Eigen::MatrixXd& candidates, const std::vector<Point>& design) {
  if (design.empty()) return kInf;
  double radius = 0.0;
  for (Eigen::Index x = 0; x < candidates.rows(); ++x) {
    double nearest = kInf;
    for (const auto& p : design) nearest = std::min(nearest, (candidates.row(x) - p).norm());
    radius = std::max(radius, nearest);
  }
  return radius;
}

std::vector<Point> minimax_design(const DesignSpace& space, int n0, Rng& rng, int max_exchanges) {
  const std::int64_t M = space.size();
  if (n0 < 1 || n0 > M) throw std::invalid_argument("minimax_design: need 1 <= n0 <= library size");
  const Eigen::MatrixXd cand = space.enumerate();
  const auto n = static_cast<std::size_t>(n0);

  // The exchange step accepts single swaps only, which can stall in a poor
  // local optimum; independent restarts make that practically harmless.
  std::vector<std::int64_t> overall_design;
  double overall_radius = kInf;

  for (int restart = 0; restart < kMinimaxRestarts && overall_radius > 0.0; ++restart) {
    std::vector<std::int64_t> design = rng.sample_indices(M, n0);
    std::vector<char> in_design(static_cast<std::size_t>(M), 0);
    for (auto idx : design) in_design[static_cast<std::size_t>(idx)] = 1;

    Eigen::VectorXd d1(M), d2(M);
    std::vector<int> a1(static_cast<std::size_t>(M), -1);

    auto rebuild = [&]() {
      for (std::int64_t x = 0; x < M; ++x) {
        double best = kInf, second = kInf;
        int best_s = -1;
        for (std::size_t s = 0; s < n; ++s) {
          const double dd = (cand.row(x) - cand.row(design[s])).norm();
          if (dd < best) {
            second = best;
            best = dd;
            best_s = static_cast<int>(s);
          } else if (dd < second) {
            second = dd;
          }
        }
        d1[x] = best;
        d2[x] = second;
        a1[static_cast<std::size_t>(x)] = best_s;
      }
    };
    rebuild();

    for (int iter = 0; iter < max_exchanges; ++iter) {
      const double r_cur = d1.maxCoeff();
      if (r_cur <= 0.0) break;  // every candidate is a design point

      // Radius after removing each slot alone: combine the per-slot maxima of
      // d1 (points assigned elsewhere keep d1) with the per-slot maxima of d2.
      std::vector<double> slot_max_d1(n, 0.0), slot_max_d2(n, 0.0);
      for (std::int64_t x = 0; x < M; ++x) {
        const auto s = static_cast<std::size_t>(a1[static_cast<std::size_t>(x)]);
        slot_max_d1[s] = std::max(slot_max_d1[s], d1[x]);
        slot_max_d2[s] = std::max(slot_max_d2[s], d2[x]);
      }
      double g1 = -1.0, g2 = -1.0;
      std::size_t g1_slot = 0;
      for (std::size_t s = 0; s < n; ++s) {
        if (slot_max_d1[s] > g1) {
          g2 = g1;
          g1 = slot_max_d1[s];
          g1_slot = s;
        } else if (slot_max_d1[s] > g2) {
          g2 = slot_max_d1[s];
        }
      }
      std::size_t victim = 0;
      double victim_radius = kInf;
      for (std::size_t s = 0; s < n; ++s) {
        const double others = (s == g1_slot) ? std::max(g2, 0.0) : g1;
        const double r_wo = std::max(others, slot_max_d2[s]);
        if (r_wo < victim_radius) {
          victim_radius = r_wo;
          victim = s;
        }
      }

      // Coverage with the victim removed, and the point it leaves worst off.
      Eigen::VectorXd d1p(M);
      for (std::int64_t x = 0; x < M; ++x)
        d1p[x] = (a1[static_cast<std::size_t>(x)] == static_cast<int>(victim)) ? d2[x] : d1[x];
      std::int64_t worst = 0;
      d1p.maxCoeff(&worst);
      const double r_wo = d1p[worst];

      // Only candidates strictly inside r_wo of the worst-covered point can
      // shrink the radius there; inspect the closest few.
      std::vector<std::pair<double, std::int64_t>> shortlist;
      for (std::int64_t c = 0; c < M; ++c) {
        if (in_design[static_cast<std::size_t>(c)]) continue;
        const double dd = (cand.row(c) - cand.row(worst)).norm();
        if (dd < r_wo) shortlist.emplace_back(dd, c);
      }
      const auto keep = std::min<std::size_t>(shortlist.size(), kShortlistCap);
      std::partial_sort(shortlist.begin(), shortlist.begin() + static_cast<std::ptrdiff_t>(keep),
                        shortlist.end());
      shortlist.resize(keep);

      double best_radius = r_cur;
      std::int64_t entering = -1;
      for (const auto& [dd, c] : shortlist) {
        double r_new = 0.0;
        for (std::int64_t x = 0; x < M; ++x) {
          const double v = std::min(d1p[x], (cand.row(x) - cand.row(c)).norm());
          if (v > r_new) {
            r_new = v;
            if (v >= best_radius) break;
          }
        }
        if (r_new < best_radius) {
          best_radius = r_new;
          entering = c;
        }
      }
      if (entering < 0) break;  // no strictly improving exchange

      in_design[static_cast<std::size_t>(design[victim])] = 0;
      design[victim] = entering;
      in_design[static_cast<std::size_t>(entering)] = 1;
      rebuild();
    }

    const double radius = d1.maxCoeff();
    if (radius < overall_radius) {
      overall_radius = radius;
      overall_design = design;
    }
  }

  std::vector<Point> out;
  out.reserve(n);
  for (auto idx : overall_design) out.push_back(cand.row(idx));
  return out;
}

std::vector<int> relabel_map(int level_count, int shift) {
  if (level_count < 1) throw std::invalid_argument("relabel_map: need at least one level");
  std::vector<int> map(static_cast<std::size_t>(level_count));
  for (int i = 0; i < level_count; ++i) {
    const int m = ((i + shift) % level_count + level_count) % level_count;
    map[static_cast<std::size_t>(i)] = m;
  }
  return map;
}

Point relabel_point(const Point& p, const DesignSpace& space, int factor,
                    const std::vector<int>& map) {
  if (factor < 0 || factor >= space.dims()) throw std::invalid_argument("relabel_point: bad factor");
  if (map.size() != static_cast<std::size_t>(space.level_count(factor)))
    throw std::invalid_argument("relabel_point: map size must equal the level count");
  const int li = space.level_index(factor, p[factor]);
  if (li < 0) throw std::invalid_argument("relabel_point: value not an admissible level");
  Point out = p;
  out[factor] = space.levels(factor)[static_cast<std::size_t>(map[static_cast<std::size_t>(li)])];
  return out;
}

}  // namespace gselc
