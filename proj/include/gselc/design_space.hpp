#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gselc/rng.hpp"

namespace gselc {

// One design: a row vector of factor settings.
using Point = Eigen::RowVectorXd;

struct Observation {
  Point point;
  double y = 0.0;
};

// Ordered collection of observations with unique points and finite responses.
class Dataset {
 public:
  Dataset() = default;

  void add(const Point& point, double y);
  void add(const Observation& obs) { add(obs.point, obs.y); }

  std::size_t size() const { return obs_.size(); }
  bool empty() const { return obs_.empty(); }
  const Observation& operator[](std::size_t i) const { return obs_[i]; }
  const std::vector<Observation>& all() const { return obs_; }

  bool contains(const Point& p) const;

  // n x d matrix of points (row i = observation i) and the response vector.
  Eigen::MatrixXd points_matrix() const;
  Eigen::VectorXd responses() const;

  double max_response() const;
  double min_response() const;
  // Index of the first observation attaining the maximum response.
  std::size_t argmax_response() const;

 private:
  std::vector<Observation> obs_;
  std::unordered_map<std::string, std::size_t> index_;  // keyed on exact byte pattern
  static std::string key_of(const Point& p);
};

// Finite candidate library over d discrete factors. Each factor has an
// explicit ordered list of admissible numeric levels; the library is either
// the full cross product of those levels or an explicit subset of it.
class DesignSpace {
 public:
  // Full factorial library over the given per-factor level values.
  explicit DesignSpace(std::vector<std::vector<double>> levels,
                       std::vector<std::string> names = {});

  // Library restricted to an explicit list of candidate points (each row must
  // be a point of the full factorial over `levels`; rows must be distinct).
  DesignSpace(std::vector<std::vector<double>> levels, Eigen::MatrixXd candidates,
              std::vector<std::string> names = {});

  // Convenience: factor j has integer levels 1..counts[j].
  static DesignSpace grid(const std::vector<int>& counts, std::vector<std::string> names = {});

  int dims() const { return static_cast<int>(levels_.size()); }
  std::int64_t size() const { return size_; }  // number of candidates M
  bool has_explicit_candidates() const { return explicit_; }

  const std::vector<double>& levels(int factor) const { return levels_.at(static_cast<std::size_t>(factor)); }
  int level_count(int factor) const { return static_cast<int>(levels(factor).size()); }
  const std::vector<std::string>& factor_names() const { return names_; }

  // Position of `value` in factor's level list, or -1 if not admissible.
  // Matching is exact: levels are canonical values, not measurements.
  int level_index(int factor, double value) const;

  // Candidate by library index (row-major over level indices for factorial
  // spaces; row order for explicit candidate lists).
  Point candidate(std::int64_t index) const;

  // Library index of a point, or -1 if the point is not a candidate.
  std::int64_t index_of(const Point& p) const;
  bool contains(const Point& p) const { return index_of(p) >= 0; }

  // All candidates as an M x d matrix, in index order. Guards against
  // accidental materialization of oversized libraries.
  static constexpr std::int64_t kDefaultEnumerationCap = 10'000'000;
  Eigen::MatrixXd enumerate(std::int64_t cap = kDefaultEnumerationCap) const;

 private:
  std::vector<std::vector<double>> levels_;
  std::vector<std::string> names_;
  std::vector<std::unordered_map<double, int>> level_lookup_;
  std::vector<std::int64_t> strides_;  // row-major strides of the full factorial
  std::int64_t full_size_ = 0;         // size of the full factorial
  bool explicit_ = false;
  Eigen::MatrixXd candidates_;                                   // explicit rows
  std::unordered_map<std::int64_t, std::int64_t> explicit_index_;  // full-grid index -> row
  std::int64_t size_ = 0;

  void init_levels(std::vector<std::vector<double>> levels, std::vector<std::string> names);
  std::int64_t full_grid_index(const Point& p) const;  // -1 if off the factorial
};

// Euclidean distance between two settings vectors.
double distance(const Point& a, const Point& b);

// Covering radius of a design: max over candidates of the distance to the
// nearest design point.
double covering_radius(const Eigen::MatrixXd& candidates, const std::vector<Point>& design);

// Space-filling initial design: random n0-subset refined by greedy point
// exchange that only accepts swaps strictly reducing the covering radius.
// Deterministic given the rng state. Requires 1 <= n0 <= space.size() and a
// library small enough to enumerate.
std::vector<Point> minimax_design(const DesignSpace& space, int n0, Rng& rng,
                                  int max_exchanges = 200);

// Cyclic relabeling of one factor's levels: level index i (0-based) maps to
// index (i + shift) mod L. Returned vector maps old level index -> new level
// index.
std::vector<int> relabel_map(int level_count, int shift);

Point relabel_point(const Point& p, const DesignSpace& space, int factor,
                    const std::vector<int>& map);

}  // namespace gselc
