#pragma once

#include <cstdint>
#include <map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gselc/design_space.hpp"
#include "gselc/rng.hpp"
#include "gselc/stats.hpp"

namespace gselc {

// Prohibited search patterns induced by weak runs: a point is forbidden when
// it matches any stored entry in at least `order` coordinates.
struct ForbiddenArray {
  std::vector<Point> entries;
  int strength = 1;  // worst runs absorbed per update
  int order = 0;     // coordinate matches required; 0 means d - 1 at first use
};

bool is_forbidden(const ForbiddenArray& fa, const Point& x);

// Add the `strength` worst observations of `batch` to the array (ties broken
// toward earlier observations; duplicates are not stored twice).
ForbiddenArray update_forbidden(const ForbiddenArray& fa, const std::vector<Observation>& batch);

struct SelcSettings {
  int strength = 1;
  int order = 0;              // 0 -> d - 1, resolved at run start
  double w0 = 0.25;           // baseline share of the mutation distribution
  double p_mut = 0.0;         // per-factor mutation probability; <= 0 -> 1/d
  int retry_factor = 50;      // offspring attempts allowed per requested point
  double significance_alpha = 0.05;
};

// Mutation distributions estimated from the data. Every factor always has a
// marginal distribution over its level indices (summing to 1); factors in a
// significant pair also get a joint table over level-index pairs.
struct MutationWeights {
  std::vector<Eigen::VectorXd> marginal;
  std::map<std::pair<int, int>, Eigen::MatrixXd> joint;
  std::vector<char> boosted;  // diagnostic: factor used a response-weighted marginal
};

// Builds the distributions: baseline mass w0 spread uniformly, the rest
// proportional to max(mean response at the level, 0). Factors with no
// significant effects stay uniform; significant pairs get the analogous
// two-way table, and their marginals are the table's row/column sums.
MutationWeights mutation_weights(const Dataset& data, const DesignSpace& space,
                                 const SelcSettings& settings);

struct SelcBatch {
  std::vector<Point> points;   // accepted offspring, in acceptance order
  int shortfall = 0;           // requested minus produced
  std::int64_t attempts = 0;   // offspring draws consumed
};

// Propose m new points by fitness-proportional selection, single-point
// crossover and weighted mutation. Offspring are rejected when off-library,
// forbidden, already in `exclude`, or already in the batch. Stops early after
// retry_factor * m failed attempts and reports the shortfall.
SelcBatch propose_selc_batch(const Dataset& data, const ForbiddenArray& fa,
                             const MutationWeights& weights, const DesignSpace& space, int m,
                             const std::unordered_set<std::int64_t>& exclude,
                             const SelcSettings& settings, Rng& rng);

}  // namespace gselc
