#pragma once

#include <stdexcept>

namespace gselc {

// Campaign bookkeeping violations: ingesting without a pending batch,
// proposing past the budget, corrupt or locked state files, and the like.
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear-algebra breakdowns that survive every fallback (factorization
// failures, likelihood search collapse).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gselc
