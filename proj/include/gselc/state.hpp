#pragma once

#include <string>

#include "gselc/orchestrator.hpp"

namespace gselc {

inline constexpr int kStateFormatVersion = 1;

// Serialize a RunState to JSON text (used both for files and for determinism
// comparisons). Doubles round-trip exactly; NaN is encoded as null.
std::string state_to_json(const RunState& state);
RunState state_from_json(const std::string& text);

/// Atomic save: write to <path>.tmp then rename over <path>.
void save_state(const std::string& path, const RunState& state);

// Load with format-version check; malformed or mismatched files raise
// StateError.
RunState load_state(const std::string& path);

// User-facing campaign configuration file (JSON). Space given either as
//   "grid": [5, 34, 241]               (integer levels 1..L per factor)
// or
//   "factors": [{"name": "A", "levels": [1, 2, 4]}, ...]
// with optional "names" for the grid form, an optional "candidates_csv"
// restricting the library to explicit rows, plus campaign keys (n0, batch,
// budget, mode, seed) and tuning overrides. Relative CSV paths resolve
// against the config file's directory.
RunConfig load_run_config(const std::string& path);

/// Exclusive advisory lock: creates <state_path>.lock, failing if it already
// exists; the destructor removes it. Guards against concurrent CLI calls on
// one state file.
class StateLock {
 public:
  explicit StateLock(const std::string& state_path);
  ~StateLock();
  StateLock(const StateLock&) = delete;
  StateLock& operator=(const StateLock&) = delete;

 private:
  std::string lock_path_;
};

}  // namespace gselc
