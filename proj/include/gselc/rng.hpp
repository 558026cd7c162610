#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gselc {

// Deterministic random source. All integer and real draws are implemented
// here rather than through std:: distributions, whose outputs are
// implementation-defined; this keeps replays bit-exact across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Unbiased via rejection sampling.
  std::int64_t next_below(std::int64_t n) {
    if (n <= 0) throw std::invalid_argument("Rng::next_below: n must be positive");
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = kMax - kMax % un;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return static_cast<std::int64_t>(x % un);
  }

  // Uniform in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // k distinct indices from [0, n), in draw order. Partial Fisher-Yates over a
  // sparse map, so n may be large (no O(n) allocation).
  std::vector<std::int64_t> sample_indices(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) throw std::invalid_argument("Rng::sample_indices: need 0 <= k <= n");
    std::unordered_map<std::int64_t, std::int64_t> moved;
    auto at = [&moved](std::int64_t t) {
      auto it = moved.find(t);
      return it == moved.end() ? t : it->second;
    };
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(k));
    for (std::int64_t i = 0; i < k; ++i) {
      const std::int64_t j = i + next_below(n - i);
      out.push_back(at(j));
      moved[j] = at(i);
    }
    return out;
  }

  // Index drawn with probability proportional to nonnegative weights.
  int pick_weighted(const Eigen::VectorXd& w) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w[i] < 0.0 || !std::isfinite(w[i]))
        throw std::invalid_argument("Rng::pick_weighted: weights must be finite and nonnegative");
      total += w[i];
    }
    if (!(total > 0.0)) throw std::invalid_argument("Rng::pick_weighted: total weight must be positive");
    const double u = next_double() * total;
    double acc = 0.0;
    int last = -1;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      last = static_cast<int>(i);
      acc += w[i];
      if (u < acc) return last;
    }
    return last;  // u fell in the rounding tail of the cumulative sum
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(next_below(static_cast<std::int64_t>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Engine state as a portable decimal string (std::mt19937_64 stream format).
  std::string serialize() const {
    std::ostringstream os;
    os << gen_;
    return os.str();
  }

  static Rng deserialize(const std::string& text) {
    Rng r(0);
    std::istringstream is(text);
    is >> r.gen_;
    if (!is) throw std::runtime_error("Rng::deserialize: malformed state string");
    return r;
  }

  bool operator==(const Rng& other) const { return gen_ == other.gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gselc
