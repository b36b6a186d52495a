#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace sfw {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream id reserved for draws made by the server (shared coins).
inline constexpr std::uint64_t kServerStream = 0xffffffffULL;

/// Counter-based random stream. The state is a hash of
/// (seed, worker, iteration, lane), so a stream can be rebuilt anywhere without
/// replaying earlier draws and results never depend on evaluation order.
/// All derived draws (uniform reals, bounded integers, subsets) are computed
/// here from raw 64-bit words, never through <random> distributions, whose
/// output is implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t worker, std::uint64_t iteration,
            std::uint64_t lane = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(worker + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ splitmix64(iteration + 0x85157af5ULL));
    h = splitmix64(h ^ splitmix64(lane + 0x1d8e4e27c47d124fULL));
    state_ = h;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform on {0, ..., n-1}; rejection sampling keeps it exactly uniform.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
  }

  // Uniform size-k subset of {0, ..., n-1}, sorted ascending (Floyd's algorithm).
  std::vector<std::size_t> subset(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("subset: k > n");
    std::vector<std::size_t> out;
    out.reserve(k);
    if (k == n) {
      for (std::size_t i = 0; i < n; ++i) out.push_back(i);
      return out;
    }
    std::unordered_set<std::size_t> chosen;
    for (std::size_t j = n - k; j < n; ++j) {
      const std::size_t t = uniform_index(j + 1);
      if (chosen.insert(t).second) {
        out.push_back(t);
      } else {
        chosen.insert(j);
        out.push_back(j);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::uint64_t state_;
};

}  // namespace sfw
