#pragma once

#include <cmath>
#include <cstdint>

namespace polyreg {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based generator: the n-th draw of stream (seed, stream_id) is a pure
// function of (seed, stream_id, n), so parallel trials can carve out
// independent streams without sharing state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : key_(splitmix64(seed ^ splitmix64(stream_id * 0xd1b54a32d192ed03ULL))),
        counter_(0) {}

  std::uint64_t next_u64() { return splitmix64(key_ + 0x2545f4914f6cdd1dULL * ++counter_); }

  // uniform on [0,1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform on [lo,hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // index in [0,n)
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  double normal(double mean = 0.0, double stddev = 1.0) {
    if (have_cached_) {
      have_cached_ = false;
      return mean + stddev * cached_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return mean + stddev * r * std::cos(theta);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace polyreg
