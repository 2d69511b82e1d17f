#pragma once

#include <cstdint>
#include <random>

namespace itree {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One independent random stream. Streams are derived from a master seed and
// an arbitrary number of indices so parallel and serial execution see the
// same draws.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  static RngStream derive(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (a * 0x9e3779b97f4a7c15ULL));
    s = splitmix64(s ^ (b * 0xd1b54a32d192ed03ULL));
    s = splitmix64(s ^ (c * 0x8cb92ba72f3d8dd7ULL));
    return RngStream(s);
  }

  double uniform() { return unif_(eng_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unif_(eng_); }
  double normal() { return norm_(eng_); }
  double gamma(double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(eng_);
  }
  std::uint64_t integer() { return eng_(); }
  std::size_t index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(eng_);
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace itree
