#ifndef SEGTAG_RNG_HPP_
#define SEGTAG_RNG_HPP_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace segtag {

// Seeded generator with a fully specified output sequence: mt19937_64 is
// pinned by the standard, and the conversions below avoid the
// implementation-defined std distributions, so a seed replays identically
// on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (seed, a, b), e.g. (seed, epoch, sentence).
  static Rng Derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

  std::uint64_t NextU64() { return engine_(); }
  // Uniform on [0, 1) with 53 bits of precision.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
  std::uint64_t UniformInt(std::uint64_t n);
  bool Bernoulli(double p) { return Uniform() < p; }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[UniformInt(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace segtag

#endif  // SEGTAG_RNG_HPP_
