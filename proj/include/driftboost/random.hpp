#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace driftboost {

// The single random source used across the library.
//
// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
// standard. The conversions to uniform reals, bounded integers and normals are
// implemented here rather than with <random> distributions, whose algorithms
// are implementation-defined. Together this makes every seeded result
// reproducible across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  // Standard normal via the Box-Muller transform (one variate per call).
  double normal();

  // `count` distinct values from [0, population), returned in ascending order.
  std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count);

 private:
  std::mt19937_64 engine_;
};

// Independent stream seed for (base, stream), e.g. per tree or per model.
// SplitMix64 finalizer over the combined words.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace driftboost
