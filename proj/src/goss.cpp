#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftboost/boosting.hpp"
#include "driftboost/error.hpp"
#include "driftboost/random.hpp"

namespace driftboost {

namespace {

// ceil(fraction * n), ignoring representation error of the product.
std::size_t ceil_fraction(double fraction, std::size_t n) {
  const double x = fraction * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

}  // namespace

GossSample goss_sample(std::span<const double> grads, double top_rate, double other_rate, std::uint64_t seed) {
  if (!(top_rate >= 0.0 && other_rate >= 0.0 && top_rate + other_rate <= 1.0 + 1e-12)) {
    throw InvalidArgument("goss: need a >= 0, b >= 0 and a + b <= 1");
  }
  if (other_rate == 0.0 && top_rate < 1.0) {
    throw InvalidArgument("goss: b = 0 with a < 1 would drop every low-gradient row");
  }
  const std::size_t n = grads.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t i, std::uint32_t j) { return std::abs(grads[i]) > std::abs(grads[j]); });

  const std::size_t top = std::min(n, ceil_fraction(top_rate, n));
  const std::size_t rest = n - top;
  const std::size_t other = std::min(rest, other_rate > 0.0 ? ceil_fraction(other_rate, rest) : 0);

  std::vector<std::pair<std::uint32_t, double>> chosen;
  chosen.reserve(top + other);
  for (std::size_t i = 0; i < top; ++i) {
    chosen.emplace_back(order[i], 1.0);
  }
  if (other > 0) {
    std::vector<std::uint32_t> remainder(order.begin() + static_cast<std::ptrdiff_t>(top), order.end());
    std::sort(remainder.begin(), remainder.end());
    const double weight = (1.0 - top_rate) / other_rate;
    Rng rng(seed);
    for (auto pos : rng.sample_without_replacement(rest, other)) {
      chosen.emplace_back(remainder[pos], weight);
    }
  }
  std::sort(chosen.begin(), chosen.end());

  GossSample sample;
  sample.top_count = top;
  sample.indices.reserve(chosen.size());
  sample.weights.reserve(chosen.size());
  for (const auto& [row, w] : chosen) {
    sample.indices.push_back(row);
    sample.weights.push_back(w);
  }
  return sample;
}

}  // namespace driftboost
