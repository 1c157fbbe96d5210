#pragma once

// Second-order regularized objective for squared loss boosting: leaf weights,
// structure score and split gain. Header-only and generic over the scalar type
// so the same kernels serve double training code and extended-precision
// oracles in tests.

#include <cmath>
#include <span>
#include <string>

#include "driftboost/error.hpp"

namespace driftboost {

template <typename Scalar>
struct LeafSums {
  Scalar grad_sum{};
  Scalar hess_sum{};
};

// Minimizer of G w + (H + l2) w^2 / 2, i.e. -G / (H + l2).
template <typename Scalar>
Scalar leaf_weight(Scalar grad_sum, Scalar hess_sum, Scalar l2) {
  const Scalar denom = hess_sum + l2;
  if (!(denom > Scalar(0))) {
    throw InvalidArgument("leaf_weight: hessian sum + l2 must be positive");
  }
  return -grad_sum / denom;
}

// Per-leaf objective G w + (H + l2) w^2 / 2 at a given weight.
template <typename Scalar>
Scalar leaf_objective(Scalar grad_sum, Scalar hess_sum, Scalar l2, Scalar weight) {
  return grad_sum * weight + Scalar(0.5) * (hess_sum + l2) * weight * weight;
}

// -1/2 sum_j G_j^2 / (H_j + l2) + gamma T. Lower is better.
template <typename Scalar>
Scalar structure_score(std::span<const LeafSums<Scalar>> leaves, Scalar l2, Scalar gamma) {
  if (leaves.empty()) {
    throw InvalidArgument("structure_score: at least one leaf required");
  }
  Scalar total{};
  for (const auto& leaf : leaves) {
    const Scalar denom = leaf.hess_sum + l2;
    if (!(denom > Scalar(0)) || !std::isfinite(leaf.grad_sum)) {
      throw InvalidArgument("structure_score: invalid leaf sums");
    }
    total += leaf.grad_sum * leaf.grad_sum / denom;
  }
  return Scalar(-0.5) * total + gamma * static_cast<Scalar>(leaves.size());
}

// Reduction in structure score from splitting one leaf, net of gamma.
template <typename Scalar>
Scalar split_gain(Scalar grad_left, Scalar hess_left, Scalar grad_right, Scalar hess_right, Scalar l2,
                  Scalar gamma) {
  const Scalar dl = hess_left + l2;
  const Scalar dr = hess_right + l2;
  const Scalar dp = hess_left + hess_right + l2;
  if (!(dl > Scalar(0)) || !(dr > Scalar(0)) || !(dp > Scalar(0))) {
    throw InvalidArgument("split_gain: hessian sums + l2 must be positive");
  }
  const Scalar grad_parent = grad_left + grad_right;
  return Scalar(0.5) * (grad_left * grad_left / dl + grad_right * grad_right / dr -
                        grad_parent * grad_parent / dp) -
         gamma;
}

// Whether `candidate` beats `incumbent` by more than rounding noise. Gains of
// equal partitions reached through different summation orders can differ in
// the last bits; such near-ties keep the incumbent so that the documented
// tie-break order (lowest feature, smallest threshold, earliest node) decides.
template <typename Scalar>
bool beats(Scalar candidate, Scalar incumbent) {
  using std::abs;
  const Scalar scale = abs(incumbent) > Scalar(1) ? abs(incumbent) : Scalar(1);
  return candidate > incumbent + Scalar(1e-12) * scale;
}

}  // namespace driftboost
