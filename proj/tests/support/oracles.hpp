#pragma once
// Brute-force reference implementations shared by the unit and acceptance
// tests. Deliberately naive: no binning, no incremental sums.

#include <Eigen/Dense>

#include <cstddef>
#include <iterator>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "driftboost/dataset.hpp"
#include "driftboost/tree.hpp"

namespace driftboost::testing {

struct SplitOracle {
  std::size_t feature;
  double gain;
  double lo;  // largest value going left
  double hi;  // smallest value going right
};

// Every feature, every pair of consecutive distinct values, gain from the
// closed form in long double.
inline std::optional<SplitOracle> brute_force_split(const std::vector<double>& g, const std::vector<double>& h,
                                                    const FeatureMatrix& x, double l2, double gamma,
                                                    double min_child_hess) {
  std::optional<SplitOracle> best;
  const auto n = static_cast<std::size_t>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::set<double> values;
    for (std::size_t i = 0; i < n; ++i) values.insert(x(static_cast<Eigen::Index>(i), j));
    for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
      long double gl = 0, hl = 0, gr = 0, hr = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (x(static_cast<Eigen::Index>(i), j) <= *it) {
          gl += g[i];
          hl += h[i];
        } else {
          gr += g[i];
          hr += h[i];
        }
      }
      if (hl < min_child_hess || hr < min_child_hess) continue;
      const long double gain =
          0.5L * (gl * gl / (hl + l2) + gr * gr / (hr + l2) - (gl + gr) * (gl + gr) / (hl + hr + l2)) - gamma;
      if (gain <= 0) continue;
      if (!best || gain > best->gain + 1e-12) {
        best = SplitOracle{static_cast<std::size_t>(j), static_cast<double>(gain), *it, *std::next(it)};
      }
    }
  }
  return best;
}

// Per node of `t`: squared error of the rows reaching it around their own mean.
inline std::vector<double> node_sse(const RegressionTree& t, const Dataset& ds) {
  std::vector<std::vector<double>> ys(t.nodes().size());
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    std::size_t k = 0;
    while (true) {
      ys[k].push_back(ds.target()(i));
      const auto& nd = t.node(k);
      if (nd.is_leaf()) break;
      k = static_cast<std::size_t>(ds.features()(i, nd.feature) <= nd.threshold ? nd.left : nd.right);
    }
  }
  std::vector<double> out(ys.size(), 0.0);
  for (std::size_t k = 0; k < ys.size(); ++k) {
    double m = 0;
    for (double y : ys[k]) m += y;
    m /= static_cast<double>(ys[k].size());
    for (double y : ys[k]) out[k] += (y - m) * (y - m);
  }
  return out;
}

// Every subtree obtained by collapsing internal nodes, as its set of leaves
// (original node ids).
inline std::vector<std::vector<std::size_t>> all_prunings(const RegressionTree& t, std::size_t k = 0) {
  std::vector<std::vector<std::size_t>> out = {{k}};
  const auto& nd = t.node(k);
  if (nd.is_leaf()) return out;
  for (const auto& l : all_prunings(t, static_cast<std::size_t>(nd.left))) {
    for (const auto& r : all_prunings(t, static_cast<std::size_t>(nd.right))) {
      auto both = l;
      both.insert(both.end(), r.begin(), r.end());
      out.push_back(std::move(both));
    }
  }
  return out;
}

// Original internal nodes kept by a pruned tree, found by walking both trees.
// Empty optional when `pruned` is not a pruning of `original`.
inline std::optional<std::set<std::size_t>> kept_internal(const RegressionTree& original,
                                                          const RegressionTree& pruned) {
  std::set<std::size_t> kept;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, 0}};
  while (!stack.empty()) {
    auto [o, p] = stack.back();
    stack.pop_back();
    const auto& pn = pruned.node(p);
    if (pn.is_leaf()) continue;
    const auto& on = original.node(o);
    if (on.is_leaf() || on.feature != pn.feature || on.threshold != pn.threshold) return std::nullopt;
    kept.insert(o);
    stack.push_back({static_cast<std::size_t>(on.left), static_cast<std::size_t>(pn.left)});
    stack.push_back({static_cast<std::size_t>(on.right), static_cast<std::size_t>(pn.right)});
  }
  return kept;
}

}  // namespace driftboost::testing
