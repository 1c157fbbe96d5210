#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftboost/dataset.hpp"

namespace driftboost {

// One node of a binary regression tree, stored in a flat array. Leaves have
// feature == kLeaf. Every node carries its sample count and gradient/hessian
// sums; an internal node's sums equal the sums of its two children.
//
// Routing: x[feature] <= threshold goes left, otherwise right.
struct TreeNode {
  static constexpr int kLeaf = -1;

  int feature = kLeaf;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::size_t count = 0;
  double grad_sum = 0.0;
  double hess_sum = 0.0;
  int depth = 0;

  bool is_leaf() const { return feature == kLeaf; }
};

class RegressionTree {
 public:
  // Validates structure: node 0 is the root, children come after their
  // parent, every node except the root has exactly one parent.
  RegressionTree(std::vector<TreeNode> nodes, std::size_t num_features);

  static RegressionTree single_leaf(double value, std::size_t num_features, std::size_t count = 0,
                                    double grad_sum = 0.0, double hess_sum = 0.0);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(std::size_t i) const { return nodes_[i]; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t num_features() const { return num_features_; }
  std::size_t num_leaves() const { return num_leaves_; }
  int max_depth() const;

  // Index of the leaf a row routes to.
  std::size_t leaf_index(const double* row) const;
  double predict_row(const double* row) const { return nodes_[leaf_index(row)].value; }

  std::vector<double> leaf_values() const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t num_features_;
  std::size_t num_leaves_;
};

double predict_tree_row(const RegressionTree& tree, Eigen::Ref<const Eigen::RowVectorXd> x);
Vector predict_tree(const RegressionTree& tree, const FeatureMatrix& x);

struct CartParams {
  std::size_t max_leaves = std::numeric_limits<std::size_t>::max();
  std::size_t min_samples_leaf = 1;
  std::optional<int> max_depth;
};

// Per-split randomization used by forests. With `features_per_split` below
// the feature count, each split considers a fresh uniform feature subset; with
// `random_thresholds`, each candidate feature gets one threshold drawn
// uniformly between its minimum and maximum at the node.
struct SplitSampling {
  std::size_t features_per_split = 0;  // 0 means all
  bool random_thresholds = false;
  std::uint64_t seed = 0;
};

// Exact greedy least-squares CART. Leaves hold region means; splits maximize
// the reduction in the sum of squared errors over every feature and every
// midpoint between consecutive distinct values. Leaves are expanded best
// first (largest reduction, ties to the earliest node) until max_leaves is
// reached, no split reduces the error, a node is pure, or min_samples_leaf
// forbids every split.
RegressionTree fit_cart(const Dataset& ds, const CartParams& params);
RegressionTree fit_cart(const Dataset& ds, std::size_t max_leaves, std::size_t min_samples_leaf);

// Same on an explicit matrix/target. `rows` selects training rows and may
// contain repeats (bootstrap); empty means all rows once.
RegressionTree fit_cart(const FeatureMatrix& x, const Vector& y, const CartParams& params,
                        std::span<const std::size_t> rows = {}, const SplitSampling& sampling = {});

// Minimal cost-complexity subtree for Ca(T) = sum_m Q_m(T) + alpha |T|,
// where Q_m is the squared error of leaf m on `ds`. Weakest-link pruning;
// among equally weak links the shallowest node goes first, then the one with
// the lowest split feature. Collapsed nodes take the mean of their rows.
RegressionTree prune_ccp(const RegressionTree& tree, const Dataset& ds, double alpha);

// Ca(T) of a tree on a dataset (leaf errors around the dataset's leaf means).
double cost_complexity(const RegressionTree& tree, const Dataset& ds, double alpha);

// Versioned nested JSON: internal nodes {feature, threshold, left, right},
// leaves {value, n, grad_sum, hess_sum}.
nlohmann::json tree_to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const nlohmann::json& j);

}  // namespace driftboost
