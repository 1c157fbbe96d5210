#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "driftboost/dataset.hpp"
#include "driftboost/histogram.hpp"
#include "driftboost/objective.hpp"
#include "driftboost/tree.hpp"

namespace driftboost {

struct GradHess {
  Vector grads;
  Vector hessians;
};

// Squared loss l = (y - y_hat)^2 / 2: g = y_hat - y, h = 1.
GradHess squared_loss_grad_hess(const Vector& y, const Vector& y_hat);

// Gradient-based one-side sampling.
struct GossParams {
  double top_rate = 0.2;    // a: fraction kept by largest |g|
  double other_rate = 0.1;  // b: fraction sampled from the remainder
};

struct GossSample {
  std::vector<std::uint32_t> indices;  // ascending row ids
  std::vector<double> weights;         // aligned with indices
  std::size_t top_count = 0;           // |A|
};

// A = the ceil(a n) rows with largest |g| (ties to the lower row id);
// B = ceil(b (n - |A|)) rows drawn uniformly without replacement from the
// rest. Weights are 1 on A and (1 - a) / b on B.
GossSample goss_sample(std::span<const double> grads, double top_rate, double other_rate, std::uint64_t seed);

enum class GrowthPolicy { LeafWise, DepthWise };

struct GbdtParams {
  std::size_t num_rounds = 100;
  double learning_rate = 0.1;
  std::size_t num_leaves = 31;
  std::optional<int> max_depth;
  double l2_reg = 0.0;
  double min_split_gain = 0.0;
  std::size_t max_bins = 255;
  double min_child_hess = 1e-3;
  std::size_t min_data_in_leaf = 1;
  std::optional<GossParams> goss;
  std::uint64_t seed = 0;
  GrowthPolicy growth = GrowthPolicy::LeafWise;

  // Throws InvalidArgument on any violated constraint.
  void validate() const;
};

struct ResidualBoostingParams {
  std::size_t num_rounds = 100;
  double learning_rate = 0.1;
  CartParams tree;
  double ccp_alpha = 0.0;

  void validate() const;
};

// base_score + learning_rate * sum of tree outputs.
struct Ensemble {
  double base_score = 0.0;
  double learning_rate = 1.0;
  std::vector<RegressionTree> trees;
  std::variant<GbdtParams, ResidualBoostingParams> params;
  std::size_t num_features = 0;
};

// Boosting on residuals with CART trees: start from f = 0, each round fits
// a (optionally pruned) tree to the current residuals and adds it with
// shrinkage.
Ensemble fit_residual_boosting(const Dataset& ds, const ResidualBoostingParams& params);

// Reported for every split taken while growing a GBDT tree.
struct GrowthEvent {
  std::size_t round = 0;
  std::size_t leaf = 0;  // node index in the tree under construction
  int depth = 0;
  LeafSums<double> parent;
  SplitCandidate split;
  // Best gains of every other leaf that had an admissible split at this step.
  std::vector<double> competing_gains;
};

using GrowthObserver = std::function<void(const GrowthEvent&)>;

// Second-order regularized boosting with histogram split finding.
// base_score = mean(y). Each round: gradients at the current predictions,
// optional GOSS reweighting, histograms over bin edges fixed before round 1,
// then growth by repeatedly splitting the leaf with the largest positive gain
// (or level by level for DepthWise) up to num_leaves. Leaf values are
// -G / (H + l2).
Ensemble fit_gbdt(const Dataset& ds, const GbdtParams& params, const GrowthObserver& observer = {});

double predict_row(const Ensemble& ens, Eigen::Ref<const Eigen::RowVectorXd> x);
Vector predict(const Ensemble& ens, const FeatureMatrix& x);

// (K + 1) x n; row t uses the first t trees, row 0 is the base score.
Eigen::MatrixXd staged_predict(const Ensemble& ens, const Dataset& ds);
Eigen::MatrixXd staged_predict(const Ensemble& ens, const FeatureMatrix& x);

// sum_i (y_i - y_hat_i)^2 / 2 + sum_trees (gamma T + l2/2 sum_j w_j^2).
double regularized_objective(const Vector& y, const Vector& y_hat,
                             const std::vector<std::vector<double>>& tree_leaf_weights, double l2, double gamma);

nlohmann::json ensemble_to_json(const Ensemble& ens);
Ensemble ensemble_from_json(const nlohmann::json& j);

nlohmann::json gbdt_params_to_json(const GbdtParams& p);
GbdtParams gbdt_params_from_json(const nlohmann::json& j);

}  // namespace driftboost
