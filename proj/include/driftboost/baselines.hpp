#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftboost/dataset.hpp"
#include "driftboost/error.hpp"
#include "driftboost/tree.hpp"

namespace driftboost {

// Per-column centering and scaling captured at fit time. Constant columns
// keep scale 1 so they standardize to exactly zero.
struct Standardizer {
  Eigen::RowVectorXd means;
  Eigen::RowVectorXd scales;

  static Standardizer fit(const FeatureMatrix& x);
  Eigen::MatrixXd transform(const FeatureMatrix& x) const;
  Eigen::RowVectorXd transform(Eigen::Ref<const Eigen::RowVectorXd> row) const;
};

// ---------------------------------------------------------------------------
// Linear models

enum class Penalty { None, L2, L1, Elastic };

struct Regularization {
  Penalty kind = Penalty::None;
  double l1 = 0.0;
  double l2 = 0.0;
};

// Coefficients and intercept are in original feature units.
struct LinearModel {
  Vector coefficients;
  double intercept = 0.0;
  Regularization regularization;
  Standardizer standardizer;
  std::size_t iterations = 0;  // coordinate descent sweeps (0 for closed forms)
};

class RankDeficientError : public Error {
 public:
  RankDeficientError(std::vector<std::string> columns, const std::string& what)
      : Error("rank_deficient", what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(LinearModel last, const std::string& what)
      : Error("no_convergence", what), last_(std::move(last)) {}
  const LinearModel& last_iterate() const { return last_; }

 private:
  LinearModel last_;
};

// Least squares via column-pivoted Householder QR on standardized features.
// Throws RankDeficientError naming the collinear columns.
LinearModel fit_ols(const Dataset& ds);

// Closed form (Z'Z + l2 I)^-1 Z'y on standardized Z, intercept unpenalized.
// l2 = 0 defers to fit_ols.
LinearModel fit_ridge(const Dataset& ds, double l2);

// Cyclic coordinate descent with soft-thresholding on standardized features,
// minimizing  (1/2n)|y - b0 - Z b|^2 + l1 |b|_1 + (l2/2) |b|^2.
// Converged when the largest coefficient change in a sweep is below tol.
LinearModel fit_elastic_net(const Dataset& ds, double l1, double l2, double tol = 1e-8,
                            std::size_t max_iter = 10000);

inline LinearModel fit_lasso(const Dataset& ds, double l1, double tol = 1e-8, std::size_t max_iter = 10000) {
  return fit_elastic_net(ds, l1, 0.0, tol, max_iter);
}

double predict_linear_row(const LinearModel& model, Eigen::Ref<const Eigen::RowVectorXd> x);
Vector predict_linear(const LinearModel& model, const FeatureMatrix& x);

// ---------------------------------------------------------------------------
// k nearest neighbours

struct KnnModel {
  std::size_t k = 5;
  Standardizer standardizer;
  Eigen::MatrixXd train;  // standardized training rows
  Vector target;
};

KnnModel fit_knn(const Dataset& ds, std::size_t k);

// Mean target of the k nearest rows by Euclidean distance in standardized
// space; equal distances go to the lower training row.
double predict_knn_row(const KnnModel& model, Eigen::Ref<const Eigen::RowVectorXd> x);
Vector predict_knn(const KnnModel& model, const FeatureMatrix& x);

// ---------------------------------------------------------------------------
// Forests

enum class ForestMode { RandomForest, ExtraTrees };

struct ForestParams {
  std::size_t num_trees = 100;
  double feature_subsample = 1.0 / 3.0;  // fraction of features tried per split
  ForestMode mode = ForestMode::RandomForest;
  std::uint64_t seed = 0;
  CartParams tree;
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  ForestParams params;
  std::size_t num_features = 0;
};

// RandomForest: bootstrap of n rows per tree, fresh feature subset per split.
// ExtraTrees: all rows, one uniform random threshold per candidate feature.
// Tree t is seeded from derive_seed(seed, t).
ForestModel fit_forest(const Dataset& ds, const ForestParams& params);

double predict_forest_row(const ForestModel& model, Eigen::Ref<const Eigen::RowVectorXd> x);
Vector predict_forest(const ForestModel& model, const FeatureMatrix& x);

// ---------------------------------------------------------------------------

nlohmann::json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);
nlohmann::json linear_to_json(const LinearModel& m);
LinearModel linear_from_json(const nlohmann::json& j);
nlohmann::json knn_to_json(const KnnModel& m);
KnnModel knn_from_json(const nlohmann::json& j);
nlohmann::json forest_to_json(const ForestModel& m);
ForestModel forest_from_json(const nlohmann::json& j);

}  // namespace driftboost
