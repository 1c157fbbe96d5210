#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "driftboost/boosting.hpp"
#include "driftboost/error.hpp"
#include "driftboost/objective.hpp"
#include "test_util.hpp"

using namespace driftboost;
using driftboost::testing::column_dataset;
using driftboost::testing::random_dataset;

namespace {

double train_mse(const Ensemble& ens, const Dataset& ds) {
  return (predict(ens, ds.features()) - ds.target()).squaredNorm() / static_cast<double>(ds.rows());
}

double variance(const Vector& y) { return (y.array() - y.mean()).square().mean(); }

GbdtParams small_params() {
  GbdtParams p;
  p.num_rounds = 20;
  p.num_leaves = 8;
  p.learning_rate = 0.3;
  return p;
}

}  // namespace

TEST(SquaredLoss, GradHess) {
  Vector y(1), y_hat(1);
  y << 3;
  y_hat << 5;
  const GradHess gh = squared_loss_grad_hess(y, y_hat);
  EXPECT_EQ(gh.grads(0), 2.0);
  EXPECT_EQ(gh.hessians(0), 1.0);
  const GradHess zero = squared_loss_grad_hess(y_hat, y_hat);
  EXPECT_EQ(zero.grads(0), 0.0);
  const GradHess swapped = squared_loss_grad_hess(y_hat, y);
  EXPECT_EQ(swapped.grads(0), -gh.grads(0));
  EXPECT_THROW(squared_loss_grad_hess(Vector::Zero(2), Vector::Zero(3)), InvalidArgument);
}

TEST(Params, Validation) {
  GbdtParams p;
  EXPECT_NO_THROW(p.validate());
  p.learning_rate = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = GbdtParams{};
  p.learning_rate = 1.5;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = GbdtParams{};
  p.num_leaves = 1;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = GbdtParams{};
  p.num_rounds = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = GbdtParams{};
  p.goss = GossParams{0.5, 0.0};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.goss = GossParams{0.7, 0.4};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.goss = GossParams{1.0, 0.0};
  EXPECT_NO_THROW(p.validate());

  ResidualBoostingParams r;
  r.learning_rate = 0.0;
  EXPECT_THROW(r.validate(), InvalidArgument);
  const Dataset ds = column_dataset({0, 1}, {0, 1});
  EXPECT_THROW(fit_residual_boosting(ds, r), InvalidArgument);
}

TEST(ResidualBoosting, SingleRootLeafIsMean) {
  const Dataset ds = column_dataset({0, 1, 2, 3}, {1, 2, 3, 10});
  ResidualBoostingParams p;
  p.num_rounds = 1;
  p.learning_rate = 1.0;
  p.tree.max_leaves = 1;
  const Ensemble ens = fit_residual_boosting(ds, p);
  EXPECT_EQ(ens.base_score, 0.0);
  for (double v : driftboost::testing::to_std(predict(ens, ds.features()))) {
    EXPECT_DOUBLE_EQ(v, 4.0);
  }
}

TEST(ResidualBoosting, PiecewiseConstantConvergesMonotonically) {
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i);
    y.push_back(i < 17 ? 2.0 : 7.0);
  }
  const Dataset ds = column_dataset(x, y);
  ResidualBoostingParams p;
  p.num_rounds = 50;
  p.learning_rate = 0.1;
  p.tree.max_leaves = 2;
  const Ensemble ens = fit_residual_boosting(ds, p);
  EXPECT_LT(train_mse(ens, ds), 1e-3 * variance(ds.target()));
  const Eigen::MatrixXd stages = staged_predict(ens, ds);
  double previous = INFINITY;
  for (Eigen::Index t = 0; t < stages.rows(); ++t) {
    const double mse = (stages.row(t).transpose() - ds.target()).squaredNorm();
    EXPECT_LE(mse, previous + 1e-12);
    previous = mse;
  }
}

TEST(ResidualBoosting, PrunedTreesAreSmaller) {
  Rng rng(3);
  const Dataset ds = random_dataset(rng, 200, 3);
  ResidualBoostingParams p;
  p.num_rounds = 5;
  p.tree.max_leaves = 16;
  const Ensemble full = fit_residual_boosting(ds, p);
  p.ccp_alpha = 5.0;
  const Ensemble pruned = fit_residual_boosting(ds, p);
  std::size_t a = 0, b = 0;
  for (const auto& t : full.trees) a += t.num_leaves();
  for (const auto& t : pruned.trees) b += t.num_leaves();
  EXPECT_LT(b, a);
}

TEST(Gbdt, OneRoundHandExample) {
  const Dataset ds = column_dataset({0, 1, 2, 3}, {-1, -1, 1, 1});
  GbdtParams p;
  p.num_rounds = 1;
  p.num_leaves = 2;
  p.learning_rate = 1.0;
  p.l2_reg = 0.0;
  p.min_split_gain = 0.0;
  const Ensemble ens = fit_gbdt(ds, p);
  ASSERT_EQ(ens.trees.size(), 1u);
  EXPECT_EQ(ens.base_score, 0.0);
  const RegressionTree& t = ens.trees[0];
  ASSERT_EQ(t.num_leaves(), 2u);
  EXPECT_DOUBLE_EQ(t.root().threshold, 1.5);
  EXPECT_DOUBLE_EQ(t.node(t.root().left).value, -1.0);
  EXPECT_DOUBLE_EQ(t.node(t.root().right).value, 1.0);
  EXPECT_EQ(predict(ens, ds.features()), ds.target());
}

TEST(Gbdt, ConstantTarget) {
  const Dataset ds = column_dataset({0, 1, 2, 3, 4}, {3.5, 3.5, 3.5, 3.5, 3.5});
  GbdtParams p = small_params();
  const Ensemble ens = fit_gbdt(ds, p);
  for (const auto& t : ens.trees) EXPECT_EQ(t.num_leaves(), 1u);
  EXPECT_EQ(train_mse(ens, ds), 0.0);
}

TEST(Gbdt, DeterministicAndSerializable) {
  Rng rng(4);
  const Dataset ds = random_dataset(rng, 300, 4);
  GbdtParams p = small_params();
  p.goss = GossParams{0.3, 0.2};
  p.seed = 11;
  const Ensemble a = fit_gbdt(ds, p);
  const Ensemble b = fit_gbdt(ds, p);
  EXPECT_EQ(ensemble_to_json(a).dump(), ensemble_to_json(b).dump());
  const Ensemble back = ensemble_from_json(nlohmann::json::parse(ensemble_to_json(a).dump()));
  EXPECT_EQ(predict(back, ds.features()), predict(a, ds.features()));
  EXPECT_EQ(ensemble_to_json(back).dump(), ensemble_to_json(a).dump());
  const auto& q = std::get<GbdtParams>(back.params);
  ASSERT_TRUE(q.goss);
  EXPECT_EQ(q.goss->top_rate, 0.3);
  EXPECT_EQ(q.seed, 11u);
}

TEST(Gbdt, MonotoneTrainingLoss) {
  Rng rng(5);
  const Dataset ds = random_dataset(rng, 400, 3);
  GbdtParams p = small_params();
  p.num_rounds = 40;
  const Ensemble ens = fit_gbdt(ds, p);
  const Eigen::MatrixXd stages = staged_predict(ens, ds);
  double previous = INFINITY;
  for (Eigen::Index t = 0; t < stages.rows(); ++t) {
    const double mse = (stages.row(t).transpose() - ds.target()).squaredNorm();
    ASSERT_LE(mse, previous * (1 + 1e-12));
    previous = mse;
  }
}

TEST(Gbdt, RespectsLeafAndDepthCaps) {
  Rng rng(6);
  const Dataset ds = random_dataset(rng, 500, 3);
  GbdtParams p = small_params();
  p.num_leaves = 5;
  p.max_depth = 2;
  p.min_data_in_leaf = 30;
  for (const auto& t : fit_gbdt(ds, p).trees) {
    EXPECT_LE(t.num_leaves(), 4u);
    EXPECT_LE(t.max_depth(), 2);
    for (const auto& nd : t.nodes()) {
      if (nd.is_leaf()) {
        EXPECT_GE(nd.count, 30u);
      }
    }
  }
  p.growth = GrowthPolicy::DepthWise;
  p.max_depth.reset();
  p.num_leaves = 7;
  for (const auto& t : fit_gbdt(ds, p).trees) EXPECT_LE(t.num_leaves(), 7u);
}

TEST(Gbdt, LeafWiseSplitsBestLeafAndGainsMatchScores) {
  Rng rng(7);
  const Dataset ds = random_dataset(rng, 300, 3);
  GbdtParams p = small_params();
  p.l2_reg = 0.7;
  p.min_split_gain = 0.01;
  std::size_t events = 0;
  const auto observer = [&](const GrowthEvent& e) {
    ++events;
    for (double other : e.competing_gains) {
      EXPECT_GE(e.split.gain, other - 1e-12 * std::max(1.0, std::abs(other)));
    }
    const std::array<LeafSums<double>, 1> parent{{e.parent}};
    const std::array<LeafSums<double>, 2> children{
        {{e.split.left.grad_sum, e.split.left.hess_sum}, {e.split.right.grad_sum, e.split.right.hess_sum}}};
    const double delta = structure_score<double>(parent, p.l2_reg, p.min_split_gain) -
                         structure_score<double>(children, p.l2_reg, p.min_split_gain);
    EXPECT_NEAR(delta, e.split.gain, 1e-9);
    EXPECT_GT(e.split.gain, 0.0);
  };
  fit_gbdt(ds, p, observer);
  EXPECT_GT(events, 20u);
}

TEST(Gbdt, LeafValuesAreMeanResidualsLikeResidualBoosting) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset ds = random_dataset(rng, 50 + rng.uniform_index(100), 2);
    GbdtParams p;
    p.num_rounds = 1;
    p.num_leaves = 2;
    p.learning_rate = 1.0;
    p.max_bins = 1024;
    const Ensemble g = fit_gbdt(ds, p);

    ResidualBoostingParams r;
    r.num_rounds = 1;
    r.learning_rate = 1.0;
    r.tree.max_leaves = 2;
    const Ensemble c = fit_residual_boosting(ds, r);

    ASSERT_EQ(g.trees[0].root().feature, c.trees[0].root().feature);
    ASSERT_EQ(g.trees[0].root().threshold, c.trees[0].root().threshold);
    const Vector a = predict(g, ds.features());
    const Vector b = predict(c, ds.features());
    ASSERT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Predict, EnsembleArithmetic) {
  Ensemble ens;
  ens.base_score = 1.0;
  ens.learning_rate = 0.5;
  ens.num_features = 2;
  EXPECT_EQ(predict_row(ens, Eigen::RowVector2d(3, 4)), 1.0);
  ens.trees.push_back(RegressionTree::single_leaf(2.0, 2));
  EXPECT_DOUBLE_EQ(predict_row(ens, Eigen::RowVector2d(3, 4)), 2.0);
  EXPECT_THROW(predict_row(ens, Eigen::RowVector3d(1, 2, 3)), InvalidArgument);
}

TEST(StagedPredict, PrefixConsistent) {
  Rng rng(9);
  const Dataset ds = random_dataset(rng, 100, 2);
  const Ensemble ens = fit_gbdt(ds, small_params());
  const Eigen::MatrixXd s = staged_predict(ens, ds);
  ASSERT_EQ(s.rows(), static_cast<Eigen::Index>(ens.trees.size()) + 1);
  EXPECT_TRUE((s.row(0).array() == ens.base_score).all());
  const Vector full = predict(ens, ds.features());
  EXPECT_LT((s.row(s.rows() - 1).transpose() - full).cwiseAbs().maxCoeff(), 1e-12);
  FeatureMatrix wrong(2, 3);
  wrong.setZero();
  EXPECT_THROW(staged_predict(ens, wrong), InvalidArgument);
}

TEST(RegularizedObjective, Examples) {
  Vector y(3);
  y << 1, 2, 3;
  EXPECT_EQ(regularized_objective(y, y, {}, 0.0, 0.0), 0.0);
  const double w = 1.7;
  EXPECT_DOUBLE_EQ(regularized_objective(y, y, {{w}}, 2.0, 1.0), 1.0 + w * w);
  Vector off(3);
  off << 2, 2, 2;
  EXPECT_DOUBLE_EQ(regularized_objective(y, off, {}, 0.0, 0.0), 1.0);
  EXPECT_THROW(regularized_objective(y, Vector::Zero(2), {}, 0.0, 0.0), InvalidArgument);
}

TEST(RegularizedObjective, OptimalLeafWeightsBeatPerturbations) {
  Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(20);
    Vector y(static_cast<Eigen::Index>(n));
    for (auto& v : y) v = rng.normal();
    const double l2 = rng.uniform(0.0, 3.0);
    // one leaf holding every row, starting from y_hat = 0
    const double g = -y.sum();
    const double w = leaf_weight(g, static_cast<double>(n), l2);
    auto objective = [&](double weight) {
      return regularized_objective(y, Vector::Constant(static_cast<Eigen::Index>(n), weight), {{weight}}, l2, 0.0);
    };
    ASSERT_LT(objective(w), objective(w + 1e-3));
    ASSERT_LT(objective(w), objective(w - 1e-3));
  }
}

TEST(GbdtParamsJson, RoundTrip) {
  GbdtParams p;
  p.max_depth = 4;
  p.goss = GossParams{0.25, 0.125};
  p.growth = GrowthPolicy::DepthWise;
  p.seed = 0xFFFFFFFFFFFFFFFFULL;
  const GbdtParams q = gbdt_params_from_json(nlohmann::json::parse(gbdt_params_to_json(p).dump()));
  EXPECT_EQ(q.max_depth, p.max_depth);
  EXPECT_EQ(q.goss->other_rate, 0.125);
  EXPECT_EQ(q.growth, GrowthPolicy::DepthWise);
  EXPECT_EQ(q.seed, p.seed);
}
