#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "driftboost/baselines.hpp"
#include "test_util.hpp"

using namespace driftboost;
using driftboost::testing::column_dataset;
using driftboost::testing::make_dataset;
using driftboost::testing::random_dataset;

namespace {

// Three correlated columns with a known linear signal plus noise.
Dataset linear_data(Rng& rng, std::size_t n) {
  FeatureMatrix x(static_cast<Eigen::Index>(n), 3);
  Vector y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, 0) = rng.uniform(-1, 1);
    x(i, 1) = 100.0 * rng.uniform(0, 1) + 3 * x(i, 0);
    x(i, 2) = 1e-3 * rng.normal();
    y(i) = 2 * x(i, 0) - 0.05 * x(i, 1) + 500 * x(i, 2) + 0.3 * rng.normal();
  }
  return Dataset(driftboost::testing::generic_schema(3), std::move(x), std::move(y));
}

Dataset rescale_column(const Dataset& ds, Eigen::Index j, double a, double b) {
  FeatureMatrix x = ds.features();
  x.col(j) = (a * x.col(j)).array() + b;
  return Dataset(ds.schema(), std::move(x), ds.target());
}

std::size_t zero_count(const LinearModel& m) {
  return static_cast<std::size_t>((m.coefficients.array() == 0.0).count());
}

}  // namespace

TEST(Ols, ExactLine) {
  const Dataset ds = column_dataset({0, 1, 2, 3, 4.5}, {1, 3, 5, 7, 10});
  const LinearModel m = fit_ols(ds);
  EXPECT_NEAR(m.coefficients(0), 2.0, 1e-10);
  EXPECT_NEAR(m.intercept, 1.0, 1e-10);
  EXPECT_EQ(m.regularization.kind, Penalty::None);
}

TEST(Ols, ConstantTarget) {
  Rng rng(1);
  Dataset ds = random_dataset(rng, 30, 3);
  ds = Dataset(ds.schema(), ds.features(), Vector::Constant(30, 4.25));
  const LinearModel m = fit_ols(ds);
  EXPECT_LT(m.coefficients.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(m.intercept, 4.25, 1e-12);
}

TEST(Ols, DuplicatedColumnNamesBoth) {
  const Dataset ds = make_dataset({{1, 5, 1}, {2, 3, 2}, {3, 8, 3}, {4, 1, 4}, {5, 0, 5}}, {1, 2, 3, 4, 6});
  try {
    fit_ols(ds);
    FAIL() << "expected a rank error";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.kind(), "rank_deficient");
    std::vector<std::string> cols = e.columns();
    std::sort(cols.begin(), cols.end());
    EXPECT_EQ(cols, (std::vector<std::string>{"x0", "x2"}));
  }
}

TEST(Ols, ConstantColumnIsRankDeficient) {
  const Dataset ds = make_dataset({{1, 7}, {2, 7}, {3, 7}, {4, 7}}, {1, 2, 3, 5});
  EXPECT_THROW(fit_ols(ds), RankDeficientError);
}

TEST(Ols, MatchesNormalEquationsOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset ds = linear_data(rng, 40 + rng.uniform_index(60));
    const LinearModel m = fit_ols(ds);
    // Oracle: normal equations on the raw augmented design, in long double.
    const auto n = ds.rows();
    Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> a(n, 4);
    a.col(0).setOnes();
    a.rightCols(3) = ds.features().cast<long double>();
    const Eigen::Matrix<long double, Eigen::Dynamic, 1> beta =
        (a.transpose() * a).ldlt().solve(a.transpose() * ds.target().cast<long double>());
    EXPECT_NEAR(m.intercept, static_cast<double>(beta(0)), 1e-7);
    for (Eigen::Index j = 0; j < 3; ++j) {
      EXPECT_NEAR(m.coefficients(j), static_cast<double>(beta(j + 1)), 1e-6 * (1 + std::abs(static_cast<double>(beta(j + 1)))));
    }
  }
}

TEST(Ridge, ZeroPenaltyIsOls) {
  Rng rng(3);
  const Dataset ds = linear_data(rng, 80);
  const LinearModel ols = fit_ols(ds);
  const LinearModel r = fit_ridge(ds, 0.0);
  EXPECT_LT((ols.coefficients - r.coefficients).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(ols.intercept, r.intercept, 1e-8);
  const LinearModel tiny = fit_ridge(ds, 1e-12);
  EXPECT_LT((predict_linear(ols, ds.features()) - predict_linear(tiny, ds.features())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Ridge, HugePenaltyShrinksToMean) {
  Rng rng(4);
  const Dataset ds = linear_data(rng, 50);
  const LinearModel m = fit_ridge(ds, 1e12);
  EXPECT_LT(m.coefficients.cwiseAbs().maxCoeff(), 1e-6);
  const Vector p = predict_linear(m, ds.features());
  EXPECT_LT((p.array() - ds.target().mean()).abs().maxCoeff(), 1e-6);
}

TEST(Ridge, DuplicatedColumnsShareWeight) {
  const Dataset ds = make_dataset({{1, 5, 1}, {2, 3, 2}, {3, 8, 3}, {4, 1, 4}, {5, 0, 5}}, {1, 2, 3, 4, 6});
  const LinearModel m = fit_ridge(ds, 1.0);
  EXPECT_TRUE(m.coefficients.allFinite());
  EXPECT_NEAR(m.coefficients(0), m.coefficients(2), 1e-12);
  EXPECT_THROW(fit_ridge(ds, -1.0), InvalidArgument);
}

TEST(Ridge, NormNonIncreasingInPenalty) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset ds = random_dataset(rng, 40, 5);
    double previous = INFINITY;
    for (int k = 0; k < 10; ++k) {
      const double l2 = k == 0 ? 0.0 : std::pow(10.0, k - 4);
      // Compare in standardized units where the penalty acts.
      const LinearModel m = fit_ridge(ds, l2);
      const double norm = (m.coefficients.array() * m.standardizer.scales.transpose().array()).matrix().norm();
      ASSERT_LE(norm, previous + 1e-12);
      previous = norm;
    }
  }
}

TEST(ElasticNet, LargePenaltyKillsAllCoefficients) {
  Rng rng(6);
  const Dataset ds = linear_data(rng, 60);
  const Standardizer s = Standardizer::fit(ds.features());
  const Eigen::MatrixXd z = s.transform(ds.features());
  const Vector yc = ds.target().array() - ds.target().mean();
  const double lmax = (z.transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(ds.rows());
  // The two dot products round differently, so sit one ulp-scale step above the boundary.
  const LinearModel m = fit_elastic_net(ds, lmax * (1 + 1e-12), 0.0);
  EXPECT_EQ(zero_count(m), 3u);
  EXPECT_DOUBLE_EQ(m.intercept, ds.target().mean());
  EXPECT_GT(3u - zero_count(fit_lasso(ds, 0.99 * lmax)), 0u);
}

TEST(ElasticNet, ZeroPenaltyIsOls) {
  Rng rng(7);
  const Dataset ds = random_dataset(rng, 100, 3);
  const LinearModel ols = fit_ols(ds);
  const LinearModel cd = fit_elastic_net(ds, 0.0, 0.0, 1e-12, 100000);
  const Vector a = predict_linear(ols, ds.features());
  const Vector b = predict_linear(cd, ds.features());
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ElasticNet, SingleFeatureSoftThreshold) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x, y;
    const std::size_t n = 5 + rng.uniform_index(40);
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(rng.uniform(-10, 10));
      y.push_back(0.7 * x.back() + rng.normal());
    }
    const Dataset ds = column_dataset(x, y);
    const double l1 = rng.uniform(0, 1);
    const double l2 = trial % 2 ? rng.uniform(0, 2) : 0.0;
    // Closed form: beta_z = S(z'y/n, l1) / (z'z/n + l2), with z'z/n = 1.
    const double nn = static_cast<double>(n);
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nn;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / nn;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
    const double sd = std::sqrt(sxx / nn);
    const double rho = sxy / sd / nn;
    const double beta_z = std::copysign(std::max(std::abs(rho) - l1, 0.0), rho) / (1.0 + l2);
    const LinearModel m = fit_elastic_net(ds, l1, l2);
    ASSERT_NEAR(m.coefficients(0), beta_z / sd, 1e-8);
    ASSERT_NEAR(m.intercept, my - mx * beta_z / sd, 1e-8);
  }
}

TEST(ElasticNet, NonConvergenceCarriesLastIterate) {
  Rng rng(9);
  const Dataset ds = linear_data(rng, 60);
  try {
    fit_elastic_net(ds, 1e-4, 0.0, 1e-15, 1);
    FAIL() << "expected a convergence error";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.last_iterate().iterations, 1u);
    EXPECT_EQ(e.last_iterate().coefficients.size(), 3);
    EXPECT_TRUE(e.last_iterate().coefficients.allFinite());
  }
  EXPECT_THROW(fit_elastic_net(ds, -1, 0), InvalidArgument);
  EXPECT_THROW(fit_elastic_net(ds, 0, 0, 0.0), InvalidArgument);
}

TEST(Lasso, ZeroSetGrowsWithPenalty) {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset ds = random_dataset(rng, 30, 6);
    std::vector<bool> zeros(6, false);
    for (int k = 0; k < 12; ++k) {
      const LinearModel m = fit_lasso(ds, 0.01 * std::pow(1.6, k), 1e-12, 100000);
      for (Eigen::Index j = 0; j < 6; ++j) {
        const bool z = m.coefficients(j) == 0.0;
        if (zeros[static_cast<std::size_t>(j)]) {
          ASSERT_TRUE(z) << "feature " << j << " re-entered at step " << k;
        }
        zeros[static_cast<std::size_t>(j)] = z;
      }
    }
  }
}

TEST(Linear, InvariantToAffineRescaling) {
  Rng rng(11);
  const Dataset ds = linear_data(rng, 70);
  const Dataset scaled = rescale_column(rescale_column(ds, 1, -1e3, 42.0), 0, 1e-4, -7.0);
  using Fit = std::function<LinearModel(const Dataset&)>;
  const std::vector<Fit> fits = {
      [](const Dataset& d) { return fit_ols(d); },
      [](const Dataset& d) { return fit_ridge(d, 2.0); },
      [](const Dataset& d) { return fit_elastic_net(d, 0.01, 0.02, 1e-13, 100000); },
  };
  for (const auto& fit : fits) {
    const Vector a = predict_linear(fit(ds), ds.features());
    const Vector b = predict_linear(fit(scaled), scaled.features());
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Linear, JsonRoundTripAndFinite) {
  Rng rng(12);
  const Dataset ds = linear_data(rng, 40);
  for (const LinearModel& m : {fit_ols(ds), fit_ridge(ds, 1.0), fit_elastic_net(ds, 0.01, 0.01)}) {
    const LinearModel back = linear_from_json(nlohmann::json::parse(linear_to_json(m).dump()));
    EXPECT_EQ(back.coefficients, m.coefficients);
    EXPECT_EQ(back.intercept, m.intercept);
    EXPECT_EQ(back.regularization.kind, m.regularization.kind);
    EXPECT_TRUE(predict_linear(m, ds.features()).allFinite());
  }
  EXPECT_THROW(predict_linear_row(fit_ols(ds), Eigen::RowVector2d(1, 2)), InvalidArgument);
}
