#pragma once

// Regression metrics over Eigen vectors or expressions of any real scalar.
//
//   r2   = 1 - sum (y - y_hat)^2 / sum (y - mean y)^2   (negative when worse than the mean)
//   mae  = mean |y_hat - y|
//   mse  = mean (y_hat - y)^2,  rmse = sqrt(mse)
//   mape = 100 / n * sum |y - y_hat| / |y|             (percent, normalized by n)

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftboost/error.hpp"

namespace driftboost {

namespace metrics_detail {

template <typename A, typename B>
void check_pair(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& y_hat, Eigen::Index min_n,
                const char* name) {
  if (y.size() != y_hat.size()) {
    throw InvalidArgument(std::string(name) + ": length mismatch (" + std::to_string(y.size()) + " vs " +
                          std::to_string(y_hat.size()) + ")");
  }
  if (y.size() < min_n) {
    throw InvalidArgument(std::string(name) + ": need at least " + std::to_string(min_n) + " values");
  }
}

}  // namespace metrics_detail

template <typename A, typename B>
typename A::Scalar r2(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& y_hat) {
  using Scalar = typename A::Scalar;
  metrics_detail::check_pair(y, y_hat, 2, "r2");
  const auto ya = y.derived().array();
  const Scalar mean = ya.mean();
  const Scalar total = (ya - mean).square().sum();
  if (!(total > Scalar(0))) {
    throw InvalidArgument("r2: target is constant (zero variance)");
  }
  const Scalar residual = (ya - y_hat.derived().array()).square().sum();
  return Scalar(1) - residual / total;
}

template <typename A, typename B>
typename A::Scalar mae(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& y_hat) {
  metrics_detail::check_pair(y, y_hat, 1, "mae");
  return (y_hat.derived().array() - y.derived().array()).abs().mean();
}

template <typename A, typename B>
typename A::Scalar mse(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& y_hat) {
  metrics_detail::check_pair(y, y_hat, 1, "mse");
  return (y_hat.derived().array() - y.derived().array()).square().mean();
}

template <typename A, typename B>
typename A::Scalar rmse(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& y_hat) {
  using std::sqrt;
  return sqrt(mse(y, y_hat));
}

template <typename A, typename B>
typename A::Scalar mape(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& y_hat) {
  using Scalar = typename A::Scalar;
  metrics_detail::check_pair(y, y_hat, 1, "mape");
  const auto ya = y.derived().array();
  if ((ya.abs() < Scalar(1e-12)).any()) {
    throw InvalidArgument("mape: actual values must satisfy |y| >= 1e-12");
  }
  return Scalar(100) * ((ya - y_hat.derived().array()).abs() / ya.abs()).mean();
}

struct MetricsReport {
  std::string model_name;
  double r2 = 0.0;
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
  std::size_t n = 0;
  double training_time_s = 0.0;
};

MetricsReport evaluate(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y, std::string model_name,
                       double training_time_s);

// Descending R^2; ties by ascending RMSE, then model name. Stable.
std::vector<MetricsReport> rank_models(std::vector<MetricsReport> reports);

nlohmann::json report_to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);

}  // namespace driftboost
