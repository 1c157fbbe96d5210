#include "driftboost/metrics.hpp"

#include <algorithm>
#include <tuple>

namespace driftboost {

using nlohmann::json;

MetricsReport evaluate(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y, std::string model_name,
                       double training_time_s) {
  if (!(training_time_s >= 0.0)) {
    throw InvalidArgument("evaluate: training time must be >= 0");
  }
  if (!y_hat.allFinite()) {
    throw InvalidArgument("evaluate: predictions contain non-finite values");
  }
  MetricsReport r;
  r.model_name = std::move(model_name);
  r.r2 = driftboost::r2(y, y_hat);
  r.mae = driftboost::mae(y, y_hat);
  r.mse = driftboost::mse(y, y_hat);
  r.rmse = std::sqrt(r.mse);
  r.mape = driftboost::mape(y, y_hat);
  r.n = static_cast<std::size_t>(y.size());
  r.training_time_s = training_time_s;
  return r;
}

std::vector<MetricsReport> rank_models(std::vector<MetricsReport> reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const MetricsReport& a, const MetricsReport& b) {
    return std::make_tuple(-a.r2, a.rmse, std::cref(a.model_name)) <
           std::make_tuple(-b.r2, b.rmse, std::cref(b.model_name));
  });
  return reports;
}

json report_to_json(const MetricsReport& r) {
  return {{"model", r.model_name}, {"r2", r.r2},     {"mae", r.mae}, {"mse", r.mse},
          {"rmse", r.rmse},        {"mape", r.mape}, {"n", r.n},     {"training_time_s", r.training_time_s}};
}

MetricsReport report_from_json(const json& j) {
  try {
    MetricsReport r;
    r.model_name = j.at("model").get<std::string>();
    r.r2 = j.at("r2").get<double>();
    r.mae = j.at("mae").get<double>();
    r.mse = j.at("mse").get<double>();
    r.rmse = j.at("rmse").get<double>();
    r.mape = j.at("mape").get<double>();
    r.n = j.at("n").get<std::size_t>();
    r.training_time_s = j.at("training_time_s").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed metrics report json: ") + e.what());
  }
}

}  // namespace driftboost
