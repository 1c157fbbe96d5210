#include <charconv>
#include <cmath>

#include "driftboost/boosting.hpp"
#include "driftboost/error.hpp"
#include "driftboost/harness.hpp"

namespace driftboost {

namespace {

const Ensemble& require_ensemble(const AnyModel& model, const char* what) {
  const auto* ens = std::get_if<Ensemble>(&model);
  if (ens == nullptr) {
    throw InvalidArgument(std::string(what) + " needs a boosted ensemble, got a '" + model_kind(model) + "' model");
  }
  return *ens;
}

double rmse_of(const Vector& y, const Vector& y_hat) { return std::sqrt((y - y_hat).squaredNorm() / y.size()); }

}  // namespace

DiagnoseKind parse_diagnose_kind(const std::string& name) {
  if (name == "prediction_error") return DiagnoseKind::PredictionError;
  if (name == "residuals") return DiagnoseKind::Residuals;
  if (name == "learning_curve") return DiagnoseKind::LearningCurve;
  if (name == "validation_curve") return DiagnoseKind::ValidationCurve;
  throw InvalidArgument("unknown diagnostic '" + name +
                        "' (known: prediction_error, residuals, learning_curve, validation_curve)");
}

std::string diagnose_kind_name(DiagnoseKind kind) {
  switch (kind) {
    case DiagnoseKind::PredictionError:
      return "prediction_error";
    case DiagnoseKind::Residuals:
      return "residuals";
    case DiagnoseKind::LearningCurve:
      return "learning_curve";
    case DiagnoseKind::ValidationCurve:
      return "validation_curve";
  }
  return "?";
}

std::string Series::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out += (c ? "," : "") + columns[c];
  }
  out += '\n';
  char buf[64];
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      const auto r = std::to_chars(buf, buf + sizeof buf, row[c]);
      out.append(buf, r.ptr);
    }
    out += '\n';
  }
  return out;
}

Series prediction_error_series(const AnyModel& model, const Dataset& eval) {
  const Vector y_hat = predict_any(model, eval.features());
  Series s{{"actual", "predicted", "identity", "on_identity"}, {}};
  for (Eigen::Index i = 0; i < eval.rows(); ++i) {
    const double y = eval.target()(i);
    const bool on = std::abs(y_hat(i) - y) <= 1e-12 * std::max(1.0, std::abs(y));
    s.rows.push_back({y, y_hat(i), y, on ? 1.0 : 0.0});
  }
  return s;
}

Series residual_series(const AnyModel& model, const Dataset& eval) {
  const Vector y_hat = predict_any(model, eval.features());
  Series s{{"predicted", "residual"}, {}};
  for (Eigen::Index i = 0; i < eval.rows(); ++i) {
    s.rows.push_back({y_hat(i), eval.target()(i) - y_hat(i)});
  }
  return s;
}

Series learning_curve_series(const AnyModel& model, const Dataset& train, const Dataset& test) {
  const Ensemble& ens = require_ensemble(model, "learning_curve");
  const Eigen::MatrixXd train_stages = staged_predict(ens, train);
  const Eigen::MatrixXd test_stages = staged_predict(ens, test);
  Series s{{"round", "train_rmse", "test_rmse"}, {}};
  for (Eigen::Index t = 1; t < train_stages.rows(); ++t) {
    s.rows.push_back({static_cast<double>(t), rmse_of(train.target(), train_stages.row(t).transpose()),
                      rmse_of(test.target(), test_stages.row(t).transpose())});
  }
  return s;
}

Series validation_curve_series(const AnyModel& model, const Dataset& train, const Dataset& test,
                               const std::vector<std::size_t>& grid) {
  const Ensemble& ens = require_ensemble(model, "validation_curve");
  if (grid.empty()) {
    throw InvalidArgument("validation_curve grid is empty");
  }
  Series s{{"num_leaves", "train_rmse", "test_rmse"}, {}};
  for (const std::size_t leaves : grid) {
    Ensemble refit;
    if (const auto* p = std::get_if<GbdtParams>(&ens.params)) {
      GbdtParams q = *p;
      q.num_leaves = leaves;
      refit = fit_gbdt(train, q);
    } else {
      ResidualBoostingParams q = std::get<ResidualBoostingParams>(ens.params);
      q.tree.max_leaves = leaves;
      refit = fit_residual_boosting(train, q);
    }
    s.rows.push_back({static_cast<double>(leaves), rmse_of(train.target(), predict(refit, train.features())),
                      rmse_of(test.target(), predict(refit, test.features()))});
  }
  return s;
}

}  // namespace driftboost
