#include <algorithm>
#include <cmath>

#include "driftboost/baselines.hpp"

namespace driftboost {

using nlohmann::json;

Standardizer Standardizer::fit(const FeatureMatrix& x) {
  Standardizer s;
  const auto stats = column_stats(x);
  s.means.resize(x.cols());
  s.scales.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto& st = stats[static_cast<std::size_t>(j)];
    s.means(j) = st.mean;
    s.scales(j) = st.sd > 0.0 ? st.sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::transform(const FeatureMatrix& x) const {
  if (x.cols() != means.size()) {
    throw InvalidArgument("standardize: expected " + std::to_string(means.size()) + " features, got " +
                          std::to_string(x.cols()));
  }
  return ((x.rowwise() - means).array().rowwise() / scales.array()).matrix();
}

Eigen::RowVectorXd Standardizer::transform(Eigen::Ref<const Eigen::RowVectorXd> row) const {
  if (row.size() != means.size()) {
    throw InvalidArgument("standardize: expected " + std::to_string(means.size()) + " features, got " +
                          std::to_string(row.size()));
  }
  return ((row - means).array() / scales.array()).matrix();
}

namespace {

// Map standardized-space coefficients back to original units.
LinearModel to_original_units(const Eigen::VectorXd& beta_std, double y_mean, const Standardizer& s,
                              Regularization reg) {
  LinearModel m;
  m.standardizer = s;
  m.regularization = reg;
  m.coefficients = (beta_std.array() / s.scales.transpose().array()).matrix();
  m.intercept = y_mean - s.means.dot(m.coefficients);
  return m;
}

}  // namespace

LinearModel fit_ols(const Dataset& ds) {
  const auto s = Standardizer::fit(ds.features());
  const Eigen::MatrixXd z = s.transform(ds.features());
  const double y_mean = ds.target().mean();
  const Eigen::VectorXd yc = ds.target().array() - y_mean;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  qr.setThreshold(1e-10);
  const auto d = z.cols();
  const auto rank = qr.rank();
  if (rank < d) {
    // Columns the pivoting left out are combinations of the kept ones.
    const auto names = ds.schema().feature_names();
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(std::min(z.rows(), d), d).template triangularView<Eigen::Upper>();
    const auto& perm = qr.colsPermutation().indices();
    std::vector<std::string> involved;
    std::string detail;
    for (Eigen::Index k = rank; k < d; ++k) {
      const auto dropped = static_cast<std::size_t>(perm(k));
      std::vector<std::string> partners;
      if (rank > 0 && k < r.rows()) {
        const Eigen::VectorXd coef = r.topLeftCorner(rank, rank)
                                         .triangularView<Eigen::Upper>()
                                         .solve(r.block(0, k, rank, 1));
        for (Eigen::Index i = 0; i < rank; ++i) {
          if (std::abs(coef(i)) > 1e-8) partners.push_back(names[static_cast<std::size_t>(perm(i))]);
        }
      }
      involved.push_back(names[dropped]);
      for (const auto& p : partners) {
        if (std::find(involved.begin(), involved.end(), p) == involved.end()) involved.push_back(p);
      }
      detail += (detail.empty() ? "" : "; ") + names[dropped];
      if (partners.empty()) {
        detail += " is constant (collinear with the intercept)";
      } else {
        detail += " is collinear with";
        for (const auto& p : partners) detail += " " + p;
      }
    }
    throw RankDeficientError(involved, "rank-deficient design (rank " + std::to_string(rank) + " of " +
                                           std::to_string(d) + "): " + detail);
  }
  const Eigen::VectorXd beta = qr.solve(yc);
  return to_original_units(beta, y_mean, s, {Penalty::None, 0.0, 0.0});
}

LinearModel fit_ridge(const Dataset& ds, double l2) {
  if (!(l2 >= 0.0)) {
    throw InvalidArgument("ridge: l2 must be >= 0");
  }
  if (l2 == 0.0) {
    return fit_ols(ds);
  }
  const auto s = Standardizer::fit(ds.features());
  const Eigen::MatrixXd z = s.transform(ds.features());
  const double y_mean = ds.target().mean();
  const Eigen::VectorXd yc = ds.target().array() - y_mean;
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += l2;
  const Eigen::VectorXd beta = gram.ldlt().solve(z.transpose() * yc);
  return to_original_units(beta, y_mean, s, {Penalty::L2, 0.0, l2});
}

LinearModel fit_elastic_net(const Dataset& ds, double l1, double l2, double tol, std::size_t max_iter) {
  if (!(l1 >= 0.0) || !(l2 >= 0.0)) {
    throw InvalidArgument("elastic net: l1 and l2 must be >= 0");
  }
  if (!(tol > 0.0) || max_iter < 1) {
    throw InvalidArgument("elastic net: tol must be positive and max_iter at least 1");
  }
  const auto s = Standardizer::fit(ds.features());
  const Eigen::MatrixXd z = s.transform(ds.features());
  const double n = static_cast<double>(z.rows());
  const double y_mean = ds.target().mean();
  Eigen::VectorXd residual = ds.target().array() - y_mean;
  const Eigen::VectorXd col_sq = z.colwise().squaredNorm().transpose() / n;

  const Penalty kind = l2 == 0.0 ? Penalty::L1 : (l1 == 0.0 ? Penalty::L2 : Penalty::Elastic);
  const Regularization reg{kind, l1, l2};
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(z.cols());
  for (std::size_t iter = 1; iter <= max_iter; ++iter) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double denom = col_sq(j) + l2;
      const double old = beta(j);
      double updated = 0.0;
      if (denom > 0.0) {
        const double rho = z.col(j).dot(residual) / n + col_sq(j) * old;
        const double shrunk = std::max(std::abs(rho) - l1, 0.0);
        updated = std::copysign(shrunk, rho) / denom;
      }
      if (updated != old) {
        residual -= (updated - old) * z.col(j);
        beta(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    if (max_change < tol) {
      auto m = to_original_units(beta, y_mean, s, reg);
      m.iterations = iter;
      return m;
    }
  }
  auto last = to_original_units(beta, y_mean, s, reg);
  last.iterations = max_iter;
  throw ConvergenceError(std::move(last), "elastic net did not converge in " + std::to_string(max_iter) +
                                              " sweeps (tol " + std::to_string(tol) + ")");
}

double predict_linear_row(const LinearModel& model, Eigen::Ref<const Eigen::RowVectorXd> x) {
  if (x.size() != model.coefficients.size()) {
    throw InvalidArgument("predict_linear: expected " + std::to_string(model.coefficients.size()) +
                          " features, got " + std::to_string(x.size()));
  }
  return model.intercept + x.dot(model.coefficients);
}

Vector predict_linear(const LinearModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.coefficients.size()) {
    throw InvalidArgument("predict_linear: expected " + std::to_string(model.coefficients.size()) +
                          " features, got " + std::to_string(x.cols()));
  }
  return (x * model.coefficients).array() + model.intercept;
}

// ---------------------------------------------------------------------------

namespace {

json vec_to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

const char* penalty_name(Penalty p) {
  switch (p) {
    case Penalty::None: return "none";
    case Penalty::L2: return "l2";
    case Penalty::L1: return "l1";
    case Penalty::Elastic: return "elastic";
  }
  return "none";
}

Penalty penalty_from_name(const std::string& s) {
  if (s == "none") return Penalty::None;
  if (s == "l2") return Penalty::L2;
  if (s == "l1") return Penalty::L1;
  if (s == "elastic") return Penalty::Elastic;
  throw InvalidArgument("unknown penalty: " + s);
}

}  // namespace

json standardizer_to_json(const Standardizer& s) {
  return {{"means", vec_to_json(s.means.transpose())}, {"scales", vec_to_json(s.scales.transpose())}};
}

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  s.means = vec_from_json(j.at("means")).transpose();
  s.scales = vec_from_json(j.at("scales")).transpose();
  if (s.means.size() != s.scales.size()) {
    throw InvalidArgument("standardizer json: means and scales differ in length");
  }
  return s;
}

json linear_to_json(const LinearModel& m) {
  return {{"coefficients", vec_to_json(m.coefficients)},
          {"intercept", m.intercept},
          {"penalty", penalty_name(m.regularization.kind)},
          {"l1", m.regularization.l1},
          {"l2", m.regularization.l2},
          {"iterations", m.iterations},
          {"standardizer", standardizer_to_json(m.standardizer)}};
}

LinearModel linear_from_json(const json& j) {
  try {
    LinearModel m;
    m.coefficients = vec_from_json(j.at("coefficients"));
    m.intercept = j.at("intercept").get<double>();
    m.regularization = {penalty_from_name(j.at("penalty").get<std::string>()), j.at("l1").get<double>(),
                        j.at("l2").get<double>()};
    m.iterations = j.value("iterations", std::size_t{0});
    m.standardizer = standardizer_from_json(j.at("standardizer"));
    if (!m.coefficients.allFinite() || m.standardizer.means.size() != m.coefficients.size()) {
      throw InvalidArgument("linear model json: inconsistent or non-finite coefficients");
    }
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed linear model json: ") + e.what());
  }
}

}  // namespace driftboost
