#include <algorithm>
#include <numeric>

#include "driftboost/baselines.hpp"

namespace driftboost {

using nlohmann::json;

KnnModel fit_knn(const Dataset& ds, std::size_t k) {
  if (k < 1 || k > static_cast<std::size_t>(ds.rows())) {
    throw InvalidArgument("knn: k must lie in [1, n] (k = " + std::to_string(k) + ", n = " +
                          std::to_string(ds.rows()) + ")");
  }
  KnnModel m;
  m.k = k;
  m.standardizer = Standardizer::fit(ds.features());
  m.train = m.standardizer.transform(ds.features());
  m.target = ds.target();
  return m;
}

double predict_knn_row(const KnnModel& model, Eigen::Ref<const Eigen::RowVectorXd> x) {
  const Eigen::RowVectorXd q = model.standardizer.transform(x);
  const auto n = static_cast<std::size_t>(model.train.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = {(model.train.row(static_cast<Eigen::Index>(i)) - q).squaredNorm(), i};
  }
  // Lexicographic order: distance, then row index.
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(model.k), dist.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < model.k; ++i) {
    sum += model.target(static_cast<Eigen::Index>(dist[i].second));
  }
  return sum / static_cast<double>(model.k);
}

Vector predict_knn(const KnnModel& model, const FeatureMatrix& x) {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out(i) = predict_knn_row(model, x.row(i));
  }
  return out;
}

json knn_to_json(const KnnModel& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.train.rows(); ++i) {
    rows.push_back(std::vector<double>(m.train.row(i).begin(), m.train.row(i).end()));
  }
  return {{"k", m.k},
          {"standardizer", standardizer_to_json(m.standardizer)},
          {"train", std::move(rows)},
          {"target", std::vector<double>(m.target.begin(), m.target.end())}};
}

KnnModel knn_from_json(const json& j) {
  try {
    KnnModel m;
    m.k = j.at("k").get<std::size_t>();
    m.standardizer = standardizer_from_json(j.at("standardizer"));
    const auto target = j.at("target").get<std::vector<double>>();
    const auto& rows = j.at("train");
    const auto d = m.standardizer.means.size();
    if (rows.size() != target.size() || target.empty() || m.k < 1 || m.k > target.size()) {
      throw InvalidArgument("knn json: inconsistent sizes");
    }
    m.train.resize(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = rows[i].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != d) throw InvalidArgument("knn json: ragged training rows");
      for (Eigen::Index c = 0; c < d; ++c) m.train(static_cast<Eigen::Index>(i), c) = row[static_cast<std::size_t>(c)];
    }
    m.target = Eigen::Map<const Eigen::VectorXd>(target.data(), static_cast<Eigen::Index>(target.size()));
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed knn json: ") + e.what());
  }
}

}  // namespace driftboost
