#include <algorithm>
#include <cmath>

#include "driftboost/baselines.hpp"
#include "driftboost/random.hpp"

namespace driftboost {

using nlohmann::json;

ForestModel fit_forest(const Dataset& ds, const ForestParams& params) {
  if (params.num_trees < 1) {
    throw InvalidArgument("forest: num_trees must be at least 1");
  }
  if (!(params.feature_subsample > 0.0 && params.feature_subsample <= 1.0)) {
    throw InvalidArgument("forest: feature_subsample must lie in (0, 1]");
  }
  const auto n = static_cast<std::size_t>(ds.rows());
  const auto d = static_cast<std::size_t>(ds.cols());
  const auto per_split = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(params.feature_subsample * static_cast<double>(d))), 1, d);

  ForestModel model;
  model.params = params;
  model.num_features = d;
  std::vector<std::size_t> bootstrap;
  for (std::size_t t = 0; t < params.num_trees; ++t) {
    const auto tree_seed = derive_seed(params.seed, t);
    SplitSampling sampling;
    sampling.features_per_split = per_split < d ? per_split : 0;
    sampling.random_thresholds = params.mode == ForestMode::ExtraTrees;
    sampling.seed = derive_seed(tree_seed, 1);
    bootstrap.clear();
    if (params.mode == ForestMode::RandomForest) {
      Rng rng(tree_seed);
      bootstrap.resize(n);
      for (auto& r : bootstrap) {
        r = static_cast<std::size_t>(rng.uniform_index(n));
      }
    }
    model.trees.push_back(fit_cart(ds.features(), ds.target(), params.tree, bootstrap, sampling));
    model.tree_seeds.push_back(tree_seed);
  }
  return model;
}

double predict_forest_row(const ForestModel& model, Eigen::Ref<const Eigen::RowVectorXd> x) {
  if (static_cast<std::size_t>(x.size()) != model.num_features) {
    throw InvalidArgument("predict_forest: expected " + std::to_string(model.num_features) + " features, got " +
                          std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& tree : model.trees) {
    sum += tree.predict_row(x.data());
  }
  return sum / static_cast<double>(model.trees.size());
}

Vector predict_forest(const ForestModel& model, const FeatureMatrix& x) {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out(i) = predict_forest_row(model, x.row(i));
  }
  return out;
}

json forest_to_json(const ForestModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
  const auto& p = m.params;
  const bool capped = p.tree.max_leaves != std::numeric_limits<std::size_t>::max();
  return {{"mode", p.mode == ForestMode::RandomForest ? "random_forest" : "extra_trees"},
          {"num_trees", p.num_trees},
          {"feature_subsample", p.feature_subsample},
          {"seed", p.seed},
          {"max_leaves", capped ? json(p.tree.max_leaves) : json(nullptr)},
          {"min_samples_leaf", p.tree.min_samples_leaf},
          {"max_depth", p.tree.max_depth ? json(*p.tree.max_depth) : json(nullptr)},
          {"num_features", m.num_features},
          {"tree_seeds", m.tree_seeds},
          {"trees", std::move(trees)}};
}

ForestModel forest_from_json(const json& j) {
  try {
    ForestModel m;
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "random_forest") {
      m.params.mode = ForestMode::RandomForest;
    } else if (mode == "extra_trees") {
      m.params.mode = ForestMode::ExtraTrees;
    } else {
      throw InvalidArgument("unknown forest mode: " + mode);
    }
    m.params.num_trees = j.at("num_trees").get<std::size_t>();
    m.params.feature_subsample = j.at("feature_subsample").get<double>();
    m.params.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("max_leaves").is_null()) m.params.tree.max_leaves = j.at("max_leaves").get<std::size_t>();
    m.params.tree.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
    if (!j.at("max_depth").is_null()) m.params.tree.max_depth = j.at("max_depth").get<int>();
    m.num_features = j.at("num_features").get<std::size_t>();
    m.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    if (m.trees.empty() || m.trees.size() != m.tree_seeds.size()) {
      throw InvalidArgument("forest json: tree list empty or inconsistent with seeds");
    }
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed forest json: ") + e.what());
  }
}

}  // namespace driftboost
