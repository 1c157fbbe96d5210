#include "driftboost/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "driftboost/error.hpp"
#include "driftboost/random.hpp"

namespace driftboost {

using nlohmann::json;

GradHess squared_loss_grad_hess(const Vector& y, const Vector& y_hat) {
  if (y.size() != y_hat.size()) {
    throw InvalidArgument("squared_loss_grad_hess: length mismatch");
  }
  return {y_hat - y, Vector::Ones(y.size())};
}

void GbdtParams::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw InvalidArgument("learning_rate must lie in (0, 1]");
  }
  if (num_rounds < 1) throw InvalidArgument("num_rounds must be at least 1");
  if (num_leaves < 2) throw InvalidArgument("num_leaves must be at least 2");
  if (max_depth && *max_depth < 1) throw InvalidArgument("max_depth must be at least 1");
  if (!(l2_reg >= 0.0)) throw InvalidArgument("l2_reg must be >= 0");
  if (!(min_split_gain >= 0.0)) throw InvalidArgument("min_split_gain must be >= 0");
  if (max_bins < 2 || max_bins > 65535) throw InvalidArgument("max_bins must lie in [2, 65535]");
  if (!(min_child_hess >= 0.0)) throw InvalidArgument("min_child_hess must be >= 0");
  if (min_data_in_leaf < 1) throw InvalidArgument("min_data_in_leaf must be at least 1");
  if (min_child_hess == 0.0 && l2_reg == 0.0) {
    throw InvalidArgument("min_child_hess and l2_reg cannot both be 0 (leaf weight undefined)");
  }
  if (goss) {
    const double a = goss->top_rate;
    const double b = goss->other_rate;
    if (!(a >= 0.0 && b >= 0.0 && a + b <= 1.0 + 1e-12)) {
      throw InvalidArgument("goss: need a >= 0, b >= 0 and a + b <= 1");
    }
    if (a < 1.0 && !(b > 0.0)) throw InvalidArgument("goss: b must be positive when a < 1");
  }
}

void ResidualBoostingParams::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw InvalidArgument("learning_rate must lie in (0, 1]");
  }
  if (num_rounds < 1) throw InvalidArgument("num_rounds must be at least 1");
  if (tree.max_leaves < 1 || tree.min_samples_leaf < 1) throw InvalidArgument("invalid tree parameters");
  if (!(ccp_alpha >= 0.0)) throw InvalidArgument("ccp_alpha must be >= 0");
}

// ---------------------------------------------------------------------------

Ensemble fit_residual_boosting(const Dataset& ds, const ResidualBoostingParams& params) {
  params.validate();
  Ensemble ens;
  ens.base_score = 0.0;
  ens.learning_rate = params.learning_rate;
  ens.params = params;
  ens.num_features = static_cast<std::size_t>(ds.cols());

  Vector residual = ds.target();
  for (std::size_t k = 0; k < params.num_rounds; ++k) {
    auto tree = fit_cart(ds.features(), residual, params.tree);
    if (params.ccp_alpha > 0.0) {
      tree = prune_ccp(tree, ds.with_target(residual), params.ccp_alpha);
    }
    residual -= params.learning_rate * predict_tree(tree, ds.features());
    ens.trees.push_back(std::move(tree));
  }
  return ens;
}

// ---------------------------------------------------------------------------
// GBDT

namespace {

struct LeafState {
  std::size_t node;
  std::size_t begin;
  std::size_t end;
  std::unique_ptr<Histogram> hist;
  std::optional<SplitCandidate> best;
};

class TreeGrower {
 public:
  TreeGrower(const FeatureMatrix& x, std::shared_ptr<const BinLayout> layout, std::span<const std::uint16_t> binned,
             const GbdtParams& params)
      : x_(x), layout_(std::move(layout)), binned_(binned), params_(params) {
    constraints_.l2 = params.l2_reg;
    constraints_.min_split_gain = params.min_split_gain;
    constraints_.min_child_hess = params.min_child_hess;
    constraints_.min_data_in_leaf = params.min_data_in_leaf;
  }

  RegressionTree grow(std::size_t round, std::vector<std::uint32_t> rows, std::span<const double> grads,
                      std::span<const double> hessians, const GrowthObserver& observer) {
    rows_ = std::move(rows);
    grads_ = grads;
    hessians_ = hessians;
    nodes_.clear();
    leaves_.clear();

    TreeNode root;
    for (auto r : rows_) {
      root.grad_sum += grads_[r];
      root.hess_sum += hessians_[r];
    }
    root.count = rows_.size();
    nodes_.push_back(root);
    auto hist = std::make_unique<Histogram>(layout_);
    accumulate_histogram(*hist, binned_, rows_, grads_, hessians_);
    add_leaf(0, 0, rows_.size(), std::move(hist));

    if (params_.growth == GrowthPolicy::LeafWise) {
      while (leaves_.size() < params_.num_leaves) {
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < leaves_.size(); ++i) {
          const auto& leaf = leaves_[i];
          if (!leaf.best) continue;
          if (!pick) {
            pick = i;
            continue;
          }
          const double current = leaves_[*pick].best->gain;
          const bool tied = !beats(leaf.best->gain, current) && !beats(current, leaf.best->gain);
          if (beats(leaf.best->gain, current) || (tied && leaf.node < leaves_[*pick].node)) {
            pick = i;
          }
        }
        if (!pick) break;
        split(round, *pick, observer);
      }
    } else {
      std::vector<std::size_t> level{0};
      while (!level.empty() && leaves_.size() < params_.num_leaves) {
        std::vector<std::size_t> next;
        for (std::size_t node : level) {
          if (leaves_.size() >= params_.num_leaves) break;
          const auto it = std::find_if(leaves_.begin(), leaves_.end(),
                                       [&](const LeafState& l) { return l.node == node; });
          if (it == leaves_.end() || !it->best) continue;
          const auto [left, right] = split(round, static_cast<std::size_t>(it - leaves_.begin()), observer);
          next.push_back(left);
          next.push_back(right);
        }
        level = std::move(next);
      }
    }

    for (auto& nd : nodes_) {
      if (nd.is_leaf()) {
        nd.value = leaf_weight(nd.grad_sum, nd.hess_sum, params_.l2_reg);
      }
    }
    return RegressionTree(std::move(nodes_), static_cast<std::size_t>(x_.cols()));
  }

 private:
  void add_leaf(std::size_t node, std::size_t begin, std::size_t end, std::unique_ptr<Histogram> hist) {
    LeafState leaf{node, begin, end, std::move(hist), std::nullopt};
    const bool depth_ok = !params_.max_depth || nodes_[node].depth < *params_.max_depth;
    if (depth_ok && end - begin >= 2 * params_.min_data_in_leaf) {
      leaf.best = best_split_histogram(*leaf.hist, constraints_);
    }
    leaves_.push_back(std::move(leaf));
  }

  std::pair<std::size_t, std::size_t> split(std::size_t round, std::size_t leaf_pos, const GrowthObserver& observer) {
    LeafState leaf = std::move(leaves_[leaf_pos]);
    leaves_.erase(leaves_.begin() + static_cast<std::ptrdiff_t>(leaf_pos));
    const SplitCandidate s = *leaf.best;

    if (observer) {
      GrowthEvent event;
      event.round = round;
      event.leaf = leaf.node;
      event.depth = nodes_[leaf.node].depth;
      event.parent = {s.left.grad_sum + s.right.grad_sum, s.left.hess_sum + s.right.hess_sum};
      event.split = s;
      for (const auto& other : leaves_) {
        if (other.best) event.competing_gains.push_back(other.best->gain);
      }
      observer(event);
    }

    // Stable partition keeps each child's rows ascending.
    const auto col = static_cast<Eigen::Index>(s.feature);
    std::vector<std::uint32_t> right_rows;
    std::size_t write = leaf.begin;
    for (std::size_t p = leaf.begin; p < leaf.end; ++p) {
      const auto r = rows_[p];
      if (x_(r, col) <= s.threshold) {
        rows_[write++] = r;
      } else {
        right_rows.push_back(r);
      }
    }
    std::copy(right_rows.begin(), right_rows.end(), rows_.begin() + static_cast<std::ptrdiff_t>(write));
    const std::size_t mid = write;

    const int depth = nodes_[leaf.node].depth + 1;
    const std::size_t left_node = nodes_.size();
    const std::size_t right_node = left_node + 1;
    for (const auto& stats : {s.left, s.right}) {
      TreeNode child;
      child.count = stats.count;
      child.grad_sum = stats.grad_sum;
      child.hess_sum = stats.hess_sum;
      child.depth = depth;
      nodes_.push_back(child);
    }
    auto& parent = nodes_[leaf.node];
    parent.feature = static_cast<int>(s.feature);
    parent.threshold = s.threshold;
    parent.left = static_cast<int>(left_node);
    parent.right = static_cast<int>(right_node);
    parent.value = leaf_weight(parent.grad_sum, parent.hess_sum, params_.l2_reg);

    // Build the smaller child directly; the larger is parent minus smaller.
    const bool left_smaller = (mid - leaf.begin) <= (leaf.end - mid);
    auto small = std::make_unique<Histogram>(layout_);
    const auto small_rows = left_smaller ? std::span<const std::uint32_t>(rows_.data() + leaf.begin, mid - leaf.begin)
                                         : std::span<const std::uint32_t>(rows_.data() + mid, leaf.end - mid);
    accumulate_histogram(*small, binned_, small_rows, grads_, hessians_);
    auto large = std::move(leaf.hist);
    large->subtract(*small);

    if (left_smaller) {
      add_leaf(left_node, leaf.begin, mid, std::move(small));
      add_leaf(right_node, mid, leaf.end, std::move(large));
    } else {
      add_leaf(left_node, leaf.begin, mid, std::move(large));
      add_leaf(right_node, mid, leaf.end, std::move(small));
    }
    return {left_node, right_node};
  }

  const FeatureMatrix& x_;
  std::shared_ptr<const BinLayout> layout_;
  std::span<const std::uint16_t> binned_;
  const GbdtParams& params_;
  SplitConstraints constraints_;

  std::vector<std::uint32_t> rows_;
  std::span<const double> grads_;
  std::span<const double> hessians_;
  std::vector<TreeNode> nodes_;
  std::vector<LeafState> leaves_;
};

}  // namespace

Ensemble fit_gbdt(const Dataset& ds, const GbdtParams& params, const GrowthObserver& observer) {
  params.validate();
  const auto& x = ds.features();
  const auto& y = ds.target();
  const auto n = static_cast<std::size_t>(ds.rows());

  Ensemble ens;
  ens.base_score = y.mean();
  ens.learning_rate = params.learning_rate;
  ens.params = params;
  ens.num_features = static_cast<std::size_t>(ds.cols());

  auto layout = std::make_shared<const BinLayout>(x, params.max_bins);
  const auto binned = layout->bin_rows(x);
  TreeGrower grower(x, layout, binned, params);

  Vector y_hat = Vector::Constant(y.size(), ens.base_score);
  std::vector<double> grads(n);
  std::vector<double> hessians(n);
  std::vector<std::uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0U);

  for (std::size_t round = 0; round < params.num_rounds; ++round) {
    const GradHess gh = squared_loss_grad_hess(y, y_hat);
    std::vector<std::uint32_t> rows;
    if (params.goss) {
      const auto sample = goss_sample(std::span<const double>(gh.grads.data(), n), params.goss->top_rate,
                                      params.goss->other_rate, derive_seed(params.seed, round));
      std::fill(grads.begin(), grads.end(), 0.0);
      std::fill(hessians.begin(), hessians.end(), 0.0);
      for (std::size_t k = 0; k < sample.indices.size(); ++k) {
        const auto r = sample.indices[k];
        grads[r] = gh.grads(r) * sample.weights[k];
        hessians[r] = gh.hessians(r) * sample.weights[k];
      }
      rows = sample.indices;
    } else {
      for (std::size_t r = 0; r < n; ++r) {
        grads[r] = gh.grads(static_cast<Eigen::Index>(r));
        hessians[r] = gh.hessians(static_cast<Eigen::Index>(r));
      }
      rows = all_rows;
    }

    auto tree = grower.grow(round, std::move(rows), grads, hessians, observer);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      y_hat(i) += params.learning_rate * tree.predict_row(x.row(i).data());
    }
    ens.trees.push_back(std::move(tree));
  }
  return ens;
}

// ---------------------------------------------------------------------------
// Prediction

double predict_row(const Ensemble& ens, Eigen::Ref<const Eigen::RowVectorXd> x) {
  if (static_cast<std::size_t>(x.size()) != ens.num_features) {
    throw InvalidArgument("predict: expected " + std::to_string(ens.num_features) + " features, got " +
                          std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& tree : ens.trees) {
    sum += tree.predict_row(x.data());
  }
  return ens.base_score + ens.learning_rate * sum;
}

Vector predict(const Ensemble& ens, const FeatureMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != ens.num_features) {
    throw InvalidArgument("predict: expected " + std::to_string(ens.num_features) + " features, got " +
                          std::to_string(x.cols()));
  }
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out(i) = predict_row(ens, x.row(i));
  }
  return out;
}

Eigen::MatrixXd staged_predict(const Ensemble& ens, const FeatureMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != ens.num_features) {
    throw InvalidArgument("staged_predict: feature count mismatch");
  }
  const auto k = static_cast<Eigen::Index>(ens.trees.size());
  Eigen::MatrixXd out(k + 1, x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double* row = x.row(i).data();
    double sum = 0.0;
    out(0, i) = ens.base_score;
    for (Eigen::Index t = 0; t < k; ++t) {
      sum += ens.trees[static_cast<std::size_t>(t)].predict_row(row);
      out(t + 1, i) = ens.base_score + ens.learning_rate * sum;
    }
  }
  return out;
}

Eigen::MatrixXd staged_predict(const Ensemble& ens, const Dataset& ds) { return staged_predict(ens, ds.features()); }

double regularized_objective(const Vector& y, const Vector& y_hat,
                             const std::vector<std::vector<double>>& tree_leaf_weights, double l2, double gamma) {
  if (y.size() != y_hat.size()) {
    throw InvalidArgument("regularized_objective: length mismatch");
  }
  double total = 0.5 * (y - y_hat).squaredNorm();
  for (const auto& weights : tree_leaf_weights) {
    double sq = 0.0;
    for (double w : weights) sq += w * w;
    total += gamma * static_cast<double>(weights.size()) + 0.5 * l2 * sq;
  }
  return total;
}

// ---------------------------------------------------------------------------
// JSON

json gbdt_params_to_json(const GbdtParams& p) {
  json j = {{"num_rounds", p.num_rounds},
            {"learning_rate", p.learning_rate},
            {"num_leaves", p.num_leaves},
            {"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
            {"l2_reg", p.l2_reg},
            {"min_split_gain", p.min_split_gain},
            {"max_bins", p.max_bins},
            {"min_child_hess", p.min_child_hess},
            {"min_data_in_leaf", p.min_data_in_leaf},
            {"seed", p.seed},
            {"growth", p.growth == GrowthPolicy::LeafWise ? "leaf_wise" : "depth_wise"}};
  if (p.goss) {
    j["goss"] = {{"top_rate", p.goss->top_rate}, {"other_rate", p.goss->other_rate}};
  } else {
    j["goss"] = nullptr;
  }
  return j;
}

GbdtParams gbdt_params_from_json(const json& j) {
  GbdtParams p;
  p.num_rounds = j.at("num_rounds").get<std::size_t>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.num_leaves = j.at("num_leaves").get<std::size_t>();
  if (!j.at("max_depth").is_null()) p.max_depth = j.at("max_depth").get<int>();
  p.l2_reg = j.at("l2_reg").get<double>();
  p.min_split_gain = j.at("min_split_gain").get<double>();
  p.max_bins = j.at("max_bins").get<std::size_t>();
  p.min_child_hess = j.at("min_child_hess").get<double>();
  p.min_data_in_leaf = j.at("min_data_in_leaf").get<std::size_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  const auto growth = j.at("growth").get<std::string>();
  if (growth == "leaf_wise") {
    p.growth = GrowthPolicy::LeafWise;
  } else if (growth == "depth_wise") {
    p.growth = GrowthPolicy::DepthWise;
  } else {
    throw InvalidArgument("unknown growth policy: " + growth);
  }
  if (!j.at("goss").is_null()) {
    p.goss = GossParams{j.at("goss").at("top_rate").get<double>(), j.at("goss").at("other_rate").get<double>()};
  }
  return p;
}

namespace {

json residual_params_to_json(const ResidualBoostingParams& p) {
  const bool capped = p.tree.max_leaves != std::numeric_limits<std::size_t>::max();
  return {{"num_rounds", p.num_rounds},
          {"learning_rate", p.learning_rate},
          {"max_leaves", capped ? json(p.tree.max_leaves) : json(nullptr)},
          {"min_samples_leaf", p.tree.min_samples_leaf},
          {"max_depth", p.tree.max_depth ? json(*p.tree.max_depth) : json(nullptr)},
          {"ccp_alpha", p.ccp_alpha}};
}

ResidualBoostingParams residual_params_from_json(const json& j) {
  ResidualBoostingParams p;
  p.num_rounds = j.at("num_rounds").get<std::size_t>();
  p.learning_rate = j.at("learning_rate").get<double>();
  if (!j.at("max_leaves").is_null()) p.tree.max_leaves = j.at("max_leaves").get<std::size_t>();
  p.tree.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  if (!j.at("max_depth").is_null()) p.tree.max_depth = j.at("max_depth").get<int>();
  p.ccp_alpha = j.at("ccp_alpha").get<double>();
  return p;
}

}  // namespace

json ensemble_to_json(const Ensemble& ens) {
  json trees = json::array();
  for (const auto& t : ens.trees) {
    trees.push_back(tree_to_json(t));
  }
  json j = {{"format", "driftboost.ensemble"},
            {"version", 1},
            {"base_score", ens.base_score},
            {"learning_rate", ens.learning_rate},
            {"num_features", ens.num_features},
            {"trees", std::move(trees)}};
  if (const auto* gp = std::get_if<GbdtParams>(&ens.params)) {
    j["algorithm"] = "gbdt";
    j["params"] = gbdt_params_to_json(*gp);
  } else {
    j["algorithm"] = "residual_boosting";
    j["params"] = residual_params_to_json(std::get<ResidualBoostingParams>(ens.params));
  }
  return j;
}

Ensemble ensemble_from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != 1) {
      throw InvalidArgument("unsupported ensemble format version");
    }
    Ensemble ens;
    ens.base_score = j.at("base_score").get<double>();
    ens.learning_rate = j.at("learning_rate").get<double>();
    ens.num_features = j.at("num_features").get<std::size_t>();
    const auto algorithm = j.at("algorithm").get<std::string>();
    if (algorithm == "gbdt") {
      ens.params = gbdt_params_from_json(j.at("params"));
    } else if (algorithm == "residual_boosting") {
      ens.params = residual_params_from_json(j.at("params"));
    } else {
      throw InvalidArgument("unknown ensemble algorithm: " + algorithm);
    }
    for (const auto& t : j.at("trees")) {
      ens.trees.push_back(tree_from_json(t));
      if (ens.trees.back().num_features() != ens.num_features) {
        throw InvalidArgument("ensemble json: tree feature count mismatch");
      }
    }
    return ens;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed ensemble json: ") + e.what());
  }
}

}  // namespace driftboost
