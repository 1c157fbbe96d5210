#include "driftboost/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "driftboost/error.hpp"
#include "driftboost/histogram.hpp"
#include "driftboost/objective.hpp"
#include "driftboost/random.hpp"

namespace driftboost {

using nlohmann::json;

RegressionTree::RegressionTree(std::vector<TreeNode> nodes, std::size_t num_features)
    : nodes_(std::move(nodes)), num_features_(num_features), num_leaves_(0) {
  if (nodes_.empty()) {
    throw InvalidArgument("tree must have at least one node");
  }
  std::vector<int> parents(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& nd = nodes_[i];
    if (nd.is_leaf()) {
      ++num_leaves_;
      continue;
    }
    if (nd.feature < 0 || static_cast<std::size_t>(nd.feature) >= num_features_) {
      throw InvalidArgument("tree node " + std::to_string(i) + " splits on an unknown feature");
    }
    for (int child : {nd.left, nd.right}) {
      if (child <= static_cast<int>(i) || static_cast<std::size_t>(child) >= nodes_.size()) {
        throw InvalidArgument("tree node " + std::to_string(i) + " has an invalid child index");
      }
      ++parents[static_cast<std::size_t>(child)];
    }
    if (nd.left == nd.right) {
      throw InvalidArgument("tree node " + std::to_string(i) + " has identical children");
    }
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (parents[i] != 1) {
      throw InvalidArgument("tree node " + std::to_string(i) + " is not reachable exactly once");
    }
  }
}

RegressionTree RegressionTree::single_leaf(double value, std::size_t num_features, std::size_t count,
                                           double grad_sum, double hess_sum) {
  TreeNode leaf;
  leaf.value = value;
  leaf.count = count;
  leaf.grad_sum = grad_sum;
  leaf.hess_sum = hess_sum;
  return RegressionTree({leaf}, num_features);
}

int RegressionTree::max_depth() const {
  int depth = 0;
  for (const auto& nd : nodes_) {
    depth = std::max(depth, nd.depth);
  }
  return depth;
}

std::size_t RegressionTree::leaf_index(const double* row) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& nd = nodes_[i];
    i = static_cast<std::size_t>(row[nd.feature] <= nd.threshold ? nd.left : nd.right);
  }
  return i;
}

std::vector<double> RegressionTree::leaf_values() const {
  std::vector<double> values;
  for (const auto& nd : nodes_) {
    if (nd.is_leaf()) {
      values.push_back(nd.value);
    }
  }
  return values;
}

double predict_tree_row(const RegressionTree& tree, Eigen::Ref<const Eigen::RowVectorXd> x) {
  if (static_cast<std::size_t>(x.size()) != tree.num_features()) {
    throw InvalidArgument("predict_tree: expected " + std::to_string(tree.num_features()) + " features, got " +
                          std::to_string(x.size()));
  }
  return tree.predict_row(x.data());
}

Vector predict_tree(const RegressionTree& tree, const FeatureMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != tree.num_features()) {
    throw InvalidArgument("predict_tree: expected " + std::to_string(tree.num_features()) + " features, got " +
                          std::to_string(x.cols()));
  }
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out(i) = tree.predict_row(x.row(i).data());
  }
  return out;
}

// ---------------------------------------------------------------------------
// CART

namespace {

struct CartSplit {
  int feature = -1;
  double threshold = 0.0;
  double reduction = 0.0;
};

// Nodes own a contiguous range [begin, end) in per-feature arrays of row
// ids kept sorted by that feature's value. Splitting stable-partitions the
// range of every feature, so the sort survives down the tree.
class CartBuilder {
 public:
  CartBuilder(const FeatureMatrix& x, const Vector& y, const CartParams& params, std::span<const std::size_t> rows,
              const SplitSampling& sampling)
      : x_(x), y_(y), params_(params), sampling_(sampling), rng_(sampling.seed) {
    d_ = static_cast<std::size_t>(x.cols());
    if (rows.empty()) {
      slots_.resize(static_cast<std::size_t>(x.rows()));
      std::iota(slots_.begin(), slots_.end(), 0U);
    } else {
      slots_.reserve(rows.size());
      for (auto r : rows) {
        if (r >= static_cast<std::size_t>(x.rows())) {
          throw InvalidArgument("fit_cart: row index out of range");
        }
        slots_.push_back(static_cast<std::uint32_t>(r));
      }
    }
    order_.assign(d_, slots_);
    for (std::size_t j = 0; j < d_; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      std::stable_sort(order_[j].begin(), order_[j].end(),
                       [&](std::uint32_t a, std::uint32_t b) { return x_(a, col) < x_(b, col); });
    }
    goes_left_.assign(static_cast<std::size_t>(x.rows()), 0);
    scratch_.resize(slots_.size());
    if (sampling_.features_per_split > d_) {
      sampling_.features_per_split = 0;
    }
  }

  RegressionTree build() {
    struct Pending {
      double reduction;
      std::size_t node;
      bool operator<(const Pending& o) const {
        // max-heap on reduction, earliest node first on ties
        if (reduction != o.reduction) return reduction < o.reduction;
        return node > o.node;
      }
    };

    nodes_.push_back(make_node(0, slots_.size(), 0));
    ranges_.push_back({0, slots_.size()});
    splits_.push_back(find_split(0));

    std::priority_queue<Pending> queue;
    if (splits_[0]) queue.push({splits_[0]->reduction, 0});
    std::size_t leaves = 1;
    while (!queue.empty() && leaves < params_.max_leaves) {
      const auto node = queue.top().node;
      queue.pop();
      const auto [left, right] = split_node(node);
      ++leaves;
      for (std::size_t child : {left, right}) {
        if (splits_[child]) queue.push({splits_[child]->reduction, child});
      }
    }
    return RegressionTree(std::move(nodes_), d_);
  }

 private:
  TreeNode make_node(std::size_t begin, std::size_t end, int depth) const {
    double sum = 0.0;
    for (std::size_t p = begin; p < end; ++p) {
      sum += y_(order_[0][p]);
    }
    TreeNode nd;
    nd.count = end - begin;
    nd.value = sum / static_cast<double>(nd.count);
    // Gradients of the squared loss at a zero prediction: g = -y, h = 1.
    nd.grad_sum = -sum;
    nd.hess_sum = static_cast<double>(nd.count);
    nd.depth = depth;
    return nd;
  }

  std::optional<CartSplit> find_split(std::size_t node) {
    const auto [begin, end] = ranges_[node];
    const std::size_t n = end - begin;
    const auto& nd = nodes_[node];
    if (n < 2 * params_.min_samples_leaf) return std::nullopt;
    if (params_.max_depth && nd.depth >= *params_.max_depth) return std::nullopt;
    {
      double lo = y_(order_[0][begin]);
      double hi = lo;
      for (std::size_t p = begin; p < end; ++p) {
        lo = std::min(lo, y_(order_[0][p]));
        hi = std::max(hi, y_(order_[0][p]));
      }
      if (lo == hi) return std::nullopt;
    }

    std::vector<std::size_t> candidates;
    if (sampling_.features_per_split > 0) {
      candidates = rng_.sample_without_replacement(d_, sampling_.features_per_split);
    } else {
      candidates.resize(d_);
      std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    }

    const double total = -nd.grad_sum;
    const double parent_term = total * total / static_cast<double>(n);
    std::optional<CartSplit> best;
    for (std::size_t j : candidates) {
      const auto& ord = order_[j];
      const auto col = static_cast<Eigen::Index>(j);
      auto consider = [&](double left_sum, std::size_t n_left, double threshold) {
        const std::size_t n_right = n - n_left;
        if (n_left < params_.min_samples_leaf || n_right < params_.min_samples_leaf) return;
        const double right_sum = total - left_sum;
        const double reduction = left_sum * left_sum / static_cast<double>(n_left) +
                                 right_sum * right_sum / static_cast<double>(n_right) - parent_term;
        if (!best || beats(reduction, best->reduction)) {
          best = CartSplit{static_cast<int>(j), threshold, reduction};
        }
      };

      if (sampling_.random_thresholds) {
        const double lo = x_(ord[begin], col);
        const double hi = x_(ord[end - 1], col);
        const double u = rng_.uniform();
        if (!(lo < hi)) continue;
        double threshold = lo + u * (hi - lo);
        if (threshold >= hi) threshold = lo;
        double left_sum = 0.0;
        std::size_t p = begin;
        while (p < end && x_(ord[p], col) <= threshold) {
          left_sum += y_(ord[p]);
          ++p;
        }
        consider(left_sum, p - begin, threshold);
        continue;
      }

      double left_sum = 0.0;
      for (std::size_t p = begin; p + 1 < end; ++p) {
        left_sum += y_(ord[p]);
        const double v = x_(ord[p], col);
        const double next = x_(ord[p + 1], col);
        if (v < next) {
          consider(left_sum, p - begin + 1, midpoint_threshold(v, next));
        }
      }
    }
    if (best && best->reduction > 0.0) return best;
    return std::nullopt;
  }

  std::pair<std::size_t, std::size_t> split_node(std::size_t node) {
    const auto split = *splits_[node];
    const auto [begin, end] = ranges_[node];
    const auto col = static_cast<Eigen::Index>(split.feature);
    std::size_t n_left = 0;
    for (std::size_t p = begin; p < end; ++p) {
      const auto r = order_[0][p];
      const bool left = x_(r, col) <= split.threshold;
      goes_left_[r] = left ? 1 : 0;
      n_left += left ? 1 : 0;
    }
    for (auto& ord : order_) {
      std::size_t l = begin;
      std::size_t s = 0;
      for (std::size_t p = begin; p < end; ++p) {
        if (goes_left_[ord[p]]) {
          ord[l++] = ord[p];
        } else {
          scratch_[s++] = ord[p];
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(s),
                ord.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const int depth = nodes_[node].depth + 1;
    const std::size_t left = nodes_.size();
    nodes_.push_back(make_node(begin, begin + n_left, depth));
    ranges_.push_back({begin, begin + n_left});
    const std::size_t right = nodes_.size();
    nodes_.push_back(make_node(begin + n_left, end, depth));
    ranges_.push_back({begin + n_left, end});

    auto& parent = nodes_[node];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = static_cast<int>(left);
    parent.right = static_cast<int>(right);

    splits_.push_back(find_split(left));
    splits_.push_back(find_split(right));
    return {left, right};
  }

  const FeatureMatrix& x_;
  const Vector& y_;
  CartParams params_;
  SplitSampling sampling_;
  Rng rng_;
  std::size_t d_ = 0;
  std::vector<std::uint32_t> slots_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> ranges_;
  std::vector<std::optional<CartSplit>> splits_;
};

}  // namespace

RegressionTree fit_cart(const FeatureMatrix& x, const Vector& y, const CartParams& params,
                        std::span<const std::size_t> rows, const SplitSampling& sampling) {
  if (x.rows() == 0 || y.size() != x.rows()) {
    throw InvalidArgument("fit_cart: empty dataset or target length mismatch");
  }
  if (params.min_samples_leaf < 1) {
    throw InvalidArgument("fit_cart: min_samples_leaf must be at least 1");
  }
  if (params.max_leaves < 1) {
    throw InvalidArgument("fit_cart: max_leaves must be at least 1");
  }
  return CartBuilder(x, y, params, rows, sampling).build();
}

RegressionTree fit_cart(const Dataset& ds, const CartParams& params) {
  return fit_cart(ds.features(), ds.target(), params);
}

RegressionTree fit_cart(const Dataset& ds, std::size_t max_leaves, std::size_t min_samples_leaf) {
  CartParams params;
  params.max_leaves = max_leaves;
  params.min_samples_leaf = min_samples_leaf;
  return fit_cart(ds, params);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json node_to_json(const RegressionTree& tree, std::size_t i) {
  const auto& nd = tree.node(i);
  if (nd.is_leaf()) {
    return {{"value", nd.value}, {"n", nd.count}, {"grad_sum", nd.grad_sum}, {"hess_sum", nd.hess_sum}};
  }
  return {{"feature", nd.feature},
          {"threshold", nd.threshold},
          {"left", node_to_json(tree, static_cast<std::size_t>(nd.left))},
          {"right", node_to_json(tree, static_cast<std::size_t>(nd.right))}};
}

std::size_t node_from_json(const json& j, int depth, std::vector<TreeNode>& nodes) {
  const std::size_t index = nodes.size();
  nodes.emplace_back();
  nodes[index].depth = depth;
  if (j.contains("feature")) {
    const int feature = j.at("feature").get<int>();
    const double threshold = j.at("threshold").get<double>();
    const auto left = node_from_json(j.at("left"), depth + 1, nodes);
    const auto right = node_from_json(j.at("right"), depth + 1, nodes);
    auto& nd = nodes[index];
    const auto& l = nodes[left];
    const auto& r = nodes[right];
    nd.feature = feature;
    nd.threshold = threshold;
    nd.left = static_cast<int>(left);
    nd.right = static_cast<int>(right);
    nd.count = l.count + r.count;
    nd.grad_sum = l.grad_sum + r.grad_sum;
    nd.hess_sum = l.hess_sum + r.hess_sum;
    nd.value = nd.count > 0 ? (static_cast<double>(l.count) * l.value + static_cast<double>(r.count) * r.value) /
                                  static_cast<double>(nd.count)
                            : 0.0;
  } else {
    auto& nd = nodes[index];
    nd.value = j.at("value").get<double>();
    nd.count = j.at("n").get<std::size_t>();
    nd.grad_sum = j.at("grad_sum").get<double>();
    nd.hess_sum = j.at("hess_sum").get<double>();
  }
  return index;
}

}  // namespace

json tree_to_json(const RegressionTree& tree) {
  return {{"format", "driftboost.tree"},
          {"version", 1},
          {"num_features", tree.num_features()},
          {"num_leaves", tree.num_leaves()},
          {"root", node_to_json(tree, 0)}};
}

RegressionTree tree_from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != 1) {
      throw InvalidArgument("unsupported tree format version");
    }
    std::vector<TreeNode> nodes;
    node_from_json(j.at("root"), 0, nodes);
    RegressionTree tree(std::move(nodes), j.at("num_features").get<std::size_t>());
    if (j.contains("num_leaves") && j.at("num_leaves").get<std::size_t>() != tree.num_leaves()) {
      throw InvalidArgument("tree json: num_leaves does not match the node structure");
    }
    return tree;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed tree json: ") + e.what());
  }
}

}  // namespace driftboost
