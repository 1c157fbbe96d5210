#include <algorithm>
#include <limits>
#include <optional>
#include <tuple>

#include "driftboost/error.hpp"
#include "driftboost/tree.hpp"

namespace driftboost {

namespace {

struct NodeError {
  std::size_t count = 0;
  double sum = 0.0;
  double sse = 0.0;  // squared error around this node's own mean
};

// Per-node statistics of the rows routed through each node.
std::vector<NodeError> node_errors(const RegressionTree& tree, const Dataset& ds) {
  if (static_cast<std::size_t>(ds.cols()) != tree.num_features()) {
    throw InvalidArgument("prune: dataset has " + std::to_string(ds.cols()) + " features, tree expects " +
                          std::to_string(tree.num_features()));
  }
  const auto& nodes = tree.nodes();
  std::vector<NodeError> stats(nodes.size());
  auto walk = [&](auto&& visit) {
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      const double* row = ds.features().row(i).data();
      std::size_t k = 0;
      while (true) {
        visit(k, ds.target()(i));
        const auto& nd = nodes[k];
        if (nd.is_leaf()) break;
        k = static_cast<std::size_t>(row[nd.feature] <= nd.threshold ? nd.left : nd.right);
      }
    }
  };
  walk([&](std::size_t k, double y) {
    ++stats[k].count;
    stats[k].sum += y;
  });
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (stats[k].count == 0) {
      throw InvalidArgument("prune: dataset does not match tree (no rows reach node " + std::to_string(k) + ")");
    }
  }
  walk([&](std::size_t k, double y) {
    const double r = y - stats[k].sum / static_cast<double>(stats[k].count);
    stats[k].sse += r * r;
  });
  return stats;
}

}  // namespace

double cost_complexity(const RegressionTree& tree, const Dataset& ds, double alpha) {
  const auto stats = node_errors(tree, ds);
  double total = 0.0;
  for (std::size_t k = 0; k < tree.nodes().size(); ++k) {
    if (tree.node(k).is_leaf()) total += stats[k].sse;
  }
  return total + alpha * static_cast<double>(tree.num_leaves());
}

RegressionTree prune_ccp(const RegressionTree& tree, const Dataset& ds, double alpha) {
  if (!(alpha >= 0.0)) {
    throw InvalidArgument("prune_ccp: alpha must be >= 0");
  }
  const auto& nodes = tree.nodes();
  const auto stats = node_errors(tree, ds);
  const std::size_t m = nodes.size();
  std::vector<char> collapsed(m, 0);
  std::vector<std::size_t> leaves(m);
  std::vector<double> subtree_sse(m);

  while (true) {
    // Children have larger indices than parents, so a reverse sweep is bottom-up.
    for (std::size_t k = m; k-- > 0;) {
      const auto& nd = nodes[k];
      if (nd.is_leaf() || collapsed[k]) {
        leaves[k] = 1;
        subtree_sse[k] = stats[k].sse;
      } else {
        const auto l = static_cast<std::size_t>(nd.left);
        const auto r = static_cast<std::size_t>(nd.right);
        leaves[k] = leaves[l] + leaves[r];
        subtree_sse[k] = subtree_sse[l] + subtree_sse[r];
      }
    }

    // Weakest link among internal nodes still present in the tree.
    std::optional<std::size_t> weakest;
    double weakest_g = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const auto k = stack.back();
      stack.pop_back();
      const auto& nd = nodes[k];
      if (nd.is_leaf() || collapsed[k]) continue;
      const double g =
          std::max(0.0, (stats[k].sse - subtree_sse[k]) / static_cast<double>(leaves[k] - 1));
      const bool better =
          !weakest || g < weakest_g ||
          (g == weakest_g &&
           std::make_tuple(nd.depth, nd.feature, k) <
               std::make_tuple(nodes[*weakest].depth, nodes[*weakest].feature, *weakest));
      if (better) {
        weakest = k;
        weakest_g = g;
      }
      stack.push_back(static_cast<std::size_t>(nd.right));
      stack.push_back(static_cast<std::size_t>(nd.left));
    }
    if (!weakest || !(weakest_g < alpha)) break;
    collapsed[*weakest] = 1;
  }

  // Re-emit the surviving nodes in pre-order.
  std::vector<TreeNode> out;
  auto emit = [&](auto&& self, std::size_t k) -> int {
    const int index = static_cast<int>(out.size());
    out.push_back(nodes[k]);
    if (collapsed[k]) {
      auto& leaf = out.back();
      leaf.feature = TreeNode::kLeaf;
      leaf.left = leaf.right = -1;
      leaf.count = stats[k].count;
      leaf.value = stats[k].sum / static_cast<double>(stats[k].count);
      leaf.grad_sum = -stats[k].sum;
      leaf.hess_sum = static_cast<double>(stats[k].count);
    } else if (!nodes[k].is_leaf()) {
      const int l = self(self, static_cast<std::size_t>(nodes[k].left));
      const int r = self(self, static_cast<std::size_t>(nodes[k].right));
      out[static_cast<std::size_t>(index)].left = l;
      out[static_cast<std::size_t>(index)].right = r;
    }
    return index;
  };
  emit(emit, 0);
  return RegressionTree(std::move(out), tree.num_features());
}

}  // namespace driftboost
