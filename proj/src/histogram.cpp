#include "driftboost/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "driftboost/error.hpp"
#include "driftboost/objective.hpp"

namespace driftboost {

double midpoint_threshold(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  // Adjacent doubles: the midpoint may round up to b.
  return mid < b ? mid : a;
}

std::vector<double> quantile_bin_edges(std::span<const double> values, std::size_t max_bins) {
  if (max_bins < 2) {
    throw InvalidArgument("max_bins must be at least 2");
  }
  if (values.empty()) {
    throw InvalidArgument("cannot bin an empty column");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> distinct;
  std::vector<std::size_t> counts;
  for (double v : sorted) {
    if (!std::isfinite(v)) {
      throw InvalidArgument("cannot bin non-finite values");
    }
    if (distinct.empty() || v != distinct.back()) {
      distinct.push_back(v);
      counts.push_back(1);
    } else {
      ++counts.back();
    }
  }

  std::vector<double> edges;
  if (distinct.size() <= max_bins) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      edges.push_back(midpoint_threshold(distinct[i], distinct[i + 1]));
    }
  } else {
    // Cut after the distinct value where the cumulative count first reaches
    // each target rank k n / max_bins; several targets crossed at once merge
    // into a single cut.
    const double n = static_cast<double>(sorted.size());
    std::size_t next_target = 1;
    std::size_t cumulative = 0;
    for (std::size_t i = 0; i + 1 < distinct.size() && next_target < max_bins; ++i) {
      cumulative += counts[i];
      const double target = n * static_cast<double>(next_target) / static_cast<double>(max_bins);
      if (static_cast<double>(cumulative) >= target) {
        edges.push_back(midpoint_threshold(distinct[i], distinct[i + 1]));
        while (next_target < max_bins &&
               static_cast<double>(cumulative) >=
                   n * static_cast<double>(next_target) / static_cast<double>(max_bins)) {
          ++next_target;
        }
      }
    }
  }
  edges.push_back(distinct.back());
  return edges;
}

std::size_t bin_index(std::span<const double> upper_edges, double value) {
  const auto it = std::lower_bound(upper_edges.begin(), upper_edges.end(), value);
  if (it == upper_edges.end()) {
    return upper_edges.size() - 1;
  }
  return static_cast<std::size_t>(it - upper_edges.begin());
}

// ---------------------------------------------------------------------------

BinLayout::BinLayout(const FeatureMatrix& x, std::size_t max_bins) {
  if (max_bins > std::numeric_limits<std::uint16_t>::max()) {
    throw InvalidArgument("max_bins must fit in 16 bits");
  }
  std::vector<double> column(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      column[static_cast<std::size_t>(i)] = x(i, j);
    }
    edges_.push_back(quantile_bin_edges(column, max_bins));
  }
  offsets_.assign(1, 0);
  for (const auto& e : edges_) {
    offsets_.push_back(offsets_.back() + e.size());
  }
}

BinLayout::BinLayout(std::vector<std::vector<double>> upper_edges) : edges_(std::move(upper_edges)) {
  offsets_.assign(1, 0);
  for (const auto& e : edges_) {
    if (e.empty()) {
      throw InvalidArgument("every feature needs at least one bin");
    }
    for (std::size_t k = 1; k < e.size(); ++k) {
      if (!(e[k - 1] < e[k])) {
        throw InvalidArgument("bin edges must be strictly increasing");
      }
    }
    offsets_.push_back(offsets_.back() + e.size());
  }
}

std::vector<std::uint16_t> BinLayout::bin_rows(const FeatureMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != num_features()) {
    throw InvalidArgument("bin_rows: column count does not match layout");
  }
  const auto d = num_features();
  std::vector<std::uint16_t> out(static_cast<std::size_t>(x.rows()) * d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out[static_cast<std::size_t>(i) * d + j] =
          static_cast<std::uint16_t>(bin_index(edges_[j], x(i, static_cast<Eigen::Index>(j))));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Histogram::Histogram(std::shared_ptr<const BinLayout> layout)
    : layout_(std::move(layout)), bins_(layout_->total_bins()) {}

BinStats Histogram::totals(std::size_t feature) const {
  BinStats total;
  for (const auto& b : bins(feature)) {
    total += b;
  }
  return total;
}

void Histogram::subtract(const Histogram& other) {
  if (other.layout_ != layout_) {
    throw InvalidArgument("histogram subtraction across different layouts");
  }
  for (std::size_t k = 0; k < bins_.size(); ++k) {
    bins_[k] -= other.bins_[k];
  }
}

void accumulate_histogram(Histogram& hist, std::span<const std::uint16_t> binned_rows,
                          std::span<const std::uint32_t> rows, std::span<const double> grads,
                          std::span<const double> hessians) {
  const auto& layout = hist.layout();
  const std::size_t d = layout.num_features();
  auto bins = hist.all_bins();
  for (const std::uint32_t r : rows) {
    const std::uint16_t* row_bins = binned_rows.data() + static_cast<std::size_t>(r) * d;
    const double g = grads[r];
    const double h = hessians[r];
    for (std::size_t j = 0; j < d; ++j) {
      BinStats& b = bins[layout.offset(j) + row_bins[j]];
      b.grad_sum += g;
      b.hess_sum += h;
      ++b.count;
    }
  }
}

namespace {

void check_lengths(std::size_t n, std::span<const double> grads, std::span<const double> hessians) {
  if (grads.size() != n || hessians.size() != n) {
    throw InvalidArgument("feature, gradient and hessian lengths differ");
  }
}

void check_finite(std::span<const double> grads, std::span<const double> hessians) {
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i]) || !std::isfinite(hessians[i])) {
      throw InvalidArgument("non-finite gradient or hessian at row " + std::to_string(i));
    }
  }
}

Histogram build_over_layout(std::shared_ptr<const BinLayout> layout, const FeatureMatrix& x,
                            std::span<const double> grads, std::span<const double> hessians) {
  Histogram hist(layout);
  const auto binned = layout->bin_rows(x);
  std::vector<std::uint32_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0U);
  accumulate_histogram(hist, binned, rows, grads, hessians);
  return hist;
}

}  // namespace

Histogram build_histogram(std::span<const double> feature_values, std::span<const double> grads,
                          std::span<const double> hessians, std::size_t max_bins) {
  check_lengths(feature_values.size(), grads, hessians);
  FeatureMatrix x(static_cast<Eigen::Index>(feature_values.size()), 1);
  for (std::size_t i = 0; i < feature_values.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = feature_values[i];
  }
  return build_over_layout(std::make_shared<const BinLayout>(x, max_bins), x, grads, hessians);
}

Histogram build_histogram(const FeatureMatrix& x, std::span<const double> grads, std::span<const double> hessians,
                          std::size_t max_bins) {
  check_lengths(static_cast<std::size_t>(x.rows()), grads, hessians);
  return build_over_layout(std::make_shared<const BinLayout>(x, max_bins), x, grads, hessians);
}

// ---------------------------------------------------------------------------
// Split search

namespace {

bool admissible(const BinStats& left, const BinStats& right, const SplitConstraints& c) {
  return left.count >= c.min_data_in_leaf && right.count >= c.min_data_in_leaf &&
         left.hess_sum >= c.min_child_hess && right.hess_sum >= c.min_child_hess &&
         left.hess_sum + c.l2 > 0.0 && right.hess_sum + c.l2 > 0.0;
}

double gain_of(const BinStats& left, const BinStats& right, const SplitConstraints& c) {
  return split_gain(left.grad_sum, left.hess_sum, right.grad_sum, right.hess_sum, c.l2, c.min_split_gain);
}

}  // namespace

std::optional<SplitCandidate> best_split_exact(std::span<const double> grads, std::span<const double> hessians,
                                               const FeatureMatrix& x, const SplitConstraints& constraints) {
  const auto n = static_cast<std::size_t>(x.rows());
  check_lengths(n, grads, hessians);
  check_finite(grads, hessians);
  if (n < 2) {
    throw InvalidArgument("best_split_exact needs at least 2 samples");
  }
  BinStats total;
  for (std::size_t i = 0; i < n; ++i) {
    total += BinStats{grads[i], hessians[i], 1};
  }

  std::optional<SplitCandidate> best;
  std::vector<std::size_t> order(n);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(static_cast<Eigen::Index>(a), j) < x(static_cast<Eigen::Index>(b), j); });
    BinStats left;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      const std::size_t i = order[p];
      left += BinStats{grads[i], hessians[i], 1};
      const double v = x(static_cast<Eigen::Index>(i), j);
      const double next = x(static_cast<Eigen::Index>(order[p + 1]), j);
      if (!(v < next)) {
        continue;
      }
      BinStats right = total;
      right -= left;
      if (!admissible(left, right, constraints)) {
        continue;
      }
      const double gain = gain_of(left, right, constraints);
      if (!best || beats(gain, best->gain)) {
        best = SplitCandidate{static_cast<std::size_t>(j), midpoint_threshold(v, next), gain, left, right};
      }
    }
  }
  if (best && best->gain > 0.0) {
    return best;
  }
  return std::nullopt;
}

std::optional<SplitCandidate> best_split_histogram(const Histogram& hist, const SplitConstraints& constraints) {
  std::optional<SplitCandidate> best;
  for (std::size_t j = 0; j < hist.num_features(); ++j) {
    const auto bins = hist.bins(j);
    const auto edges = hist.upper_edges(j);
    const BinStats total = hist.totals(j);
    BinStats left;
    for (std::size_t k = 0; k + 1 < bins.size(); ++k) {
      left += bins[k];
      // Empty bins leave the partition unchanged; the first edge of a run of
      // identical partitions is the smallest threshold and wins ties.
      if (bins[k].count == 0) {
        continue;
      }
      BinStats right = total;
      right -= left;
      if (right.count == 0) {
        break;
      }
      if (!admissible(left, right, constraints)) {
        continue;
      }
      const double gain = gain_of(left, right, constraints);
      if (!best || beats(gain, best->gain)) {
        best = SplitCandidate{j, edges[k], gain, left, right};
      }
    }
  }
  if (best && best->gain > 0.0) {
    return best;
  }
  return std::nullopt;
}

}  // namespace driftboost
