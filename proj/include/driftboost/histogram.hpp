#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "driftboost/dataset.hpp"

namespace driftboost {

struct BinStats {
  double grad_sum = 0.0;
  double hess_sum = 0.0;
  std::size_t count = 0;

  BinStats& operator+=(const BinStats& o) {
    grad_sum += o.grad_sum;
    hess_sum += o.hess_sum;
    count += o.count;
    return *this;
  }
  BinStats& operator-=(const BinStats& o) {
    grad_sum -= o.grad_sum;
    hess_sum -= o.hess_sum;
    count -= o.count;
    return *this;
  }
};

// Quantile bin boundaries for one feature, stored as the inclusive upper edge
// of each bin: bin k holds values in (edge[k-1], edge[k]]. Edges are strictly
// increasing; every edge but the last lies halfway between two consecutive
// distinct training values and the last edge is the training maximum.
// Values above the last edge fall in the last bin.
std::vector<double> quantile_bin_edges(std::span<const double> values, std::size_t max_bins);

std::size_t bin_index(std::span<const double> upper_edges, double value);

// Bin boundaries for every feature of a matrix, computed once and shared by
// all histograms built against it.
class BinLayout {
 public:
  BinLayout(const FeatureMatrix& x, std::size_t max_bins);
  explicit BinLayout(std::vector<std::vector<double>> upper_edges);

  std::size_t num_features() const { return edges_.size(); }
  std::size_t num_bins(std::size_t feature) const { return edges_[feature].size(); }
  std::size_t total_bins() const { return offsets_.back(); }
  std::size_t offset(std::size_t feature) const { return offsets_[feature]; }
  std::span<const double> upper_edges(std::size_t feature) const { return edges_[feature]; }

  // Per-row bin ids, row-major (n x d), for fast accumulation.
  std::vector<std::uint16_t> bin_rows(const FeatureMatrix& x) const;

 private:
  std::vector<std::vector<double>> edges_;
  std::vector<std::size_t> offsets_;
};

class Histogram {
 public:
  explicit Histogram(std::shared_ptr<const BinLayout> layout);

  const BinLayout& layout() const { return *layout_; }
  const std::shared_ptr<const BinLayout>& layout_ptr() const { return layout_; }
  std::size_t num_features() const { return layout_->num_features(); }
  std::span<const double> upper_edges(std::size_t feature) const { return layout_->upper_edges(feature); }

  std::span<const BinStats> bins(std::size_t feature) const {
    return {bins_.data() + layout_->offset(feature), layout_->num_bins(feature)};
  }
  std::span<BinStats> bins(std::size_t feature) {
    return {bins_.data() + layout_->offset(feature), layout_->num_bins(feature)};
  }
  std::span<BinStats> all_bins() { return bins_; }
  std::span<const BinStats> all_bins() const { return bins_; }

  // Sum over the bins of one feature; equal across features for a valid histogram.
  BinStats totals(std::size_t feature = 0) const;

  // this -= other, bin by bin (sibling subtraction).
  void subtract(const Histogram& other);

 private:
  std::shared_ptr<const BinLayout> layout_;
  std::vector<BinStats> bins_;
};

// Single-feature histogram with quantile bins computed from the column itself.
Histogram build_histogram(std::span<const double> feature_values, std::span<const double> grads,
                          std::span<const double> hessians, std::size_t max_bins);

// All columns of x, each with its own quantile bins.
Histogram build_histogram(const FeatureMatrix& x, std::span<const double> grads, std::span<const double> hessians,
                          std::size_t max_bins);

// Accumulate the given rows into a histogram over a fixed layout, using
// precomputed row-major bin ids. Rows are visited in the order given.
void accumulate_histogram(Histogram& hist, std::span<const std::uint16_t> binned_rows,
                          std::span<const std::uint32_t> rows, std::span<const double> grads,
                          std::span<const double> hessians);

// Regularization and admissibility constraints shared by split searches.
struct SplitConstraints {
  double l2 = 0.0;              // lambda
  double min_split_gain = 0.0;  // gamma
  double min_child_hess = 1e-3;
  std::size_t min_data_in_leaf = 1;
};

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
  BinStats left;
  BinStats right;
};

// Best split by the regularized gain over all features and every midpoint
// between consecutive distinct values. Absent when no admissible split has
// positive gain. Ties: lowest feature, then smallest threshold.
std::optional<SplitCandidate> best_split_exact(std::span<const double> grads, std::span<const double> hessians,
                                               const FeatureMatrix& x, const SplitConstraints& constraints);

// Same contract with thresholds restricted to bin edges.
std::optional<SplitCandidate> best_split_histogram(const Histogram& hist, const SplitConstraints& constraints);

// Threshold strictly between a < b that sends a left and b right.
double midpoint_threshold(double a, double b);

}  // namespace driftboost
