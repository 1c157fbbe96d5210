#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace driftboost {

// Row-major so that one sample is contiguous; this is what prediction walks.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double x) const { return x >= lower && x <= upper; }
};

struct FeatureSpec {
  std::string name;
  std::string unit;
  std::optional<Interval> physical_range;
};

// Ordered feature list plus the target column. Construction validates that
// names are unique and every range has lower <= upper.
class FeatureSchema {
 public:
  FeatureSchema(std::vector<FeatureSpec> features, std::string target_name, std::string target_unit = "");

  const std::vector<FeatureSpec>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  const FeatureSpec& operator[](std::size_t j) const { return features_[j]; }
  const std::string& target_name() const { return target_name_; }
  const std::string& target_unit() const { return target_unit_; }

  std::optional<std::size_t> index_of(const std::string& name) const;
  std::vector<std::string> feature_names() const;

  // FNV-1a over names, units and ranges; guards model files against being
  // applied to data with a different layout.
  std::uint64_t hash() const;

  bool operator==(const FeatureSchema& other) const;

 private:
  std::vector<FeatureSpec> features_;
  std::string target_name_;
  std::string target_unit_;
};

// The 18-feature seismic damage schema: 4 structural parameters followed by
// 14 ground-motion parameters, target MIDR.
const FeatureSchema& canonical_schema();

FeatureSchema load_schema_json(const std::filesystem::path& path);
void save_schema_json(const FeatureSchema& schema, const std::filesystem::path& path);
std::string schema_to_json_string(const FeatureSchema& schema);
FeatureSchema schema_from_json_string(const std::string& text);

// Immutable table of finite reals. n >= 1 and the column count matches the schema.
class Dataset {
 public:
  Dataset(FeatureSchema schema, FeatureMatrix features, Vector target);

  const FeatureSchema& schema() const { return schema_; }
  const FeatureMatrix& features() const { return features_; }
  const Vector& target() const { return target_; }
  Eigen::Index rows() const { return features_.rows(); }
  Eigen::Index cols() const { return features_.cols(); }

  Dataset subset(const std::vector<std::size_t>& row_indices) const;
  // Same features, different target (e.g. boosting residuals).
  Dataset with_target(Vector target) const;

 private:
  FeatureSchema schema_;
  FeatureMatrix features_;
  Vector target_;
};

// Reads a UTF-8 comma-separated file whose header holds every schema feature
// plus the target, in any order. Columns are reordered to schema order.
// With TargetColumn::Optional a file without the target column loads with
// an all-zero target (prediction inputs).
enum class TargetColumn { Required, Optional };

Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                 TargetColumn target = TargetColumn::Required);
Dataset parse_csv(const std::string& text, const FeatureSchema& schema,
                  TargetColumn target = TargetColumn::Required);

// Canonical writer: schema order, target last, shortest round-trip decimal form.
void write_csv(const Dataset& ds, const std::filesystem::path& path);
std::string to_csv_string(const Dataset& ds);

struct RangeWarning {
  std::size_t row;  // 0-based
  std::size_t feature;
  double value;
  std::string message;
};

std::vector<RangeWarning> validate_ranges(const Dataset& ds);

// Planted target used by the synthetic generator:
//   s    = 1.5 u(PGA) + log10(1 + 9 u(HI)) + 0.8 u(PGA) u(H_tot)
//          - 0.35 (u(n_vx) + u(n_vy)) + 0.3 u(e_0)
//   MIDR = 0.25 exp(s)
// where u(.) maps a feature linearly from its canonical range onto [0, 1].
double planted_midr(Eigen::Ref<const Eigen::RowVectorXd> row);

// n rows, features uniform within the canonical ranges, target
// |planted_midr + N(0, noise_sd^2)|. Pure function of its arguments.
Dataset synth_generate(std::size_t n, std::uint64_t seed, double noise_sd);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
};

struct TrainTest {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// Seeded shuffle; test size = round(n * test_fraction) clamped to [1, n - 1].
// Each part keeps the original row order.
TrainTest train_test_split(const Dataset& ds, const SplitSpec& spec);

struct FeatureStats {
  double mean;
  double sd;  // population convention (divide by n)
  double min;
  double max;
};

std::vector<FeatureStats> feature_stats(const Dataset& ds);
std::vector<FeatureStats> column_stats(const FeatureMatrix& x);

}  // namespace driftboost
