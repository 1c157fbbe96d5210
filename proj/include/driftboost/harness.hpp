#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftboost/dataset.hpp"
#include "driftboost/metrics.hpp"
#include "driftboost/model_io.hpp"

namespace driftboost {

// ---------------------------------------------------------------------------
// Configuration
//
// Flat key = value text. '#' starts a comment, blank lines are ignored.
// Keys are checked against known_config_keys(); values are parsed on use.
// Layering: defaults < config file < command line.

class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  // "key=value"
  void set_assignment(const std::string& assignment);
  void set(const std::string& key, const std::string& value);
  // Entries of `other` replace entries of this config.
  void merge(const Config& other);

  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::optional<int> get_optional_int(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

const std::vector<std::string>& known_config_keys();

// DRIFTBOOST_OUT_DIR when set and non-empty, otherwise "driftboost-out".
std::filesystem::path default_output_dir();

// ---------------------------------------------------------------------------
// Model registry

struct ModelEntry {
  std::string id;            // short id used on the command line
  std::string display_name;  // row label in reports
  bool implemented = true;
};

// Implemented models first (gbdt gbr rf et knn ols ridge cart enet lasso),
// then the listed-but-unimplemented ones.
const std::vector<ModelEntry>& model_registry();
const ModelEntry& find_model(const std::string& id);  // throws InvalidArgument
std::vector<std::string> default_model_ids();        // every implemented id

// Fits model `id` with hyperparameters read from `cfg` (keys prefixed by the
// id, e.g. gbdt.num_leaves). `seed` drives every random choice of the fit.
AnyModel fit_model(const std::string& id, const Dataset& train, const Config& cfg, std::uint64_t seed);

GbdtParams gbdt_params_from_config(const Config& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Data

// `data` path when given, otherwise synth_generate(synth.n, synth.seed,
// synth.noise_sd). `schema` key selects a schema json (canonical otherwise).
FeatureSchema schema_from_config(const Config& cfg);
Dataset dataset_from_config(const Config& cfg);
SplitSpec split_from_config(const Config& cfg);

// ---------------------------------------------------------------------------
// Benchmark

enum class RowStatus { Ok, Failed, NotImplemented };

struct BenchmarkRow {
  std::string model_id;
  RowStatus status = RowStatus::Ok;
  MetricsReport metrics;  // meaningful when status == Ok
  std::string error;      // when status == Failed
};

struct BenchmarkReport {
  std::string label;  // opaque dataset label, e.g. BARE, FULL-MASONRY, PILOTIS
  std::vector<BenchmarkRow> rows;  // ranked Ok rows, then failures, then n/a rows
  std::uint64_t seed = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::string version;

  std::size_t succeeded() const;
};

const std::vector<std::string>& known_labels();

// Fits every configured model on the training part, scores it on the test
// part and ranks the results. Model i in the registry gets
// derive_seed(seed, i). Failures are recorded and do not stop the run.
BenchmarkReport run_benchmark(const Dataset& ds, const Config& cfg);

// Columns: Model, R², MAE, MSE, RMSE, MAPE, TT (Sec).
std::string report_to_csv(const BenchmarkReport& report);
nlohmann::json benchmark_report_to_json(const BenchmarkReport& report);
// Fixed-width terminal table, metrics to 4 decimals and TT to 3.
std::string report_to_text(const BenchmarkReport& report);

// report.csv, report.json, report.txt inside `dir`.
void write_report_files(const BenchmarkReport& report, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Diagnostics

enum class DiagnoseKind { PredictionError, Residuals, LearningCurve, ValidationCurve };

DiagnoseKind parse_diagnose_kind(const std::string& name);
std::string diagnose_kind_name(DiagnoseKind kind);

// A plot-ready numeric table.
struct Series {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string to_csv() const;
};

// (actual, predicted, identity, on_identity) per row of `eval`.
Series prediction_error_series(const AnyModel& model, const Dataset& eval);
// (predicted, residual = actual - predicted) per row of `eval`.
Series residual_series(const AnyModel& model, const Dataset& eval);
// (round, train_rmse, test_rmse) for rounds 1..K of an ensemble.
Series learning_curve_series(const AnyModel& model, const Dataset& train, const Dataset& test);
// (num_leaves, train_rmse, test_rmse): refits the ensemble's configuration on
// `train` for every grid value.
Series validation_curve_series(const AnyModel& model, const Dataset& train, const Dataset& test,
                               const std::vector<std::size_t>& grid = {2, 4, 8, 16, 31, 63});

}  // namespace driftboost
