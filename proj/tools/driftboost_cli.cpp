// driftboost command-line front end.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error. Failures print a
// single JSON line {"error": kind, "message": text} on stderr.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftboost/dataset.hpp"
#include "driftboost/error.hpp"
#include "driftboost/harness.hpp"
#include "driftboost/metrics.hpp"
#include "driftboost/model_io.hpp"
#include "driftboost/random.hpp"
#include "driftboost/version.hpp"

namespace fs = std::filesystem;
using namespace driftboost;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
  return code;
}

struct Common {
  std::optional<std::string> config_file;
  std::vector<std::string> assignments;
  std::optional<std::string> schema;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "Flat key = value config file");
  cmd->add_option("--set", c.assignments, "Override a config key (key=value), repeatable");
  cmd->add_option("--schema", c.schema, "Feature schema json (default: built-in seismic schema)");
}

// defaults < config file < --set < dedicated flags
Config layered_config(const Common& c, const std::vector<std::pair<std::string, std::optional<std::string>>>& flags) {
  Config cfg;
  if (c.config_file) {
    cfg = Config::load(*c.config_file);
  }
  for (const auto& a : c.assignments) {
    cfg.set_assignment(a);
  }
  if (c.schema) {
    cfg.set("schema", *c.schema);
  }
  for (const auto& [key, value] : flags) {
    if (value) cfg.set(key, *value);
  }
  return cfg;
}

template <typename T>
std::optional<std::string> str(const std::optional<T>& v) {
  if (!v) return std::nullopt;
  std::ostringstream out;
  out.precision(17);
  out << *v;
  return out.str();
}

fs::path output_dir(const Config& cfg) { return cfg.has("out_dir") ? fs::path(*cfg.get("out_dir")) : default_output_dir(); }

void emit(const std::optional<std::string>& out, const std::string& text) {
  if (out) {
    write_text_file(*out, text);
  } else {
    std::cout << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftboost: gradient boosting and baseline regressors for seismic damage data"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;

  // train
  auto* train = app.add_subcommand("train", "Fit one model on a CSV dataset and save it");
  std::string train_model;
  std::optional<std::string> train_data, train_out;
  std::optional<std::uint64_t> train_seed;
  train->add_option("--model", train_model, "Model id (gbdt, gbr, rf, et, knn, ols, ridge, cart, enet, lasso)")
      ->required();
  train->add_option("--data", train_data, "Training CSV")->required();
  train->add_option("--out", train_out, "Model file (default: <out dir>/model.json)");
  train->add_option("--seed", train_seed, "Master seed");
  add_common(train, common);

  // predict
  auto* pred = app.add_subcommand("predict", "Predict with a saved model");
  std::string pred_model, pred_data;
  std::optional<std::string> pred_out;
  pred->add_option("--model-file", pred_model, "Model file written by train")->required();
  pred->add_option("--data", pred_data, "CSV with the model's feature columns; the target column is optional")
      ->required();
  pred->add_option("--out", pred_out, "Output CSV (default: stdout)");
  add_common(pred, common);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score a saved model on a labelled CSV");
  std::string eval_model, eval_data;
  std::optional<std::string> eval_out;
  eval->add_option("--model-file", eval_model, "Model file written by train")->required();
  eval->add_option("--data", eval_data, "Labelled CSV")->required();
  eval->add_option("--out", eval_out, "Output json (default: stdout)");
  add_common(eval, common);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Fit and rank every configured model on a train/test split");
  std::optional<std::string> bench_data, bench_label, bench_models, bench_out;
  std::optional<std::uint64_t> bench_seed, bench_synth_seed;
  std::optional<std::size_t> bench_synth_n;
  std::optional<double> bench_noise, bench_test_fraction;
  bench->add_option("--data", bench_data, "Dataset CSV (default: synthetic data)");
  bench->add_option("--label", bench_label, "Dataset label, e.g. BARE, FULL-MASONRY, PILOTIS");
  bench->add_option("--models", bench_models, "Comma separated model ids, or 'all'");
  bench->add_option("--out-dir", bench_out, "Report directory (default: $DRIFTBOOST_OUT_DIR or ./driftboost-out)");
  bench->add_option("--seed", bench_seed, "Master seed");
  bench->add_option("--synth-n", bench_synth_n, "Synthetic row count");
  bench->add_option("--synth-seed", bench_synth_seed, "Synthetic data seed");
  bench->add_option("--noise-sd", bench_noise, "Synthetic noise standard deviation");
  bench->add_option("--test-fraction", bench_test_fraction, "Held-out fraction");
  add_common(bench, common);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset in the seismic schema");
  std::size_t synth_n = 0;
  std::uint64_t synth_seed = 1;
  double synth_noise = 0.1;
  std::optional<std::string> synth_out;
  synth->add_option("--n", synth_n, "Row count")->required();
  synth->add_option("--seed", synth_seed, "Seed")->capture_default_str();
  synth->add_option("--noise-sd", synth_noise, "Noise standard deviation")->capture_default_str();
  synth->add_option("--out", synth_out, "Output CSV (default: <out dir>/synth.csv)");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "Emit plot-ready diagnostic series as CSV");
  std::string diag_model, diag_data, diag_kind;
  std::optional<std::string> diag_out;
  std::vector<std::size_t> diag_grid;
  bool diag_all_rows = false;
  diag->add_option("--model-file", diag_model, "Model file written by train")->required();
  diag->add_option("--data", diag_data, "Labelled CSV, split into train and test parts")->required();
  diag->add_option("--kind", diag_kind, "prediction_error, residuals, learning_curve or validation_curve")
      ->required();
  diag->add_option("--grid", diag_grid, "num_leaves grid for validation_curve")->delimiter(',');
  diag->add_flag("--all-rows", diag_all_rows, "Score every row instead of the test part");
  diag->add_option("--out", diag_out, "Output CSV (default: stdout)");
  add_common(diag, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    return report_error("usage", e.what(), kExitUsage);
  }

  try {
    if (train->parsed()) {
      const Config cfg = layered_config(common, {{"data", train_data}, {"seed", str(train_seed)}});
      const ModelEntry& entry = find_model(train_model);
      const FeatureSchema schema = schema_from_config(cfg);
      const Dataset ds = load_csv(*cfg.get("data"), schema);
      const std::uint64_t seed = cfg.get_u64("seed", 42);
      std::size_t index = 0;
      while (model_registry()[index].id != entry.id) ++index;
      const auto start = std::chrono::steady_clock::now();
      const AnyModel model = fit_model(entry.id, ds, cfg, derive_seed(seed, index));
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      ModelMetadata meta;
      meta.model_id = entry.id;
      meta.kind = model_kind(model);
      meta.schema_hash = schema.hash();
      meta.feature_names = schema.feature_names();
      meta.target_name = schema.target_name();
      meta.seed = seed;
      meta.training_time_s = seconds;
      meta.training_rows = static_cast<std::size_t>(ds.rows());
      meta.version = kVersion;
      const fs::path out = train_out ? fs::path(*train_out) : output_dir(cfg) / "model.json";
      save_model(model, meta, out);
      std::cout << nlohmann::json{{"model", out.string()}, {"metadata", metadata_path(out).string()},
                                  {"kind", meta.kind}, {"training_time_s", seconds}}
                       .dump()
                << std::endl;
    } else if (pred->parsed()) {
      const Config cfg = layered_config(common, {});
      const LoadedModel loaded = load_model(pred_model);
      const FeatureSchema schema = schema_from_config(cfg);
      check_schema(loaded.metadata, schema);
      const Dataset ds = load_csv(pred_data, schema, TargetColumn::Optional);
      const Vector y_hat = predict_any(loaded.model, ds.features());
      Series s{{"prediction"}, {}};
      for (Eigen::Index i = 0; i < y_hat.size(); ++i) s.rows.push_back({y_hat(i)});
      emit(pred_out, s.to_csv());
    } else if (eval->parsed()) {
      const Config cfg = layered_config(common, {});
      const LoadedModel loaded = load_model(eval_model);
      const FeatureSchema schema = schema_from_config(cfg);
      check_schema(loaded.metadata, schema);
      const Dataset ds = load_csv(eval_data, schema);
      const MetricsReport r = evaluate(predict_any(loaded.model, ds.features()), ds.target(),
                                       find_model(loaded.metadata.model_id).display_name,
                                       loaded.metadata.training_time_s);
      emit(eval_out, report_to_json(r).dump(2) + "\n");
    } else if (bench->parsed()) {
      const Config cfg = layered_config(common, {{"data", bench_data},
                                                 {"label", bench_label},
                                                 {"models", bench_models},
                                                 {"out_dir", bench_out},
                                                 {"seed", str(bench_seed)},
                                                 {"synth.n", str(bench_synth_n)},
                                                 {"synth.seed", str(bench_synth_seed)},
                                                 {"synth.noise_sd", str(bench_noise)},
                                                 {"test_fraction", str(bench_test_fraction)}});
      const Dataset ds = dataset_from_config(cfg);
      const BenchmarkReport report = run_benchmark(ds, cfg);
      write_report_files(report, output_dir(cfg));
      std::cout << report_to_text(report);
      if (report.succeeded() == 0) {
        return report_error("all_models_failed", "every model failed; see report.json", kExitFailure);
      }
    } else if (synth->parsed()) {
      if (synth_n < 1) {
        return report_error("usage", "--n must be >= 1", kExitUsage);
      }
      if (!(synth_noise >= 0.0)) {
        return report_error("usage", "--noise-sd must be >= 0", kExitUsage);
      }
      const fs::path out = synth_out ? fs::path(*synth_out) : default_output_dir() / "synth.csv";
      write_text_file(out, to_csv_string(synth_generate(synth_n, synth_seed, synth_noise)));
    } else if (diag->parsed()) {
      Config cfg = layered_config(common, {});
      const DiagnoseKind kind = parse_diagnose_kind(diag_kind);
      const LoadedModel loaded = load_model(diag_model);
      const FeatureSchema schema = schema_from_config(cfg);
      check_schema(loaded.metadata, schema);
      const Dataset ds = load_csv(diag_data, schema);
      const TrainTest tt = train_test_split(ds, split_from_config(cfg));
      const Dataset& eval_set = diag_all_rows ? ds : tt.test;
      Series s;
      switch (kind) {
        case DiagnoseKind::PredictionError:
          s = prediction_error_series(loaded.model, eval_set);
          break;
        case DiagnoseKind::Residuals:
          s = residual_series(loaded.model, eval_set);
          break;
        case DiagnoseKind::LearningCurve:
          s = learning_curve_series(loaded.model, tt.train, tt.test);
          break;
        case DiagnoseKind::ValidationCurve:
          s = diag_grid.empty() ? validation_curve_series(loaded.model, tt.train, tt.test)
                                : validation_curve_series(loaded.model, tt.train, tt.test, diag_grid);
          break;
      }
      emit(diag_out, s.to_csv());
    }
  } catch (const InvalidArgument& e) {
    return report_error(e.kind(), e.what(), kExitUsage);
  } catch (const Error& e) {
    return report_error(e.kind(), e.what(), kExitFailure);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitFailure);
  }
  return kExitOk;
}
