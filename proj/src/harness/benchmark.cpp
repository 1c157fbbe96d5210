#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "driftboost/baselines.hpp"
#include "driftboost/boosting.hpp"
#include "driftboost/error.hpp"
#include "driftboost/harness.hpp"
#include "driftboost/random.hpp"
#include "driftboost/version.hpp"

namespace driftboost {

using nlohmann::json;

const std::vector<ModelEntry>& model_registry() {
  static const std::vector<ModelEntry> registry = {
      {"gbdt", "LightGBM-style GBDT", true},
      {"gbr", "Gradient Boosting Regressor", true},
      {"rf", "Random Forest Regressor", true},
      {"et", "Extra Trees Regressor", true},
      {"knn", "k-Nearest Neighbors Regressor", true},
      {"ols", "Linear Regression", true},
      {"ridge", "Ridge Regression", true},
      {"cart", "Decision Tree Regressor", true},
      {"enet", "Elastic Net", true},
      {"lasso", "Lasso Regression", true},
      {"bayes_ridge", "Bayesian Ridge", false},
      {"adaboost", "AdaBoost Regressor", false},
      {"omp", "Orthogonal Matching Pursuit", false},
      {"huber", "Huber Regressor", false},
      {"lars", "Least Angle Regression", false},
  };
  return registry;
}

const ModelEntry& find_model(const std::string& id) {
  for (const auto& e : model_registry()) {
    if (e.id == id) {
      return e;
    }
  }
  std::string known;
  for (const auto& e : model_registry()) {
    known += (known.empty() ? "" : ", ") + e.id;
  }
  throw InvalidArgument("unknown model '" + id + "' (known: " + known + ")");
}

std::vector<std::string> default_model_ids() {
  std::vector<std::string> ids;
  for (const auto& e : model_registry()) {
    if (e.implemented) ids.push_back(e.id);
  }
  return ids;
}

namespace {

std::size_t registry_index(const std::string& id) {
  const auto& reg = model_registry();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    if (reg[i].id == id) return i;
  }
  throw InvalidArgument("unknown model '" + id + "'");
}

CartParams cart_params(const Config& cfg, const std::string& prefix, std::size_t default_min_leaf = 1) {
  CartParams p;
  p.max_leaves = cfg.get_size(prefix + "max_leaves", p.max_leaves);
  p.min_samples_leaf = cfg.get_size(prefix + "min_samples_leaf", default_min_leaf);
  p.max_depth = cfg.get_optional_int(prefix + "max_depth");
  if (p.max_leaves < 1) throw InvalidArgument(prefix + "max_leaves must be >= 1");
  if (p.min_samples_leaf < 1) throw InvalidArgument(prefix + "min_samples_leaf must be >= 1");
  if (p.max_depth && *p.max_depth < 0) throw InvalidArgument(prefix + "max_depth must be >= 0");
  return p;
}

ResidualBoostingParams gbr_params(const Config& cfg) {
  ResidualBoostingParams p;
  p.num_rounds = cfg.get_size("gbr.num_rounds", 100);
  p.learning_rate = cfg.get_double("gbr.learning_rate", 0.1);
  p.tree = cart_params(cfg, "gbr.");
  if (!cfg.has("gbr.max_depth")) p.tree.max_depth = 3;
  p.ccp_alpha = cfg.get_double("gbr.ccp_alpha", 0.0);
  p.validate();
  return p;
}

ForestParams forest_params(const Config& cfg, const std::string& id, std::uint64_t seed) {
  ForestParams p;
  const std::string prefix = id + ".";
  p.mode = id == "et" ? ForestMode::ExtraTrees : ForestMode::RandomForest;
  p.num_trees = cfg.get_size(prefix + "num_trees", 100);
  p.feature_subsample = cfg.get_double(prefix + "feature_subsample", 1.0);
  p.tree = cart_params(cfg, prefix);
  p.seed = seed;
  if (p.num_trees < 1) throw InvalidArgument(prefix + "num_trees must be >= 1");
  if (!(p.feature_subsample > 0.0 && p.feature_subsample <= 1.0)) {
    throw InvalidArgument(prefix + "feature_subsample must lie in (0, 1]");
  }
  return p;
}

double nonneg(const Config& cfg, const std::string& key, double fallback) {
  const double v = cfg.get_double(key, fallback);
  if (v < 0.0) throw InvalidArgument(key + " must be >= 0");
  return v;
}

// Parses and validates every hyperparameter of `id` without fitting.
void check_model_config(const std::string& id, const Config& cfg) {
  if (id == "gbdt") {
    gbdt_params_from_config(cfg, 0).validate();
  } else if (id == "gbr") {
    gbr_params(cfg);
  } else if (id == "rf" || id == "et") {
    forest_params(cfg, id, 0);
  } else if (id == "cart") {
    cart_params(cfg, "cart.");
    nonneg(cfg, "cart.ccp_alpha", 0.0);
  } else if (id == "knn") {
    if (cfg.get_size("knn.k", 5) < 1) throw InvalidArgument("knn.k must be >= 1");
  } else if (id == "ridge") {
    nonneg(cfg, "ridge.l2", 1.0);
  } else if (id == "enet" || id == "lasso") {
    nonneg(cfg, id + ".l1", 0.01);
    if (id == "enet") nonneg(cfg, "enet.l2", 0.01);
    if (!(cfg.get_double(id + ".tol", 1e-8) > 0.0)) throw InvalidArgument(id + ".tol must be > 0");
    cfg.get_size(id + ".max_iter", 10000);
  }
}

std::string format_shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

const char* status_name(RowStatus s) {
  switch (s) {
    case RowStatus::Ok:
      return "ok";
    case RowStatus::Failed:
      return "failed";
    case RowStatus::NotImplemented:
      return "n/a";
  }
  return "?";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const std::vector<std::string> kColumns = {"Model", "R²", "MAE", "MSE", "RMSE", "MAPE", "TT (Sec)"};

}  // namespace

GbdtParams gbdt_params_from_config(const Config& cfg, std::uint64_t seed) {
  GbdtParams p;
  p.num_rounds = cfg.get_size("gbdt.num_rounds", 100);
  p.learning_rate = cfg.get_double("gbdt.learning_rate", 0.1);
  p.num_leaves = cfg.get_size("gbdt.num_leaves", 31);
  p.max_depth = cfg.get_optional_int("gbdt.max_depth");
  p.l2_reg = cfg.get_double("gbdt.l2_reg", 0.0);
  p.min_split_gain = cfg.get_double("gbdt.min_split_gain", 0.0);
  p.max_bins = cfg.get_size("gbdt.max_bins", 255);
  p.min_child_hess = cfg.get_double("gbdt.min_child_hess", 1e-3);
  p.min_data_in_leaf = cfg.get_size("gbdt.min_data_in_leaf", 20);
  if (cfg.get_bool("gbdt.goss", false)) {
    GossParams g;
    g.top_rate = cfg.get_double("gbdt.goss_top_rate", g.top_rate);
    g.other_rate = cfg.get_double("gbdt.goss_other_rate", g.other_rate);
    p.goss = g;
  }
  const std::string growth = cfg.get_string("gbdt.growth", "leafwise");
  if (growth == "leafwise") {
    p.growth = GrowthPolicy::LeafWise;
  } else if (growth == "depthwise") {
    p.growth = GrowthPolicy::DepthWise;
  } else {
    throw InvalidArgument("gbdt.growth must be 'leafwise' or 'depthwise', got '" + growth + "'");
  }
  p.seed = seed;
  return p;
}

AnyModel fit_model(const std::string& id, const Dataset& train, const Config& cfg, std::uint64_t seed) {
  const ModelEntry& entry = find_model(id);
  if (!entry.implemented) {
    throw InvalidArgument("model '" + id + "' (" + entry.display_name + ") is not implemented");
  }
  check_model_config(id, cfg);
  if (id == "gbdt") return fit_gbdt(train, gbdt_params_from_config(cfg, seed));
  if (id == "gbr") return fit_residual_boosting(train, gbr_params(cfg));
  if (id == "rf" || id == "et") return fit_forest(train, forest_params(cfg, id, seed));
  if (id == "cart") {
    RegressionTree tree = fit_cart(train, cart_params(cfg, "cart."));
    const double alpha = cfg.get_double("cart.ccp_alpha", 0.0);
    return alpha > 0.0 ? prune_ccp(tree, train, alpha) : tree;
  }
  if (id == "knn") return fit_knn(train, cfg.get_size("knn.k", 5));
  if (id == "ols") return fit_ols(train);
  if (id == "ridge") return fit_ridge(train, cfg.get_double("ridge.l2", 1.0));
  if (id == "enet") {
    return fit_elastic_net(train, cfg.get_double("enet.l1", 0.01), cfg.get_double("enet.l2", 0.01),
                           cfg.get_double("enet.tol", 1e-8), cfg.get_size("enet.max_iter", 10000));
  }
  if (id == "lasso") {
    return fit_lasso(train, cfg.get_double("lasso.l1", 0.01), cfg.get_double("lasso.tol", 1e-8),
                     cfg.get_size("lasso.max_iter", 10000));
  }
  throw InvalidArgument("no fitter registered for model '" + id + "'");
}

const std::vector<std::string>& known_labels() {
  static const std::vector<std::string> labels = {"BARE", "FULL-MASONRY", "PILOTIS"};
  return labels;
}

std::size_t BenchmarkReport::succeeded() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const BenchmarkRow& r) { return r.status == RowStatus::Ok; }));
}

BenchmarkReport run_benchmark(const Dataset& ds, const Config& cfg) {
  std::vector<std::string> ids;
  const std::string models = cfg.get_string("models", "all");
  if (models == "all") {
    for (const auto& e : model_registry()) ids.push_back(e.id);
  } else {
    std::stringstream in(models);
    std::string id;
    while (std::getline(in, id, ',')) {
      if (id.empty()) continue;
      find_model(id);
      if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
        throw InvalidArgument("model '" + id + "' listed twice");
      }
      ids.push_back(id);
    }
  }
  if (ids.empty()) {
    throw InvalidArgument("no models selected");
  }
  for (const auto& id : ids) {
    if (find_model(id).implemented) check_model_config(id, cfg);
  }

  BenchmarkReport report;
  report.label = cfg.get_string("label", "BARE");
  report.seed = cfg.get_u64("seed", 42);
  report.version = kVersion;
  const TrainTest tt = train_test_split(ds, split_from_config(cfg));
  report.train_rows = static_cast<std::size_t>(tt.train.rows());
  report.test_rows = static_cast<std::size_t>(tt.test.rows());

  std::vector<BenchmarkRow> ok;
  std::vector<BenchmarkRow> failed;
  std::vector<BenchmarkRow> missing;
  for (const auto& id : ids) {
    const ModelEntry& entry = find_model(id);
    BenchmarkRow row;
    row.model_id = id;
    row.metrics.model_name = entry.display_name;
    if (!entry.implemented) {
      row.status = RowStatus::NotImplemented;
      missing.push_back(std::move(row));
      continue;
    }
    try {
      const std::uint64_t seed = derive_seed(report.seed, registry_index(id));
      const auto start = std::chrono::steady_clock::now();
      const AnyModel model = fit_model(id, tt.train, cfg, seed);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      row.metrics = evaluate(predict_any(model, tt.test.features()), tt.test.target(), entry.display_name, seconds);
      ok.push_back(std::move(row));
    } catch (const std::exception& e) {
      row.status = RowStatus::Failed;
      row.error = e.what();
      failed.push_back(std::move(row));
    }
  }

  std::vector<MetricsReport> metrics;
  for (const auto& r : ok) metrics.push_back(r.metrics);
  for (const auto& m : rank_models(std::move(metrics))) {
    const auto it = std::find_if(ok.begin(), ok.end(),
                                 [&](const BenchmarkRow& r) { return r.metrics.model_name == m.model_name; });
    report.rows.push_back(*it);
  }
  report.rows.insert(report.rows.end(), failed.begin(), failed.end());
  report.rows.insert(report.rows.end(), missing.begin(), missing.end());
  return report;
}

std::string report_to_csv(const BenchmarkReport& report) {
  std::string out;
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    out += (c ? "," : "") + kColumns[c];
  }
  out += '\n';
  for (const auto& row : report.rows) {
    out += csv_field(row.metrics.model_name);
    if (row.status == RowStatus::Ok) {
      const auto& m = row.metrics;
      for (double v : {m.r2, m.mae, m.mse, m.rmse, m.mape}) {
        out += ',' + format_shortest(v);
      }
      out += ',' + format_fixed(m.training_time_s, 3);
    } else {
      for (std::size_t c = 1; c < kColumns.size(); ++c) {
        out += ',';
        out += status_name(row.status);
      }
    }
    out += '\n';
  }
  return out;
}

json benchmark_report_to_json(const BenchmarkReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r = {{"model", row.metrics.model_name}, {"id", row.model_id}, {"status", status_name(row.status)}};
    if (row.status == RowStatus::Ok) {
      r["metrics"] = report_to_json(row.metrics);
    }
    if (row.status == RowStatus::Failed) {
      r["error"] = row.error;
    }
    rows.push_back(std::move(r));
  }
  return {{"label", report.label},
          {"version", report.version},
          {"seed", std::to_string(report.seed)},
          {"train_rows", report.train_rows},
          {"test_rows", report.test_rows},
          {"columns", kColumns},
          {"rows", std::move(rows)}};
}

std::string report_to_text(const BenchmarkReport& report) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(kColumns);
  for (const auto& row : report.rows) {
    std::vector<std::string> line = {row.metrics.model_name};
    if (row.status == RowStatus::Ok) {
      const auto& m = row.metrics;
      for (double v : {m.r2, m.mae, m.mse, m.rmse, m.mape}) line.push_back(format_fixed(v, 4));
      line.push_back(format_fixed(m.training_time_s, 3));
    } else {
      line.resize(kColumns.size(), status_name(row.status));
    }
    cells.push_back(std::move(line));
  }
  // display width: "R²" is two glyphs but three bytes
  auto width = [](const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
  };
  std::vector<std::size_t> widths(kColumns.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], width(line[c]));
  }
  std::string out = "Performance metrics (" + report.label + "), train " + std::to_string(report.train_rows) +
                    " rows, test " + std::to_string(report.test_rows) + " rows, seed " +
                    std::to_string(report.seed) + "\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& line = cells[i];
    for (std::size_t c = 0; c < line.size(); ++c) {
      const std::string pad(widths[c] - width(line[c]), ' ');
      out += c == 0 ? line[c] + pad : "  " + pad + line[c];
    }
    out += '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < widths.size(); ++c) total += widths[c] + (c ? 2 : 0);
      out += std::string(total, '-') + '\n';
    }
  }
  for (const auto& row : report.rows) {
    if (row.status == RowStatus::Failed) {
      out += "failed: " + row.model_id + ": " + row.error + "\n";
    }
  }
  return out;
}

void write_report_files(const BenchmarkReport& report, const std::filesystem::path& dir) {
  write_text_file(dir / "report.csv", report_to_csv(report));
  write_text_file(dir / "report.json", benchmark_report_to_json(report).dump(2) + "\n");
  write_text_file(dir / "report.txt", report_to_text(report));
}

}  // namespace driftboost
