#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "driftboost/baselines.hpp"
#include "driftboost/boosting.hpp"
#include "driftboost/dataset.hpp"
#include "driftboost/tree.hpp"

namespace driftboost {

using AnyModel = std::variant<Ensemble, RegressionTree, ForestModel, LinearModel, KnnModel>;

// "ensemble", "tree", "forest", "linear" or "knn".
std::string model_kind(const AnyModel& model);
std::size_t model_num_features(const AnyModel& model);
Vector predict_any(const AnyModel& model, const FeatureMatrix& x);

// {"format": "driftboost-model", "version": 1, "kind": ..., "model": {...}}
nlohmann::json model_to_json(const AnyModel& model);
AnyModel model_from_json(const nlohmann::json& j);

// Sidecar written next to every model file.
struct ModelMetadata {
  std::string model_id;  // registry id such as "gbdt"
  std::string kind;
  std::uint64_t schema_hash = 0;
  std::vector<std::string> feature_names;
  std::string target_name;
  std::uint64_t seed = 0;
  double training_time_s = 0.0;
  std::size_t training_rows = 0;
  std::string version;
};

nlohmann::json metadata_to_json(const ModelMetadata& meta);
ModelMetadata metadata_from_json(const nlohmann::json& j);

// model.json -> model.meta.json
std::filesystem::path metadata_path(const std::filesystem::path& model_path);

struct LoadedModel {
  AnyModel model;
  ModelMetadata metadata;
};

void save_model(const AnyModel& model, const ModelMetadata& meta, const std::filesystem::path& path);
LoadedModel load_model(const std::filesystem::path& path);

// Throws SchemaError when the dataset layout differs from the one the model
// was trained on.
void check_schema(const ModelMetadata& meta, const FeatureSchema& schema);

std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace driftboost
