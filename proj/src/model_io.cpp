#include "driftboost/model_io.hpp"

#include <fstream>
#include <sstream>

#include "driftboost/error.hpp"

namespace driftboost {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr const char* kFormat = "driftboost-model";
constexpr int kFormatVersion = 1;

}  // namespace

std::string model_kind(const AnyModel& model) {
  return std::visit(Overloaded{[](const Ensemble&) { return "ensemble"; },
                               [](const RegressionTree&) { return "tree"; },
                               [](const ForestModel&) { return "forest"; },
                               [](const LinearModel&) { return "linear"; },
                               [](const KnnModel&) { return "knn"; }},
                    model);
}

std::size_t model_num_features(const AnyModel& model) {
  return std::visit(
      Overloaded{[](const Ensemble& m) { return m.num_features; },
                 [](const RegressionTree& m) { return m.num_features(); },
                 [](const ForestModel& m) { return m.num_features; },
                 [](const LinearModel& m) { return static_cast<std::size_t>(m.coefficients.size()); },
                 [](const KnnModel& m) { return static_cast<std::size_t>(m.train.cols()); }},
      model);
}

Vector predict_any(const AnyModel& model, const FeatureMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != model_num_features(model)) {
    throw InvalidArgument("model expects " + std::to_string(model_num_features(model)) + " features, got " +
                          std::to_string(x.cols()));
  }
  return std::visit(Overloaded{[&](const Ensemble& m) { return predict(m, x); },
                               [&](const RegressionTree& m) { return predict_tree(m, x); },
                               [&](const ForestModel& m) { return predict_forest(m, x); },
                               [&](const LinearModel& m) { return predict_linear(m, x); },
                               [&](const KnnModel& m) { return predict_knn(m, x); }},
                    model);
}

json model_to_json(const AnyModel& model) {
  json body = std::visit(Overloaded{[](const Ensemble& m) { return ensemble_to_json(m); },
                                    [](const RegressionTree& m) { return tree_to_json(m); },
                                    [](const ForestModel& m) { return forest_to_json(m); },
                                    [](const LinearModel& m) { return linear_to_json(m); },
                                    [](const KnnModel& m) { return knn_to_json(m); }},
                         model);
  return {{"format", kFormat}, {"version", kFormatVersion}, {"kind", model_kind(model)}, {"model", std::move(body)}};
}

AnyModel model_from_json(const json& j) {
  std::string kind;
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw SchemaError("not a driftboost model file");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw SchemaError("unsupported model file version " + j.at("version").dump());
    }
    kind = j.at("kind").get<std::string>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  }
  if (!j.contains("model")) {
    throw SchemaError("malformed model file: missing 'model'");
  }
  const json& body = j.at("model");
  try {
    if (kind == "ensemble") return ensemble_from_json(body);
    if (kind == "tree") return tree_from_json(body);
    if (kind == "forest") return forest_from_json(body);
    if (kind == "linear") return linear_from_json(body);
    if (kind == "knn") return knn_from_json(body);
  } catch (const InvalidArgument& e) {
    // structural validation of the decoded model failed: the file is corrupt
    throw SchemaError(std::string("invalid model in file: ") + e.what());
  }
  throw SchemaError("unknown model kind '" + kind + "'");
}

json metadata_to_json(const ModelMetadata& meta) {
  return {{"model_id", meta.model_id},
          {"kind", meta.kind},
          // as a string: the full 64-bit range does not survive every JSON reader
          {"schema_hash", std::to_string(meta.schema_hash)},
          {"feature_names", meta.feature_names},
          {"target_name", meta.target_name},
          {"seed", std::to_string(meta.seed)},
          {"training_time_s", meta.training_time_s},
          {"training_rows", meta.training_rows},
          {"version", meta.version}};
}

ModelMetadata metadata_from_json(const json& j) {
  try {
    ModelMetadata m;
    m.model_id = j.at("model_id").get<std::string>();
    m.kind = j.at("kind").get<std::string>();
    m.schema_hash = std::stoull(j.at("schema_hash").get<std::string>());
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.target_name = j.at("target_name").get<std::string>();
    m.seed = std::stoull(j.at("seed").get<std::string>());
    m.training_time_s = j.at("training_time_s").get<double>();
    m.training_rows = j.at("training_rows").get<std::size_t>();
    m.version = j.at("version").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model metadata: ") + e.what());
  } catch (const std::logic_error& e) {
    throw SchemaError(std::string("malformed model metadata: ") + e.what());
  }
}

std::filesystem::path metadata_path(const std::filesystem::path& model_path) {
  auto p = model_path;
  p.replace_extension(".meta.json");
  return p;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << text;
  out.close();
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

void save_model(const AnyModel& model, const ModelMetadata& meta, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model).dump() + "\n");
  write_text_file(metadata_path(path), metadata_to_json(meta).dump(2) + "\n");
}

LoadedModel load_model(const std::filesystem::path& path) {
  json model_json;
  json meta_json;
  try {
    model_json = json::parse(read_text_file(path));
    meta_json = json::parse(read_text_file(metadata_path(path)));
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("model file is not valid json: ") + e.what());
  }
  LoadedModel loaded{model_from_json(model_json), metadata_from_json(meta_json)};
  if (loaded.metadata.kind != model_kind(loaded.model)) {
    throw SchemaError("metadata kind '" + loaded.metadata.kind + "' does not match model kind '" +
                      model_kind(loaded.model) + "'");
  }
  if (loaded.metadata.feature_names.size() != model_num_features(loaded.model)) {
    throw SchemaError("metadata lists " + std::to_string(loaded.metadata.feature_names.size()) +
                      " features but the model expects " + std::to_string(model_num_features(loaded.model)));
  }
  return loaded;
}

void check_schema(const ModelMetadata& meta, const FeatureSchema& schema) {
  if (meta.schema_hash == schema.hash() && meta.feature_names == schema.feature_names() &&
      meta.target_name == schema.target_name()) {
    return;
  }
  std::string msg = "dataset schema does not match the model (model hash " + std::to_string(meta.schema_hash) +
                    ", data hash " + std::to_string(schema.hash()) + ")";
  if (meta.feature_names != schema.feature_names()) {
    msg += "; feature lists differ";
  }
  throw SchemaError(msg);
}

}  // namespace driftboost
