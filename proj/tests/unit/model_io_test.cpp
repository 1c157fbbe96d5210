#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "driftboost/harness.hpp"
#include "driftboost/model_io.hpp"
#include "driftboost/version.hpp"

using namespace driftboost;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("driftboost_model_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ModelMetadata metadata_for(const std::string& id, const AnyModel& model, const Dataset& ds) {
  ModelMetadata meta;
  meta.model_id = id;
  meta.kind = model_kind(model);
  meta.schema_hash = ds.schema().hash();
  meta.feature_names = ds.schema().feature_names();
  meta.target_name = ds.schema().target_name();
  meta.seed = 0xF00DF00DF00DF00DULL;
  meta.training_time_s = 0.25;
  meta.training_rows = ds.rows();
  meta.version = kVersion;
  return meta;
}

}  // namespace

TEST(ModelIo, EveryKindRoundTripsThroughFiles) {
  const Dataset ds = synth_generate(150, 7, 0.1);
  const fs::path dir = scratch_dir("roundtrip");
  Config cfg;
  cfg.set("gbdt.num_rounds", "10");
  cfg.set("gbr.num_rounds", "5");
  cfg.set("rf.num_trees", "3");
  cfg.set("et.num_trees", "3");
  cfg.set("gbdt.min_data_in_leaf", "5");
  std::set<std::string> kinds;
  for (const std::string& id : default_model_ids()) {
    const AnyModel model = fit_model(id, ds, cfg, 3);
    const fs::path path = dir / (id + ".json");
    save_model(model, metadata_for(id, model, ds), path);
    ASSERT_TRUE(fs::exists(metadata_path(path)));
    const LoadedModel loaded = load_model(path);
    kinds.insert(model_kind(loaded.model));
    EXPECT_EQ(loaded.metadata.model_id, id);
    EXPECT_EQ(loaded.metadata.seed, 0xF00DF00DF00DF00DULL);
    EXPECT_EQ(loaded.metadata.schema_hash, ds.schema().hash());
    const Vector a = predict_any(model, ds.features());
    const Vector b = predict_any(loaded.model, ds.features());
    EXPECT_EQ(a, b) << id;
    EXPECT_NO_THROW(check_schema(loaded.metadata, ds.schema()));
  }
  EXPECT_EQ(kinds, (std::set<std::string>{"ensemble", "tree", "forest", "linear", "knn"}));
}

TEST(ModelIo, MetadataPath) {
  EXPECT_EQ(metadata_path("out/model.json"), fs::path("out/model.meta.json"));
  EXPECT_EQ(metadata_path("m"), fs::path("m.meta.json"));
}

TEST(ModelIo, SchemaMismatchIsRefused) {
  const Dataset ds = synth_generate(60, 1, 0.1);
  const AnyModel model = fit_ols(ds);
  ModelMetadata meta = metadata_for("ols", model, ds);
  auto names = ds.schema().feature_names();
  std::vector<FeatureSpec> specs;
  for (std::size_t j = 0; j < names.size(); ++j) specs.push_back({names[j] + (j == 0 ? "_renamed" : ""), "", std::nullopt});
  const FeatureSchema other(std::move(specs), ds.schema().target_name());
  EXPECT_THROW(check_schema(meta, other), SchemaError);
  meta.schema_hash ^= 1;
  EXPECT_THROW(check_schema(meta, ds.schema()), SchemaError);
}

TEST(ModelIo, CorruptFilesAreSchemaErrors) {
  const fs::path dir = scratch_dir("corrupt");
  const Dataset ds = synth_generate(60, 2, 0.1);
  const AnyModel model = fit_ridge(ds, 1.0);
  const fs::path path = dir / "m.json";
  save_model(model, metadata_for("ridge", model, ds), path);

  write_text_file(path, "{not json");
  EXPECT_THROW(load_model(path), SchemaError);
  write_text_file(path, R"({"format":"driftboost-model","version":1,"kind":"linear","model":{}})");
  EXPECT_THROW(load_model(path), SchemaError);
  write_text_file(path, R"({"format":"something-else","version":1,"kind":"linear","model":{}})");
  EXPECT_THROW(load_model(path), SchemaError);
  write_text_file(path, R"({"format":"driftboost-model","version":99,"kind":"linear","model":{}})");
  EXPECT_THROW(load_model(path), SchemaError);

  // Kind recorded in the sidecar must agree with the model file.
  save_model(model, metadata_for("ridge", model, ds), path);
  ModelMetadata wrong = metadata_for("ridge", model, ds);
  wrong.kind = "tree";
  write_text_file(metadata_path(path), metadata_to_json(wrong).dump());
  EXPECT_THROW(load_model(path), SchemaError);
}

TEST(ModelIo, MissingFileIsIoError) {
  EXPECT_THROW(load_model(fs::temp_directory_path() / "driftboost_no_such_model.json"), IoError);
}

TEST(ModelIo, WriteCreatesParents) {
  const fs::path dir = scratch_dir("parents");
  write_text_file(dir / "a" / "b" / "c.txt", "hello");
  EXPECT_EQ(read_text_file(dir / "a" / "b" / "c.txt"), "hello");
}
