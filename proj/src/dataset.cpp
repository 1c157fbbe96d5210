#include "driftboost/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "driftboost/error.hpp"
#include "driftboost/random.hpp"

namespace driftboost {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// FeatureSchema

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features, std::string target_name, std::string target_unit)
    : features_(std::move(features)), target_name_(std::move(target_name)), target_unit_(std::move(target_unit)) {
  if (features_.empty()) {
    throw SchemaError("schema has no features");
  }
  std::set<std::string> seen;
  for (const auto& f : features_) {
    if (f.name.empty()) {
      throw SchemaError("schema feature with empty name");
    }
    if (!seen.insert(f.name).second) {
      throw SchemaError("duplicate feature name in schema: " + f.name);
    }
    if (f.physical_range && !(f.physical_range->lower <= f.physical_range->upper)) {
      throw SchemaError("invalid range for feature " + f.name + ": lower > upper");
    }
  }
  if (target_name_.empty() || seen.count(target_name_) != 0) {
    throw SchemaError("target name must be non-empty and distinct from feature names");
  }
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < features_.size(); ++j) {
    if (features_[j].name == name) {
      return j;
    }
  }
  return std::nullopt;
}

std::vector<std::string> FeatureSchema::feature_names() const {
  std::vector<std::string> names;
  names.reserve(features_.size());
  for (const auto& f : features_) {
    names.push_back(f.name);
  }
  return names;
}

std::uint64_t FeatureSchema::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& f : features_) {
    mix(f.name);
    mix(f.unit);
    if (f.physical_range) {
      char buf[64];
      auto r = std::to_chars(buf, buf + sizeof buf, f.physical_range->lower);
      mix(std::string_view(buf, static_cast<std::size_t>(r.ptr - buf)));
      r = std::to_chars(buf, buf + sizeof buf, f.physical_range->upper);
      mix(std::string_view(buf, static_cast<std::size_t>(r.ptr - buf)));
    } else {
      mix("-");
    }
  }
  mix(target_name_);
  mix(target_unit_);
  return h;
}

bool FeatureSchema::operator==(const FeatureSchema& other) const {
  if (target_name_ != other.target_name_ || target_unit_ != other.target_unit_ ||
      features_.size() != other.features_.size()) {
    return false;
  }
  for (std::size_t j = 0; j < features_.size(); ++j) {
    const auto& a = features_[j];
    const auto& b = other.features_[j];
    if (a.name != b.name || a.unit != b.unit || a.physical_range.has_value() != b.physical_range.has_value()) {
      return false;
    }
    if (a.physical_range &&
        (a.physical_range->lower != b.physical_range->lower || a.physical_range->upper != b.physical_range->upper)) {
      return false;
    }
  }
  return true;
}

const FeatureSchema& canonical_schema() {
  // Structural ranges follow the 30 reference buildings (3, 5 or 7 storeys of
  // 3.2 m); ground-motion ranges span the 65 selected records.
  static const FeatureSchema schema(
      {
          {"H_tot", "m", Interval{9.6, 22.4}},
          {"n_vx", "%", Interval{0.0, 77.0}},
          {"n_vy", "%", Interval{0.0, 80.0}},
          {"e_0", "m", Interval{0.0, 6.73}},
          {"PGA", "g", Interval{0.004, 0.822}},
          {"PGV", "cm/s", Interval{0.86, 99.35}},
          {"PGD", "cm", Interval{0.36, 60.19}},
          {"Ia", "m/s", Interval{0.0, 5.592}},
          {"SED", "cm^2/s", Interval{1.24, 16762.8}},
          {"CAV", "cm/s", Interval{14.67, 2684.1}},
          {"ASI", "g*s", Interval{0.003, 0.633}},
          {"HI", "cm", Interval{3.94, 317.6}},
          {"EPA", "g", Interval{0.003, 0.63}},
          {"PGV/PGA", "s", Interval{0.036, 0.336}},
          {"PP", "s", Interval{0.077, 1.26}},
          {"UD", "s", Interval{0.0, 17.68}},
          {"BD", "s", Interval{0.0, 61.87}},
          {"SD", "s", Interval{1.74, 50.98}},
      },
      "MIDR", "ratio");
  return schema;
}

namespace {

json schema_to_json(const FeatureSchema& schema) {
  json features = json::array();
  for (const auto& f : schema.features()) {
    json item = {{"name", f.name}, {"unit", f.unit}};
    if (f.physical_range) {
      item["range"] = {f.physical_range->lower, f.physical_range->upper};
    } else {
      item["range"] = nullptr;
    }
    features.push_back(std::move(item));
  }
  return {{"version", 1},
          {"features", std::move(features)},
          {"target", {{"name", schema.target_name()}, {"unit", schema.target_unit()}}}};
}

FeatureSchema schema_from_json(const json& j) {
  try {
    std::vector<FeatureSpec> specs;
    for (const auto& item : j.at("features")) {
      FeatureSpec spec;
      spec.name = item.at("name").get<std::string>();
      spec.unit = item.value("unit", "");
      if (item.contains("range") && !item.at("range").is_null()) {
        const auto& r = item.at("range");
        if (!r.is_array() || r.size() != 2) {
          throw SchemaError("range of " + spec.name + " must be [lower, upper]");
        }
        spec.physical_range = Interval{r[0].get<double>(), r[1].get<double>()};
      }
      specs.push_back(std::move(spec));
    }
    const auto& target = j.at("target");
    return FeatureSchema(std::move(specs), target.at("name").get<std::string>(), target.value("unit", ""));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed schema json: ") + e.what());
  }
}

}  // namespace

std::string schema_to_json_string(const FeatureSchema& schema) { return schema_to_json(schema).dump(2); }

FeatureSchema schema_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema is not valid json: ") + e.what());
  }
  return schema_from_json(j);
}

FeatureSchema load_schema_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open schema file " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return schema_from_json_string(buf.str());
}

void save_schema_json(const FeatureSchema& schema, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write schema file " + path.string());
  }
  out << schema_to_json_string(schema) << '\n';
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(FeatureSchema schema, FeatureMatrix features, Vector target)
    : schema_(std::move(schema)), features_(std::move(features)), target_(std::move(target)) {
  if (features_.rows() < 1) {
    throw InvalidArgument("dataset must have at least one row");
  }
  if (static_cast<std::size_t>(features_.cols()) != schema_.size()) {
    throw SchemaError("feature matrix has " + std::to_string(features_.cols()) + " columns, schema has " +
                      std::to_string(schema_.size()));
  }
  if (target_.size() != features_.rows()) {
    throw InvalidArgument("target length does not match row count");
  }
  if (!features_.allFinite() || !target_.allFinite()) {
    throw InvalidArgument("dataset contains non-finite values");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& row_indices) const {
  FeatureMatrix x(static_cast<Eigen::Index>(row_indices.size()), features_.cols());
  Vector y(static_cast<Eigen::Index>(row_indices.size()));
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(row_indices[i]);
    if (r >= features_.rows()) {
      throw InvalidArgument("subset row index out of range");
    }
    x.row(static_cast<Eigen::Index>(i)) = features_.row(r);
    y(static_cast<Eigen::Index>(i)) = target_(r);
  }
  return Dataset(schema_, std::move(x), std::move(y));
}

Dataset Dataset::with_target(Vector target) const { return Dataset(schema_, features_, std::move(target)); }

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += (i ? ", " : "") + items[i];
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

Dataset parse_csv(const std::string& text, const FeatureSchema& schema, TargetColumn target) {
  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      auto line = rest.substr(0, nl);
      if (!trim(line).empty()) {
        lines.push_back(line);
      }
      if (nl == std::string_view::npos) {
        break;
      }
      rest.remove_prefix(nl + 1);
    }
  }
  if (lines.empty()) {
    throw SchemaError("csv is empty");
  }
  auto header = split_fields(lines.front());
  if (!header.empty() && header.front().substr(0, 3) == "\xEF\xBB\xBF") {
    header.front().remove_prefix(3);
  }

  // column position -> destination (feature index, or d for the target)
  const std::size_t d = schema.size();
  std::vector<std::size_t> destination(header.size());
  std::vector<int> found(d + 1, 0);
  std::vector<std::string> extra;
  std::vector<std::string> duplicated;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(unquote(header[c]));
    std::size_t dest;
    if (name == schema.target_name()) {
      dest = d;
    } else if (auto j = schema.index_of(name)) {
      dest = *j;
    } else {
      extra.push_back(name.empty() ? "<empty>" : name);
      continue;
    }
    if (found[dest]++ > 0) {
      duplicated.push_back(name);
    }
    destination[c] = dest;
  }
  std::vector<std::string> missing;
  for (std::size_t j = 0; j < d; ++j) {
    if (!found[j]) {
      missing.push_back(schema[j].name);
    }
  }
  if (!found[d] && target == TargetColumn::Required) {
    missing.push_back(schema.target_name());
  }
  if (!missing.empty() || !extra.empty() || !duplicated.empty()) {
    std::string msg = "csv header does not match schema:";
    if (!missing.empty()) msg += " missing columns [" + join(missing) + "]";
    if (!extra.empty()) msg += " unexpected columns [" + join(extra) + "]";
    if (!duplicated.empty()) msg += " duplicate columns [" + join(duplicated) + "]";
    throw SchemaError(msg);
  }

  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  if (n < 1) {
    throw SchemaError("csv has a header but no data rows");
  }
  FeatureMatrix x(n, static_cast<Eigen::Index>(d));
  Vector y = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row_number = static_cast<std::size_t>(i) + 1;
    const auto fields = split_fields(lines[static_cast<std::size_t>(i) + 1]);
    if (fields.size() != header.size()) {
      throw ParseError(row_number, "", "row " + std::to_string(row_number) + ": expected " +
                                           std::to_string(header.size()) + " fields, found " +
                                           std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto& column = header[c];
      const auto field = fields[c];
      double value = 0.0;
      const char* first = field.data();
      const char* last = field.data() + field.size();
      if (!field.empty() && *first == '+') {
        ++first;
      }
      const auto r = std::from_chars(first, last, value);
      if (field.empty() || r.ec != std::errc() || r.ptr != last) {
        throw ParseError(row_number, std::string(column),
                         "row " + std::to_string(row_number) + ", column " + std::string(column) +
                             ": cannot parse '" + std::string(field) + "' as a number");
      }
      if (!std::isfinite(value)) {
        throw ParseError(row_number, std::string(column),
                         "row " + std::to_string(row_number) + ", column " + std::string(column) +
                             ": non-finite value '" + std::string(field) + "'");
      }
      if (destination[c] == d) {
        y(i) = value;
      } else {
        x(i, static_cast<Eigen::Index>(destination[c])) = value;
      }
    }
  }
  return Dataset(schema, std::move(x), std::move(y));
}

Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema, TargetColumn target) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, target);
}

std::string to_csv_string(const Dataset& ds) {
  std::string out;
  for (const auto& f : ds.schema().features()) {
    out += f.name;
    out += ',';
  }
  out += ds.schema().target_name();
  out += '\n';
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
      out += format_double(ds.features()(i, j));
      out += ',';
    }
    out += format_double(ds.target()(i));
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << to_csv_string(ds);
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

// ---------------------------------------------------------------------------
// Range checks, synthetic data, splitting, statistics

std::vector<RangeWarning> validate_ranges(const Dataset& ds) {
  std::vector<RangeWarning> warnings;
  const auto& schema = ds.schema();
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& range = schema[j].physical_range;
      if (!range) {
        continue;
      }
      const double v = ds.features()(i, static_cast<Eigen::Index>(j));
      if (!range->contains(v)) {
        warnings.push_back({static_cast<std::size_t>(i), j, v,
                            "row " + std::to_string(i + 1) + ", " + schema[j].name + " = " + format_double(v) +
                                " outside [" + format_double(range->lower) + ", " +
                                format_double(range->upper) + "] " + schema[j].unit});
      }
    }
  }
  return warnings;
}

namespace {

double unit_scale(const Eigen::Ref<const Eigen::RowVectorXd>& row, std::size_t j) {
  const auto& range = *canonical_schema()[j].physical_range;
  return (row(static_cast<Eigen::Index>(j)) - range.lower) / (range.upper - range.lower);
}

}  // namespace

double planted_midr(Eigen::Ref<const Eigen::RowVectorXd> row) {
  const auto& schema = canonical_schema();
  if (static_cast<std::size_t>(row.size()) != schema.size()) {
    throw InvalidArgument("planted_midr expects a canonical 18-feature row");
  }
  const double h_tot = unit_scale(row, 0);
  const double n_vx = unit_scale(row, 1);
  const double n_vy = unit_scale(row, 2);
  const double e_0 = unit_scale(row, 3);
  const double pga = unit_scale(row, 4);
  const double hi = unit_scale(row, 11);
  const double s =
      1.5 * pga + std::log10(1.0 + 9.0 * hi) + 0.8 * pga * h_tot - 0.35 * (n_vx + n_vy) + 0.3 * e_0;
  return 0.25 * std::exp(s);
}

Dataset synth_generate(std::size_t n, std::uint64_t seed, double noise_sd) {
  if (n == 0) {
    throw InvalidArgument("synth_generate: n must be at least 1");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw InvalidArgument("synth_generate: noise_sd must be finite and >= 0");
  }
  const auto& schema = canonical_schema();
  const auto d = static_cast<Eigen::Index>(schema.size());
  // Separate streams so the features of a seed do not depend on noise_sd.
  Rng rng(derive_seed(seed, 0));
  Rng noise_rng(derive_seed(seed, 1));
  FeatureMatrix x(static_cast<Eigen::Index>(n), d);
  Vector y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto& range = *schema[static_cast<std::size_t>(j)].physical_range;
      x(i, j) = range.lower + (range.upper - range.lower) * rng.uniform();
    }
    const double noise = noise_sd > 0.0 ? noise_sd * noise_rng.normal() : 0.0;
    y(i) = std::abs(planted_midr(x.row(i)) + noise);
  }
  return Dataset(schema, std::move(x), std::move(y));
}

TrainTest train_test_split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw InvalidArgument("test_fraction must lie in (0, 1)");
  }
  const auto n = static_cast<std::size_t>(ds.rows());
  if (n < 2) {
    throw InvalidArgument("train_test_split needs at least 2 rows");
  }
  auto test_size = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.test_fraction));
  test_size = std::clamp<std::size_t>(test_size, 1, n - 1);

  Rng rng(spec.seed);
  auto test_rows = rng.sample_without_replacement(n, test_size);
  std::vector<std::size_t> train_rows;
  train_rows.reserve(n - test_size);
  std::size_t t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (t < test_rows.size() && test_rows[t] == i) {
      ++t;
    } else {
      train_rows.push_back(i);
    }
  }
  return TrainTest{ds.subset(train_rows), ds.subset(test_rows), std::move(train_rows), std::move(test_rows)};
}

std::vector<FeatureStats> column_stats(const FeatureMatrix& x) {
  std::vector<FeatureStats> stats;
  const auto n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto col = x.col(j);
    const double mean = col.sum() / n;
    const double var = (col.array() - mean).square().sum() / n;
    stats.push_back({mean, std::sqrt(var), col.minCoeff(), col.maxCoeff()});
  }
  return stats;
}

std::vector<FeatureStats> feature_stats(const Dataset& ds) { return column_stats(ds.features()); }

}  // namespace driftboost
