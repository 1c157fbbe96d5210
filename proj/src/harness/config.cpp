#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string_view>

#include "driftboost/error.hpp"
#include "driftboost/harness.hpp"

namespace driftboost {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw InvalidArgument("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, const char* expected) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto r = std::from_chars(first, last, out);
  if (value.empty() || r.ec != std::errc() || r.ptr != last) {
    bad_value(key, value, expected);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = {"data",          "schema",   "label",       "out_dir",  "seed",
                                  "models",        "test_fraction", "split_seed", "synth.n", "synth.seed",
                                  "synth.noise_sd", "validation.grid"};
    for (const char* g : {"num_rounds", "learning_rate", "num_leaves", "max_depth", "l2_reg", "min_split_gain",
                          "max_bins", "min_child_hess", "min_data_in_leaf", "goss", "goss_top_rate",
                          "goss_other_rate", "growth"}) {
      k.push_back(std::string("gbdt.") + g);
    }
    for (const char* g : {"num_rounds", "learning_rate", "max_leaves", "max_depth", "min_samples_leaf", "ccp_alpha"}) {
      k.push_back(std::string("gbr.") + g);
    }
    for (const char* prefix : {"rf.", "et."}) {
      for (const char* g : {"num_trees", "feature_subsample", "max_leaves", "max_depth", "min_samples_leaf"}) {
        k.push_back(std::string(prefix) + g);
      }
    }
    for (const char* g : {"max_leaves", "max_depth", "min_samples_leaf", "ccp_alpha"}) {
      k.push_back(std::string("cart.") + g);
    }
    for (const char* g : {"knn.k", "ridge.l2", "enet.l1", "enet.l2", "enet.tol", "enet.max_iter", "lasso.l1",
                          "lasso.tol", "lasso.max_iter"}) {
      k.push_back(g);
    }
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::size_t line_no = 0;
  std::string_view rest(text);
  while (!rest.empty()) {
    ++line_no;
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      cfg.set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError&) {
    throw InvalidArgument("cannot read config file " + path.string());
  }
  return parse(text);
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw InvalidArgument("expected key=value, got '" + assignment + "'");
  }
  set(std::string(trim(std::string_view(assignment).substr(0, eq))),
      std::string(trim(std::string_view(assignment).substr(eq + 1))));
}

void Config::set(const std::string& key, const std::string& value) {
  const auto& keys = known_config_keys();
  if (!std::binary_search(keys.begin(), keys.end(), key)) {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
  entries_[key] = value;
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.entries_) {
    entries_[k] = v;
  }
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  const double d = parse_number<double>(key, *v, "a number");
  if (!std::isfinite(d)) bad_value(key, *v, "a finite number");
  return d;
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  const auto v = get(key);
  return v ? parse_number<std::size_t>(key, *v, "a non-negative integer") : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = get(key);
  return v ? parse_number<std::uint64_t>(key, *v, "a non-negative integer") : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  bad_value(key, *v, "a boolean");
}

std::optional<int> Config::get_optional_int(const std::string& key) const {
  const auto v = get(key);
  if (!v || *v == "none" || v->empty()) return std::nullopt;
  return parse_number<int>(key, *v, "an integer or 'none'");
}

std::filesystem::path default_output_dir() {
  const char* env = std::getenv("DRIFTBOOST_OUT_DIR");
  if (env != nullptr && *env != '\0') {
    return env;
  }
  return "driftboost-out";
}

FeatureSchema schema_from_config(const Config& cfg) {
  if (const auto path = cfg.get("schema")) {
    return load_schema_json(*path);
  }
  return canonical_schema();
}

Dataset dataset_from_config(const Config& cfg) {
  if (const auto path = cfg.get("data")) {
    return load_csv(*path, schema_from_config(cfg));
  }
  const std::size_t n = cfg.get_size("synth.n", 5850);
  if (n < 1) {
    throw InvalidArgument("synth.n must be >= 1");
  }
  const double noise = cfg.get_double("synth.noise_sd", 0.1);
  if (noise < 0.0) {
    throw InvalidArgument("synth.noise_sd must be >= 0");
  }
  return synth_generate(n, cfg.get_u64("synth.seed", 1), noise);
}

SplitSpec split_from_config(const Config& cfg) {
  SplitSpec spec;
  spec.test_fraction = cfg.get_double("test_fraction", spec.test_fraction);
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw InvalidArgument("test_fraction must lie in (0, 1)");
  }
  spec.seed = cfg.get_u64("split_seed", spec.seed);
  return spec;
}

}  // namespace driftboost
