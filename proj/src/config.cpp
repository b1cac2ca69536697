#include "htsr/config.hpp"

#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "htsr/csv.hpp"
#include "htsr/error.hpp"

namespace htsr {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, std::string_view where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}.{}: {}", where, key, e.what()));
  }
}

MintConfig parse_mint(const json& obj, MintConfig base, std::string_view where) {
  if (obj.contains("covariance") && !obj.at("covariance").is_null()) {
    try {
      base.covariance = parse_covariance_kind(obj.at("covariance").get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(fmt::format("{}: {}", where, e.what()));
    }
  }
  if (obj.contains("shrinkage_intensity") && !obj.at("shrinkage_intensity").is_null()) {
    base.shrinkage_intensity = get_or<double>(obj, "shrinkage_intensity", 0.0, where);
  }
  return base;
}

Method parse_method_entry(const json& entry, const MintConfig& mint_default, std::size_t index) {
  const auto where = fmt::format("methods[{}]", index);
  Method m;
  try {
    if (entry.is_string()) {
      m = parse_method(entry.get<std::string>());
      m.mint = mint_default;
      return m;
    }
    reject_unknown(entry, where, {"id", "forecaster", "reconciliation", "params", "covariance", "shrinkage_intensity"});
    const auto id = get_or<std::string>(entry, "id", "", where);
    if (entry.contains("forecaster") || entry.contains("reconciliation")) {
      const auto f = get_or<std::string>(entry, "forecaster", "", where);
      const auto r = get_or<std::string>(entry, "reconciliation", "bu", where);
      m = parse_method(f + "_" + r);
      if (!id.empty()) m.id = id;
    } else {
      m = parse_method(id);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
  if (entry.contains("params")) {
    const auto& params = entry.at("params");
    if (!params.is_object()) throw ConfigError(fmt::format("{}.params must be an object", where));
    for (const auto& [key, value] : params.items()) {
      if (!value.is_number()) throw ConfigError(fmt::format("{}.params.{} must be a number", where, key));
      m.forecaster.hyperparameters[key] = value.get<double>();
    }
  }
  m.mint = parse_mint(entry, mint_default, where);
  return m;
}

json method_json(const Method& m) {
  json j;
  j["id"] = m.id;
  j["forecaster"] = std::string(to_string(m.forecaster.kind));
  j["reconciliation"] = std::string(to_string(m.reconciliation));
  j["params"] = json::object();
  for (const auto& [k, v] : m.forecaster.hyperparameters) j["params"][k] = v;
  if (m.reconciliation == Reconciliation::MinT) {
    j["covariance"] = std::string(to_string(m.mint.covariance));
    j["shrinkage_intensity"] = m.mint.shrinkage_intensity ? json(*m.mint.shrinkage_intensity) : json(nullptr);
  }
  return j;
}

}  // namespace

VariantPlan ExperimentConfig::plan() const {
  VariantPlan p;
  p.kinds = transformations.kinds;
  p.num_versions = transformations.num_versions;
  p.num_samples = transformations.num_samples;
  p.base_sigma = transformations.base_sigma;
  p.knots = transformations.knots;
  p.master_seed = master_seed;
  return p;
}

std::filesystem::path ExperimentConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["datasets"] = json::array();
  for (const auto& d : datasets) {
    j["datasets"].push_back({{"name", d.name},
                             {"data", d.data},
                             {"schema", d.schema},
                             {"seasonal_period", d.seasonal_period},
                             {"horizon", d.horizon}});
  }
  json kinds = json::array();
  for (const auto k : transformations.kinds) kinds.push_back(std::string(to_string(k)));
  j["transformations"] = {{"kinds", kinds},
                          {"base_sigma", transformations.base_sigma},
                          {"knots", transformations.knots},
                          {"num_versions", transformations.num_versions},
                          {"num_samples", transformations.num_samples}};
  j["methods"] = json::array();
  for (const auto& m : methods) j["methods"].push_back(method_json(m));
  j["dtw"] = {{"q", distance.dtw.q},
              {"window", distance.dtw.window ? json(*distance.dtw.window) : json(nullptr)},
              {"normalize", distance.normalize},
              {"all_samples", distance.all_samples}};
  j["master_seed"] = master_seed;
  return j.dump();
}

std::string ExperimentConfig::hash() const { return fmt::format("{:016x}", fnv1a64(canonical_json())); }

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("invalid JSON: {}", e.what()));
  }
  reject_unknown(root, "config",
                 {"datasets", "transformations", "methods", "mint", "dtw", "master_seed", "output_dir",
                  "dump_forecasts"});
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;

  if (!root.contains("datasets") || !root.at("datasets").is_array()) {
    throw ConfigError("config.datasets must be an array");
  }
  for (std::size_t i = 0; i < root.at("datasets").size(); ++i) {
    const auto& d = root.at("datasets").at(i);
    const auto where = fmt::format("datasets[{}]", i);
    reject_unknown(d, where, {"name", "data", "schema", "seasonal_period", "horizon"});
    DatasetConfig dc;
    dc.name = get_or<std::string>(d, "name", "", where);
    dc.data = get_or<std::string>(d, "data", "", where);
    dc.schema = get_or<std::string>(d, "schema", "", where);
    dc.seasonal_period = get_or<int>(d, "seasonal_period", 1, where);
    const auto horizon = get_or<long long>(d, "horizon", 0, where);
    if (horizon < 1) throw ConfigError(fmt::format("{}.horizon must be >= 1", where));
    dc.horizon = static_cast<std::size_t>(horizon);
    cfg.datasets.push_back(std::move(dc));
  }

  if (root.contains("transformations")) {
    const auto& t = root.at("transformations");
    reject_unknown(t, "transformations", {"kinds", "base_sigma", "knots", "num_versions", "num_samples"});
    if (t.contains("kinds")) {
      cfg.transformations.kinds.clear();
      for (const auto& k : t.at("kinds")) {
        try {
          cfg.transformations.kinds.push_back(parse_transform_kind(k.get<std::string>()));
        } catch (const std::exception& e) {
          throw ConfigError(fmt::format("transformations.kinds: {}", e.what()));
        }
      }
    }
    cfg.transformations.base_sigma = get_or<double>(t, "base_sigma", cfg.transformations.base_sigma, "transformations");
    cfg.transformations.knots = get_or<int>(t, "knots", cfg.transformations.knots, "transformations");
    cfg.transformations.num_versions =
        get_or<int>(t, "num_versions", cfg.transformations.num_versions, "transformations");
    cfg.transformations.num_samples = get_or<int>(t, "num_samples", cfg.transformations.num_samples, "transformations");
  }

  MintConfig mint_default;
  if (root.contains("mint")) {
    reject_unknown(root.at("mint"), "mint", {"covariance", "shrinkage_intensity"});
    mint_default = parse_mint(root.at("mint"), mint_default, "mint");
  }
  if (!root.contains("methods") || !root.at("methods").is_array()) throw ConfigError("config.methods must be an array");
  for (std::size_t i = 0; i < root.at("methods").size(); ++i) {
    cfg.methods.push_back(parse_method_entry(root.at("methods").at(i), mint_default, i));
  }

  if (root.contains("dtw")) {
    const auto& d = root.at("dtw");
    reject_unknown(d, "dtw", {"q", "window", "normalize", "all_samples"});
    cfg.distance.dtw.q = get_or<double>(d, "q", 2.0, "dtw");
    if (d.contains("window") && !d.at("window").is_null()) {
      const auto w = get_or<long long>(d, "window", 0, "dtw");
      if (w < 0) throw ConfigError("dtw.window must be >= 0");
      cfg.distance.dtw.window = static_cast<std::size_t>(w);
    }
    cfg.distance.normalize = get_or<bool>(d, "normalize", true, "dtw");
    cfg.distance.all_samples = get_or<bool>(d, "all_samples", false, "dtw");
  }
  cfg.master_seed = get_or<std::uint64_t>(root, "master_seed", 0, "config");
  cfg.output_dir = get_or<std::string>(root, "output_dir", "results", "config");
  cfg.dump_forecasts = get_or<bool>(root, "dump_forecasts", false, "config");
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = csv::read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  auto cfg = parse_config(text, path.parent_path());
  if (cfg.output_dir.is_relative()) cfg.output_dir = path.parent_path() / cfg.output_dir;
  return cfg;
}

void validate(const ExperimentConfig& config) {
  if (config.datasets.empty()) throw ConfigError("at least one dataset is required");
  if (config.methods.empty()) throw ConfigError("at least one method is required");
  std::set<std::string> names;
  for (const auto& d : config.datasets) {
    if (d.name.empty() || d.data.empty() || d.schema.empty()) {
      throw ConfigError("every dataset needs name, data and schema");
    }
    if (d.name.find_first_of(",/\\|") != std::string::npos || d.name.find("__") != std::string::npos) {
      throw ConfigError(fmt::format("dataset name '{}' must not contain ',', '/', '\\', '|' or '__'", d.name));
    }
    if (!names.insert(d.name).second) throw ConfigError(fmt::format("duplicate dataset '{}'", d.name));
    if (d.seasonal_period < 1) throw ConfigError(fmt::format("dataset '{}': seasonal_period must be >= 1", d.name));
  }
  std::set<std::string> ids;
  for (const auto& m : config.methods) {
    if (m.id.empty() || m.id.find_first_of(",/\\|") != std::string::npos) {
      throw ConfigError(fmt::format("invalid method id '{}'", m.id));
    }
    if (!ids.insert(m.id).second) throw ConfigError(fmt::format("duplicate method '{}'", m.id));
    if (m.mint.shrinkage_intensity && !(*m.mint.shrinkage_intensity >= 0.0 && *m.mint.shrinkage_intensity <= 1.0)) {
      throw ConfigError(fmt::format("method '{}': shrinkage_intensity must lie in [0, 1]", m.id));
    }
  }
  try {
    validate(config.plan());
  } catch (const Error& e) {
    throw ConfigError(fmt::format("transformations: {}", e.what()));
  }
  if (!(config.distance.dtw.q > 0.0)) throw ConfigError("dtw.q must be positive");
}

HtsDataset load_configured_dataset(const ExperimentConfig& config, const DatasetConfig& dc) {
  const auto data_path = config.resolve(dc.data);
  const auto schema_path = config.resolve(dc.schema);
  for (const auto& p : {data_path, schema_path}) {
    if (!std::filesystem::exists(p)) throw IoError(fmt::format("dataset '{}': cannot find '{}'", dc.name, p.string()));
  }
  auto ds = load_dataset(data_path, schema_path, {dc.name, dc.seasonal_period});
  if (dc.horizon >= ds.length()) {
    throw ConfigError(fmt::format("dataset '{}': horizon {} must be below the series length {}", dc.name, dc.horizon,
                                  ds.length()));
  }
  const std::size_t train = ds.length() - dc.horizon;
  for (const auto& m : config.methods) {
    const auto need = minimum_length(m.forecaster, dc.seasonal_period);
    if (train < need) {
      throw ConfigError(fmt::format("dataset '{}': method '{}' needs {} training observations, only {} available",
                                    dc.name, m.id, need, train));
    }
  }
  const bool warps = std::any_of(config.transformations.kinds.begin(), config.transformations.kinds.end(), [](auto k) {
    return k == TransformKind::MagnitudeWarp || k == TransformKind::TimeWarp;
  });
  if (warps && ds.length() < 4) throw ConfigError(fmt::format("dataset '{}': warping needs length >= 4", dc.name));
  return ds;
}

}  // namespace htsr
