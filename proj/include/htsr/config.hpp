#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "htsr/distance.hpp"
#include "htsr/forecast.hpp"
#include "htsr/hts_core.hpp"
#include "htsr/transforms.hpp"

namespace htsr {

struct DatasetConfig {
  std::string name;
  /// As written in the config file.
  std::string data;
  std::string schema;
  int seasonal_period = 1;
  std::size_t horizon = 1;
};

struct TransformConfig {
  std::vector<TransformKind> kinds{kAllTransformKinds.begin(), kAllTransformKinds.end()};
  double base_sigma = 0.05;
  int knots = 4;
  int num_versions = 6;
  int num_samples = 10;
};

struct DistanceConfig {
  DtwParams dtw;
  bool normalize = true;
  /// Pool every sample instead of sample 0 only.
  bool all_samples = false;
};

/// One experiment, read from a JSON file. Relative dataset paths resolve
/// against `base_dir` (the directory of the config file).
struct ExperimentConfig {
  std::vector<DatasetConfig> datasets;
  TransformConfig transformations;
  std::vector<Method> methods;
  DistanceConfig distance;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "results";
  bool dump_forecasts = false;
  std::filesystem::path base_dir;

  VariantPlan plan() const;
  std::filesystem::path resolve(const std::string& path) const;

  /// Semantically meaningful fields as JSON with sorted keys and no
  /// whitespace. Output location and dump flags are excluded.
  std::string canonical_json() const;
  /// 16 hex digits of a 64-bit FNV-1a digest of canonical_json().
  std::string hash() const;
};

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Structural checks that do not need the data files.
void validate(const ExperimentConfig& config);

/// Loads one configured dataset and checks it against the config: horizon
/// below the series length and training long enough for every method.
HtsDataset load_configured_dataset(const ExperimentConfig& config, const DatasetConfig& dataset);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace htsr
