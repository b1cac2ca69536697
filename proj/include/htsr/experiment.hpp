#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "htsr/config.hpp"
#include "htsr/distance.hpp"
#include "htsr/evaluate.hpp"
#include "htsr/forecast.hpp"

namespace htsr {

inline constexpr std::string_view kToolVersion = "0.3.0";

enum class CellStatus { Pending, Done, Failed };

std::string_view to_string(CellStatus status);

struct CellState {
  CellStatus status = CellStatus::Pending;
  std::string reason;
  double seconds = 0.0;
};

/// Progress of one experiment. Cell keys are
/// `<dataset>|<variant>|<method>` where variant is `orig` or
/// `<kind>/v<version>/s<sample>`; distance cells use `distance` as method.
struct RunManifest {
  std::string config_hash;
  std::string tool_version{kToolVersion};
  std::string started_at;
  std::string finished_at;
  double elapsed_seconds = 0.0;
  std::map<std::string, CellState> cells;

  std::size_t count(CellStatus status) const;
  std::string to_json() const;
  static RunManifest from_json(std::string_view text);
};

/// Identifies one evaluation cell while it is being processed.
struct CellInfo {
  std::string dataset;
  VariantTag variant;
  std::string method;
};

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  bool resume = false;
  unsigned jobs = 1;
  /// Stop scheduling new cells once this many have completed in this
  /// invocation (used to simulate interruption).
  std::optional<std::size_t> stop_after_cells;
  /// Called for every successful forecast run, possibly from worker threads.
  std::function<void(const CellInfo&, const ForecastRun&, const HtsDataset&)> on_forecast;
};

struct RunResult {
  RunManifest manifest;
  std::filesystem::path directory;
  /// Stopped early through stop_after_cells; aggregate files not written.
  bool interrupted = false;
};

/// `<output_dir>/<config hash>`.
std::filesystem::path experiment_directory(const ExperimentConfig& config);

/// Applies the seed override, if any, before anything is hashed.
ExperimentConfig effective_config(ExperimentConfig config, const RunOptions& options);

/// Evaluates every method on the original data and on every variant, computes
/// DTW distributions, then writes the aggregate result files.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Number of evaluation cells: datasets x methods x (1 + variants).
std::size_t count_evaluation_cells(const ExperimentConfig& config);

/// Distance distributions for one dataset: orig followed by one entry per
/// (kind, version), on sample 0 unless the config pools all samples.
std::vector<std::pair<VariantTag, DistanceDistribution>> distance_distributions(const ExperimentConfig& config,
                                                                                const HtsDataset& dataset);

/// Writes `<dataset>__<kind>__v<version>__s<sample>.csv` for every variant
/// plus `<dataset>__schema.csv` into `directory`. Returns the file count.
std::size_t write_variants(const ExperimentConfig& config, const std::filesystem::path& directory);

}  // namespace htsr
