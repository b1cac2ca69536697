#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "htsr/forecast.hpp"
#include "htsr/hts_core.hpp"
#include "htsr/transforms.hpp"

namespace htsr {

/// Version number used for the untransformed dataset.
inline constexpr int kOrigVersion = -1;

/// Which dataset a record was computed on: the original or one variant.
struct VariantTag {
  std::string transformation = "orig";
  int version = kOrigVersion;
  int sample = 0;

  static VariantTag orig() { return {}; }
  static VariantTag of(const VariantKey& key) {
    return {std::string(to_string(key.transformation)), key.version, key.sample};
  }
  bool is_orig() const { return version == kOrigVersion; }
  bool operator==(const VariantTag&) const = default;
};

/// "orig" or "v<version>".
std::string version_label(int version);
int parse_version_label(std::string_view label);

struct EvalRecord {
  std::string dataset;
  std::string transformation = "orig";
  int version = kOrigVersion;
  int sample = 0;
  std::string method;
  /// "bottom", "group:<dimension>" or "top".
  std::string level;
  double mase = 0.0;

  bool operator==(const EvalRecord&) const = default;
};

/// Levels of a dataset in reporting order: bottom, one per dimension, top.
std::vector<std::string> level_names(const GroupSchema& schema);

/// Mean absolute in-sample one-step difference of the training series.
double naive_scale(std::span<const double> train);

/// Horizon-mean absolute error divided by naive_scale(train). Throws
/// UndefinedScaleError when the training series is constant.
double mase_series(std::span<const double> actual, std::span<const double> forecast, std::span<const double> train);

struct Exclusion {
  std::string node;
  std::string reason;
};

/// Mean MASE over the element aggregates of one dimension. Elements with a
/// constant training series are skipped and appended to `excluded`.
double mase_group(const ForecastRun& run, const HtsDataset& dataset, std::string_view dimension,
                  std::vector<Exclusion>* excluded = nullptr);

struct Evaluation {
  std::vector<EvalRecord> records;
  std::vector<Exclusion> excluded;
};

/// One record per level of `dataset` (which must be the full, unsplit data).
Evaluation evaluate_run(const ForecastRun& run, const HtsDataset& dataset, const VariantTag& tag);

struct CurvePoint {
  int version = kOrigVersion;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t samples = 0;
  /// No records exist for this version; mean and sd are meaningless.
  bool missing = false;
};

/// Mean MASE over samples for orig, v0, ..., v(num_versions - 1). The orig
/// point comes from records with transformation "orig".
std::vector<CurvePoint> robustness_curve(std::span<const EvalRecord> records, std::string_view dataset,
                                         std::string_view transformation, std::string_view method,
                                         std::string_view level, int num_versions);

/// Average ranks (1 = smallest value, ties share the mean rank).
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

struct RankTable {
  std::string dataset;
  std::string transformation;
  int version = kOrigVersion;
  std::string level = "top";
  std::map<std::string, double> ranks;
};

/// Ranks methods by mean MASE over samples for one (dataset, transformation,
/// version, level). When `methods` is non-empty, each must have records.
RankTable rank_methods(std::span<const EvalRecord> records, std::string_view dataset,
                       std::string_view transformation, int version, std::string_view level = "top",
                       std::span<const std::string> methods = {});

/// (transformation, version) -> method -> mean rank across tables.
using AggregatedRanks = std::map<std::pair<std::string, int>, std::map<std::string, double>>;

AggregatedRanks aggregate_ranks(std::span<const RankTable> tables);

// CSV formats.

std::string results_csv(std::span<const EvalRecord> records);
std::vector<EvalRecord> parse_results_csv(std::string_view text);

/// `dataset,transformation,version,method,rank` (level column added when
/// `with_level` is set).
std::string ranks_csv(std::span<const RankTable> tables, bool with_level = false);
std::string aggregated_ranks_csv(const AggregatedRanks& ranks);

/// Original-data MASE table: `dataset,method,Bottom,<dimensions...>,Top`.
std::string level_table_csv(std::span<const EvalRecord> records, const GroupSchema& schema);

}  // namespace htsr
