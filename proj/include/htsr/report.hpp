#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htsr/distance.hpp"
#include "htsr/evaluate.hpp"

namespace htsr {

/// One labelled distance distribution of a dataset.
struct DistanceEntry {
  std::string dataset;
  VariantTag variant;
  DistanceDistribution distribution;
};

/// One histogram bin row of the distance summary file.
struct DistanceSummaryRow {
  std::string dataset;
  std::string transformation;
  int version = kOrigVersion;
  double mean = 0.0;
  double sd = 0.0;
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  std::size_t count = 0;
};

/// `dataset,transformation,version,pair_a,pair_b,dtw`
std::string distances_csv(std::span<const DistanceEntry> entries);

/// Histogram rows with bins spanning the pooled range of every distribution
/// of the same dataset, so rows within a dataset share bin edges.
std::vector<DistanceSummaryRow> summarize_distances(std::span<const DistanceEntry> entries,
                                                    std::size_t bins = kHistogramBins);

/// `dataset,transformation,version,mean,sd,bin_lo,bin_hi,count`
std::string distance_summary_csv(std::span<const DistanceSummaryRow> rows);
std::vector<DistanceSummaryRow> parse_distance_summary_csv(std::string_view text);

/// Rank tables for every (dataset, transformation, version) and level found
/// in `records`, in a stable order: datasets as first seen, orig first, then
/// transformations and versions ascending.
std::vector<RankTable> rank_all(std::span<const EvalRecord> records, std::string_view level);
std::vector<RankTable> rank_all_levels(std::span<const EvalRecord> records);

/// Recomputes ranks.csv, ranks_by_level.csv and ranks_aggregated.csv in
/// `directory` from `records`.
void write_rank_files(std::span<const EvalRecord> records, const std::filesystem::path& directory);

/// Small multiples for one dataset: one panel per (method, transformation),
/// one line per level, x axis orig..v(n-1). Throws LookupError when the
/// dataset has no transformed records.
std::string line_chart_svg(std::span<const EvalRecord> records, std::string_view dataset);

/// Top-level method ranks of one dataset and transformation, one axis per
/// version including orig.
std::string radar_chart_svg(std::span<const EvalRecord> records, std::string_view dataset,
                            std::string_view transformation);

/// Ranks averaged over datasets, one axis per (transformation, version).
std::string aggregated_radar_svg(std::span<const EvalRecord> records);

/// Ridge chart drawn from the summary bins as given: one column per dataset,
/// one row per transformation, one layer per version with orig first.
std::string ridge_chart_svg(std::span<const DistanceSummaryRow> rows);

/// Emits every chart for an experiment directory that holds results.csv and
/// distance_summary.csv. Returns the written paths.
std::vector<std::filesystem::path> write_plots(const std::filesystem::path& directory);

}  // namespace htsr
