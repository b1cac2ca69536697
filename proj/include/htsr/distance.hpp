#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "htsr/hts_core.hpp"

namespace htsr {

struct DtwParams {
  /// Exponent of the accumulated cost, (sum d^q)^(1/q).
  double q = 2.0;
  /// Sakoe-Chiba half-width; unbounded when empty.
  std::optional<std::size_t> window;
};

/// Dynamic time warping distance with absolute-difference local cost and
/// steps (1,0), (0,1), (1,1), anchored at both ends.
double dtw(std::span<const double> a, std::span<const double> b, const DtwParams& params = {});

/// Mean 0 and sample standard deviation 1; a constant series maps to zeros.
std::vector<double> z_normalize(std::span<const double> values);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

inline constexpr std::size_t kHistogramBins = 40;

/// Equal-width bins over [lo, hi]; values equal to hi land in the last bin.
/// A degenerate range (hi <= lo) is widened to [lo, lo + 1].
Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins = kHistogramBins);

struct DistancePair {
  std::string a;
  std::string b;
  double distance = 0.0;
};

struct DistanceDistribution {
  std::vector<DistancePair> pairs;
  /// Distances sorted ascending.
  std::vector<double> values;
  double mean = 0.0;
  /// Sample standard deviation (0 for a single value).
  double sd = 0.0;

  double min() const { return values.front(); }
  double max() const { return values.back(); }
  Histogram histogram(double lo, double hi, std::size_t bins = kHistogramBins) const {
    return make_histogram(values, lo, hi, bins);
  }
};

/// Builds the summary from labelled pair distances.
DistanceDistribution summarize(std::vector<DistancePair> pairs);

struct PairwiseOptions {
  DtwParams dtw;
  bool normalize = true;
};

/// DTW over all unordered pairs of the bottom series.
DistanceDistribution pairwise_distribution(const HtsDataset& dataset, const PairwiseOptions& options = {});
/// DTW over all unordered pairs of the given aggregate or bottom nodes.
DistanceDistribution pairwise_distribution(const HtsDataset& dataset, const PairwiseOptions& options,
                                           std::span<const NodeId> nodes);

struct DistributionShift {
  double mean_delta = 0.0;
  double sd_delta = 0.0;
};

/// Summary differences, transformed minus original.
DistributionShift distribution_shift(const DistanceDistribution& original, const DistanceDistribution& transformed);

}  // namespace htsr
