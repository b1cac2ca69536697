#include "htsr/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "htsr/error.hpp"

namespace htsr {

namespace {

double local_cost(double x, double y, double q) {
  const double d = std::abs(x - y);
  if (q == 1.0) return d;
  if (q == 2.0) return d * d;
  return std::pow(d, q);
}

double root(double s, double q) {
  if (q == 1.0) return s;
  if (q == 2.0) return std::sqrt(s);
  return std::pow(s, 1.0 / q);
}

}  // namespace

double dtw(std::span<const double> a, std::span<const double> b, const DtwParams& params) {
  if (a.empty() || b.empty()) throw PreconditionError("dtw needs non-empty series");
  if (!(params.q > 0.0)) throw PreconditionError(fmt::format("dtw exponent must be positive, got {}", params.q));
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t gap = n > m ? n - m : m - n;
  const std::size_t w = params.window.value_or(std::max(n, m));
  if (w < gap) {
    throw PreconditionError(fmt::format("dtw window {} cannot align lengths {} and {}", w, n, m));
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf);
  std::vector<double> curr(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(curr.begin(), curr.end(), inf);
    const std::size_t lo = i > w ? i - w : 1;
    const std::size_t hi = std::min(m, i + w);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double best = std::min({prev[j], curr[j - 1], prev[j - 1]});
      curr[j] = local_cost(a[i - 1], b[j - 1], params.q) + best;
    }
    std::swap(prev, curr);
  }
  return root(prev[m], params.q);
}

std::vector<double> z_normalize(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) return out;
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
  double ss = 0.0;
  for (const double v : out) ss += (v - mean) * (v - mean);
  const double sd = out.size() > 1 ? std::sqrt(ss / static_cast<double>(out.size() - 1)) : 0.0;
  for (auto& v : out) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return out;
}

Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
  if (bins == 0) throw PreconditionError("histogram needs at least one bin");
  if (!(hi > lo)) hi = lo + 1.0;
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (const double v : values) {
    if (v < lo || v > hi) {
      throw PreconditionError(fmt::format("value {} outside histogram range [{}, {}]", v, lo, hi));
    }
    auto idx = static_cast<std::size_t>((v - lo) / width);
    idx = std::min(idx, bins - 1);
    // Guard against rounding placing a value on the wrong side of an edge.
    while (idx > 0 && v < h.edges[idx]) --idx;
    while (idx + 1 < bins && v >= h.edges[idx + 1]) ++idx;
    ++h.counts[idx];
  }
  return h;
}

DistanceDistribution summarize(std::vector<DistancePair> pairs) {
  if (pairs.empty()) throw PreconditionError("distance distribution needs at least one pair");
  DistanceDistribution d;
  d.values.reserve(pairs.size());
  for (const auto& p : pairs) d.values.push_back(p.distance);
  std::sort(d.values.begin(), d.values.end());
  const auto n = static_cast<double>(d.values.size());
  d.mean = std::accumulate(d.values.begin(), d.values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : d.values) ss += (v - d.mean) * (v - d.mean);
  d.sd = d.values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  d.pairs = std::move(pairs);
  return d;
}

namespace {

DistanceDistribution pairwise(std::vector<std::pair<std::string, std::vector<double>>> rows,
                              const PairwiseOptions& options) {
  if (rows.size() < 2) {
    throw PreconditionError(fmt::format("pairwise distances need at least 2 series, got {}", rows.size()));
  }
  if (options.normalize) {
    for (auto& [label, values] : rows) values = z_normalize(values);
  }
  std::vector<DistancePair> pairs;
  pairs.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      pairs.push_back({rows[i].first, rows[j].first, dtw(rows[i].second, rows[j].second, options.dtw)});
    }
  }
  return summarize(std::move(pairs));
}

}  // namespace

DistanceDistribution pairwise_distribution(const HtsDataset& dataset, const PairwiseOptions& options) {
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (const auto& s : dataset.bottom()) rows.emplace_back(s.id, s.values);
  return pairwise(std::move(rows), options);
}

DistanceDistribution pairwise_distribution(const HtsDataset& dataset, const PairwiseOptions& options,
                                           std::span<const NodeId> nodes) {
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (const auto& node : nodes) {
    auto series = aggregate(dataset, node);
    rows.emplace_back(node.label(), std::move(series.values));
  }
  return pairwise(std::move(rows), options);
}

DistributionShift distribution_shift(const DistanceDistribution& original, const DistanceDistribution& transformed) {
  if (original.values.empty() || transformed.values.empty()) {
    throw PreconditionError("distribution shift needs non-empty distributions");
  }
  return {transformed.mean - original.mean, transformed.sd - original.sd};
}

}  // namespace htsr
