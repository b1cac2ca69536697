#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htsr/hts_core.hpp"
#include "htsr/spline.hpp"

namespace htsr {

enum class TransformKind { Jitter, Scaling, MagnitudeWarp, TimeWarp };

inline constexpr std::array<TransformKind, 4> kAllTransformKinds = {
    TransformKind::Jitter, TransformKind::Scaling, TransformKind::MagnitudeWarp, TransformKind::TimeWarp};

/// "jitter", "scaling", "magnitude_warp", "time_warp".
std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

/// Random stream used by every transformation.
using Rng = std::mt19937_64;

/// One transformation at one intensity step. The effective relative sigma
/// grows linearly with the version: base_sigma * (version + 1).
struct TransformSpec {
  TransformKind kind = TransformKind::Jitter;
  int version = 0;
  double base_sigma = 0.05;
  int knots = 4;
  std::uint64_t seed = 0;

  double sigma() const { return base_sigma * static_cast<double>(version + 1); }
};

void validate(const TransformSpec& spec);

/// Identity of one semi-synthetic dataset.
struct VariantKey {
  TransformKind transformation = TransformKind::Jitter;
  int version = 0;
  int sample = 0;
  std::uint64_t seed = 0;

  /// `<dataset>__<kind>__v<version>__s<sample>`
  std::string file_stem(std::string_view dataset) const;

  bool operator==(const VariantKey&) const = default;
};

struct TransformedDataset {
  HtsDataset data;
  VariantKey provenance;
};

// Transformations. Each takes the relative intensity `sigma` and leaves the
// input untouched (bitwise) when sigma == 0.

/// Adds N(0, (sigma * sd(z))^2) noise; sd is the sample standard deviation.
TimeSeries jitter(const TimeSeries& series, double sigma, Rng& rng);
/// Multiplies the whole series by one draw alpha ~ N(1, sigma^2).
TimeSeries scaling(const TimeSeries& series, double sigma, Rng& rng);
/// Multiplies by a natural cubic spline through `knots` values ~ N(1, sigma^2).
TimeSeries magnitude_warp(const TimeSeries& series, double sigma, int knots, Rng& rng);
/// Resamples the series along a time axis distorted by a random spline.
TimeSeries time_warp(const TimeSeries& series, double sigma, int knots, Rng& rng);

TimeSeries apply_transform(const TimeSeries& series, const TransformSpec& spec, Rng& rng);

/// Knot values 1 + sigma * N(0, 1).
std::vector<double> draw_knot_values(int knots, double sigma, Rng& rng);

/// Spline through `knot_values` placed at equally spaced positions over
/// [0, length - 1].
NaturalCubicSpline warp_curve(std::size_t length, std::span<const double> knot_values);

TimeSeries apply_magnitude_warp(const TimeSeries& series, std::span<const double> knot_values);

/// Lower clamp applied to the time-warp speed curve before integration.
inline constexpr double kMinWarpSpeed = 0.01;

/// Cumulative warped time stamps rescaled so the first is 0 and the last is
/// length - 1. Strictly increasing.
std::vector<double> warped_positions(std::size_t length, std::span<const double> knot_values);

TimeSeries apply_time_warp(const TimeSeries& series, std::span<const double> knot_values);

/// Linear interpolation of `values` at fractional index `position`, clamped to
/// the valid range.
double interpolate_linear(std::span<const double> values, double position);

/// [base, 2 base, ..., num_versions * base]
std::vector<double> make_schedule(double base_sigma, int num_versions);

/// Seed of one variant. Versions of the same sample share their draws
/// (common random numbers), so two versions differ only in sigma.
std::uint64_t derive_variant_seed(std::uint64_t master_seed, std::string_view dataset, TransformKind kind,
                                  int sample);
/// Per-series substream seed, keyed by id so input order does not matter.
std::uint64_t derive_series_seed(std::uint64_t variant_seed, std::string_view series_id);

struct VariantPlan {
  std::vector<TransformKind> kinds{kAllTransformKinds.begin(), kAllTransformKinds.end()};
  int num_versions = 6;
  int num_samples = 10;
  double base_sigma = 0.05;
  int knots = 4;
  std::uint64_t master_seed = 0;
};

void validate(const VariantPlan& plan);

/// Every (kind, version, sample) triple in generation order.
std::vector<VariantKey> enumerate_variants(const HtsDataset& dataset, const VariantPlan& plan);

TransformedDataset make_variant(const HtsDataset& dataset, const VariantKey& key, const VariantPlan& plan);

/// Calls `sink` once per variant in enumerate_variants() order.
void generate_variants(const HtsDataset& dataset, const VariantPlan& plan,
                       const std::function<void(TransformedDataset&&)>& sink);

}  // namespace htsr
