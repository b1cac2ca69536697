#include "htsr/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "htsr/error.hpp"

namespace htsr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

double sample_sd(std::span<const double> values) {
  const auto n = values.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

void check_sigma(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw PreconditionError(fmt::format("sigma must be a finite non-negative number, got {}", sigma));
  }
}

void check_warp_inputs(std::size_t length, std::size_t knots) {
  if (knots < 2) throw PreconditionError(fmt::format("warping needs at least 2 knots, got {}", knots));
  if (length < 4) throw PreconditionError(fmt::format("warping needs a series of length >= 4, got {}", length));
}

}  // namespace

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Jitter:
      return "jitter";
    case TransformKind::Scaling:
      return "scaling";
    case TransformKind::MagnitudeWarp:
      return "magnitude_warp";
    case TransformKind::TimeWarp:
      return "time_warp";
  }
  return "unknown";
}

TransformKind parse_transform_kind(std::string_view name) {
  for (const auto kind : kAllTransformKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw LookupError(fmt::format("unknown transformation '{}'", name));
}

void validate(const TransformSpec& spec) {
  if (!(spec.base_sigma > 0.0) || !std::isfinite(spec.base_sigma)) {
    throw PreconditionError(fmt::format("base_sigma must be positive, got {}", spec.base_sigma));
  }
  if (spec.version < 0) throw PreconditionError(fmt::format("version must be >= 0, got {}", spec.version));
  if ((spec.kind == TransformKind::MagnitudeWarp || spec.kind == TransformKind::TimeWarp) && spec.knots < 2) {
    throw PreconditionError(fmt::format("warping needs at least 2 knots, got {}", spec.knots));
  }
}

std::string VariantKey::file_stem(std::string_view dataset) const {
  return fmt::format("{}__{}__v{}__s{}", dataset, to_string(transformation), version, sample);
}

// ---------------------------------------------------------------------------

TimeSeries jitter(const TimeSeries& series, double sigma, Rng& rng) {
  check_sigma(sigma);
  const double scale = sigma * sample_sd(series.values);
  TimeSeries out = series;
  if (scale == 0.0) return out;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& v : out.values) v += scale * noise(rng);
  return out;
}

TimeSeries scaling(const TimeSeries& series, double sigma, Rng& rng) {
  check_sigma(sigma);
  TimeSeries out = series;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double alpha = 1.0 + sigma * normal(rng);
  for (auto& v : out.values) v *= alpha;
  return out;
}

std::vector<double> draw_knot_values(int knots, double sigma, Rng& rng) {
  check_sigma(sigma);
  if (knots < 2) throw PreconditionError(fmt::format("warping needs at least 2 knots, got {}", knots));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u(static_cast<std::size_t>(knots));
  for (auto& v : u) v = 1.0 + sigma * normal(rng);
  return u;
}

NaturalCubicSpline warp_curve(std::size_t length, std::span<const double> knot_values) {
  check_warp_inputs(length, knot_values.size());
  return NaturalCubicSpline(linspace(0.0, static_cast<double>(length - 1), knot_values.size()),
                            {knot_values.begin(), knot_values.end()});
}

TimeSeries apply_magnitude_warp(const TimeSeries& series, std::span<const double> knot_values) {
  const auto curve = warp_curve(series.size(), knot_values);
  TimeSeries out = series;
  for (std::size_t t = 0; t < out.values.size(); ++t) out.values[t] *= curve(static_cast<double>(t));
  return out;
}

TimeSeries magnitude_warp(const TimeSeries& series, double sigma, int knots, Rng& rng) {
  check_warp_inputs(series.size(), knots < 0 ? 0 : static_cast<std::size_t>(knots));
  return apply_magnitude_warp(series, draw_knot_values(knots, sigma, rng));
}

std::vector<double> warped_positions(std::size_t length, std::span<const double> knot_values) {
  const auto curve = warp_curve(length, knot_values);
  std::vector<double> w(length);
  double acc = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    acc += std::max(curve(static_cast<double>(t)), kMinWarpSpeed);
    w[t] = acc;
  }
  const double first = w.front();
  const double span = w.back() - first;
  const double last = static_cast<double>(length - 1);
  for (auto& p : w) p = std::clamp((p - first) * last / span, 0.0, last);
  w.front() = 0.0;
  w.back() = last;
  return w;
}

double interpolate_linear(std::span<const double> values, double position) {
  if (values.empty()) throw PreconditionError("cannot interpolate an empty series");
  const double last = static_cast<double>(values.size() - 1);
  if (!(position > 0.0)) return values.front();
  if (position >= last) return values.back();
  const double base = std::floor(position);
  const auto i = static_cast<std::size_t>(base);
  const double frac = position - base;
  if (frac == 0.0) return values[i];
  return values[i] + frac * (values[i + 1] - values[i]);
}

TimeSeries apply_time_warp(const TimeSeries& series, std::span<const double> knot_values) {
  const auto positions = warped_positions(series.size(), knot_values);
  TimeSeries out = series;
  for (std::size_t t = 0; t < positions.size(); ++t) out.values[t] = interpolate_linear(series.values, positions[t]);
  return out;
}

TimeSeries time_warp(const TimeSeries& series, double sigma, int knots, Rng& rng) {
  check_warp_inputs(series.size(), knots < 0 ? 0 : static_cast<std::size_t>(knots));
  return apply_time_warp(series, draw_knot_values(knots, sigma, rng));
}

TimeSeries apply_transform(const TimeSeries& series, const TransformSpec& spec, Rng& rng) {
  validate(spec);
  const double sigma = spec.sigma();
  switch (spec.kind) {
    case TransformKind::Jitter:
      return jitter(series, sigma, rng);
    case TransformKind::Scaling:
      return scaling(series, sigma, rng);
    case TransformKind::MagnitudeWarp:
      return magnitude_warp(series, sigma, spec.knots, rng);
    case TransformKind::TimeWarp:
      return time_warp(series, sigma, spec.knots, rng);
  }
  throw PreconditionError("unknown transformation kind");
}

std::vector<double> make_schedule(double base_sigma, int num_versions) {
  if (!(base_sigma > 0.0)) throw PreconditionError(fmt::format("base_sigma must be positive, got {}", base_sigma));
  if (num_versions < 1) throw PreconditionError(fmt::format("num_versions must be >= 1, got {}", num_versions));
  std::vector<double> out(static_cast<std::size_t>(num_versions));
  for (int v = 0; v < num_versions; ++v) out[static_cast<std::size_t>(v)] = base_sigma * static_cast<double>(v + 1);
  return out;
}

// ---------------------------------------------------------------------------

std::uint64_t derive_variant_seed(std::uint64_t master_seed, std::string_view dataset, TransformKind kind,
                                  int sample) {
  std::uint64_t h = combine(splitmix64(master_seed), fnv1a(dataset));
  h = combine(h, static_cast<std::uint64_t>(kind));
  return combine(h, static_cast<std::uint64_t>(sample));
}

std::uint64_t derive_series_seed(std::uint64_t variant_seed, std::string_view series_id) {
  return combine(variant_seed, fnv1a(series_id));
}

void validate(const VariantPlan& plan) {
  if (plan.kinds.empty()) throw PreconditionError("at least one transformation kind is required");
  if (plan.num_versions < 1) throw PreconditionError("num_versions must be >= 1");
  if (plan.num_samples < 1) throw PreconditionError("num_samples must be >= 1");
  validate(TransformSpec{TransformKind::MagnitudeWarp, 0, plan.base_sigma, plan.knots, 0});
}

std::vector<VariantKey> enumerate_variants(const HtsDataset& dataset, const VariantPlan& plan) {
  validate(plan);
  std::vector<VariantKey> keys;
  keys.reserve(plan.kinds.size() * static_cast<std::size_t>(plan.num_versions * plan.num_samples));
  for (const auto kind : plan.kinds) {
    for (int v = 0; v < plan.num_versions; ++v) {
      for (int j = 0; j < plan.num_samples; ++j) {
        keys.push_back({kind, v, j, derive_variant_seed(plan.master_seed, dataset.name(), kind, j)});
      }
    }
  }
  return keys;
}

TransformedDataset make_variant(const HtsDataset& dataset, const VariantKey& key, const VariantPlan& plan) {
  const TransformSpec spec{key.transformation, key.version, plan.base_sigma, plan.knots, key.seed};
  std::vector<TimeSeries> bottom;
  bottom.reserve(dataset.num_series());
  for (const auto& s : dataset.bottom()) {
    Rng rng(derive_series_seed(key.seed, s.id));
    bottom.push_back(apply_transform(s, spec, rng));
  }
  return {dataset.with_bottom(std::move(bottom)), key};
}

void generate_variants(const HtsDataset& dataset, const VariantPlan& plan,
                       const std::function<void(TransformedDataset&&)>& sink) {
  for (const auto& key : enumerate_variants(dataset, plan)) sink(make_variant(dataset, key, plan));
}

}  // namespace htsr
