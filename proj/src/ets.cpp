#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "htsr/error.hpp"
#include "htsr/forecast.hpp"

namespace htsr {

namespace {

struct EtsState {
  double level = 0.0;
  double trend = 0.0;
  std::vector<double> season;
};

std::size_t effective_period(int period) { return period > 1 ? static_cast<std::size_t>(period) : 1; }

void check_length(std::span<const double> y, int period) {
  const auto m = effective_period(period);
  const std::size_t need = std::max<std::size_t>(2 * m, 3);
  if (y.size() < need) {
    throw PreconditionError(fmt::format("ets needs at least {} observations, got {}", need, y.size()));
  }
}

// Seeds the state from the first two cycles and returns it positioned at the
// end of the first cycle.
EtsState initial_state(std::span<const double> y, std::size_t m) {
  const auto cycle_mean = [&](std::size_t start) {
    return std::accumulate(y.begin() + static_cast<std::ptrdiff_t>(start),
                           y.begin() + static_cast<std::ptrdiff_t>(start + m), 0.0) /
           static_cast<double>(m);
  };
  const double first = cycle_mean(0);
  const double slope = (cycle_mean(m) - first) / static_cast<double>(m);
  const double centre = (static_cast<double>(m) - 1.0) / 2.0;
  EtsState s;
  s.season.assign(m, 0.0);
  if (m > 1) {
    for (std::size_t i = 0; i < m; ++i) s.season[i] = y[i] - (first + slope * (static_cast<double>(i) - centre));
    const double mean = std::accumulate(s.season.begin(), s.season.end(), 0.0) / static_cast<double>(m);
    for (auto& v : s.season) v -= mean;
  }
  s.level = first + slope * centre;
  s.trend = slope;
  return s;
}

template <typename OnError>
EtsState run_filter(std::span<const double> y, std::size_t m, const EtsParams& p, OnError&& on_error) {
  auto s = initial_state(y, m);
  const bool seasonal = m > 1;
  for (std::size_t t = m; t < y.size(); ++t) {
    double& season = s.season[t % m];
    const double fitted = s.level + s.trend + season;
    on_error(y[t] - fitted);
    const double level = p.alpha * (y[t] - season) + (1.0 - p.alpha) * (s.level + s.trend);
    s.trend = p.beta * (level - s.level) + (1.0 - p.beta) * s.trend;
    s.level = level;
    if (seasonal) season = p.gamma * (y[t] - level) + (1.0 - p.gamma) * season;
  }
  return s;
}

using Point = std::array<double, 3>;

Point clamp_to_box(Point p) {
  for (auto& v : p) v = std::clamp(v, kEtsLower, kEtsUpper);
  return p;
}

double objective(std::span<const double> y, int period, const Point& p) {
  const double sse = ets_sse(y, period, {p[0], p[1], p[2]});
  return std::isfinite(sse) ? sse : std::numeric_limits<double>::max();
}

struct Vertex {
  Point x;
  double f;
};

// Nelder-Mead with every trial point projected onto the parameter box.
Vertex nelder_mead(std::span<const double> y, int period, Point start) {
  constexpr double kStep = 0.1;
  std::array<Vertex, 4> simplex;
  start = clamp_to_box(start);
  simplex[0] = {start, objective(y, period, start)};
  for (std::size_t i = 0; i < 3; ++i) {
    Point p = start;
    p[i] = p[i] + kStep <= kEtsUpper ? p[i] + kStep : p[i] - kStep;
    p = clamp_to_box(p);
    simplex[i + 1] = {p, objective(y, period, p)};
  }
  const auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };

  for (int iter = 0; iter < kEtsMaxIterations; ++iter) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    if (simplex[3].f - simplex[0].f <= 1e-12 * (1.0 + std::abs(simplex[0].f))) break;

    Point centroid{};
    for (std::size_t v = 0; v < 3; ++v)
      for (std::size_t i = 0; i < 3; ++i) centroid[i] += simplex[v].x[i] / 3.0;
    const auto along = [&](double coef) {
      Point p;
      for (std::size_t i = 0; i < 3; ++i) p[i] = centroid[i] + coef * (simplex[3].x[i] - centroid[i]);
      p = clamp_to_box(p);
      return Vertex{p, objective(y, period, p)};
    };

    const auto reflected = along(-1.0);
    if (reflected.f < simplex[0].f) {
      const auto expanded = along(-2.0);
      simplex[3] = expanded.f < reflected.f ? expanded : reflected;
    } else if (reflected.f < simplex[2].f) {
      simplex[3] = reflected;
    } else {
      const auto contracted = reflected.f < simplex[3].f ? along(-0.5) : along(0.5);
      if (contracted.f < std::min(reflected.f, simplex[3].f)) {
        simplex[3] = contracted;
      } else {
        for (std::size_t v = 1; v < 4; ++v) {
          Point p;
          for (std::size_t i = 0; i < 3; ++i) p[i] = simplex[0].x[i] + 0.5 * (simplex[v].x[i] - simplex[0].x[i]);
          p = clamp_to_box(p);
          simplex[v] = {p, objective(y, period, p)};
        }
      }
    }
  }
  return *std::min_element(simplex.begin(), simplex.end(), by_value);
}

}  // namespace

double ets_sse(std::span<const double> y, int period, const EtsParams& params) {
  check_length(y, period);
  double sse = 0.0;
  run_filter(y, effective_period(period), params, [&](double e) { sse += e * e; });
  return sse;
}

EtsFit ets_filter(std::span<const double> y, int period, const EtsParams& params, std::size_t horizon) {
  check_length(y, period);
  const auto m = effective_period(period);
  EtsFit out;
  out.params = params;
  const auto state = run_filter(y, m, params, [&](double e) {
    out.sse += e * e;
    out.residuals.push_back(e);
  });
  const std::size_t n = y.size();
  out.forecasts.resize(horizon);
  for (std::size_t h = 1; h <= horizon; ++h) {
    out.forecasts[h - 1] = state.level + static_cast<double>(h) * state.trend + state.season[(n - 1 + h) % m];
  }
  return out;
}

EtsFit fit_ets(std::span<const double> y, int period, std::size_t horizon) {
  check_length(y, period);
  static constexpr std::array<Point, 3> kStarts = {Point{0.3, 0.1, 0.1}, Point{0.5, 0.05, 0.3},
                                                   Point{0.8, 0.2, 0.5}};
  static constexpr std::array<double, 3> kGrid = {0.1, 0.5, 0.9};

  // Best point of a coarse grid serves as an extra start.
  Vertex grid_best{{kGrid[0], kGrid[0], kGrid[0]}, std::numeric_limits<double>::infinity()};
  for (const double a : kGrid)
    for (const double b : kGrid)
      for (const double g : kGrid) {
        const Point p{a, b, g};
        const double f = objective(y, period, p);
        if (f < grid_best.f) grid_best = {p, f};
      }

  Vertex best = nelder_mead(y, period, grid_best.x);
  if (grid_best.f < best.f) best = grid_best;
  for (const auto& start : kStarts) {
    const auto v = nelder_mead(y, period, start);
    if (v.f < best.f) best = v;
  }
  return ets_filter(y, period, {best.x[0], best.x[1], best.x[2]}, horizon);
}

}  // namespace htsr
