#include "htsr/forecast.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "htsr/csv.hpp"
#include "htsr/error.hpp"

namespace htsr {

std::string_view to_string(ForecasterKind kind) {
  switch (kind) {
    case ForecasterKind::Naive:
      return "naive";
    case ForecasterKind::SeasonalNaive:
      return "snaive";
    case ForecasterKind::EtsAdditive:
      return "ets";
    case ForecasterKind::AutoRegressive:
      return "ar";
  }
  return "unknown";
}

ForecasterKind parse_forecaster_kind(std::string_view name) {
  for (const auto kind : {ForecasterKind::Naive, ForecasterKind::SeasonalNaive, ForecasterKind::EtsAdditive,
                          ForecasterKind::AutoRegressive}) {
    if (to_string(kind) == name) return kind;
  }
  throw LookupError(fmt::format("unknown forecaster '{}'", name));
}

std::string_view to_string(Reconciliation r) {
  switch (r) {
    case Reconciliation::None:
      return "none";
    case Reconciliation::BottomUp:
      return "bu";
    case Reconciliation::MinT:
      return "mint";
  }
  return "unknown";
}

namespace {

std::size_t ar_order(const ForecasterSpec& spec, int seasonal_period) {
  const auto it = spec.hyperparameters.find("order");
  if (it == spec.hyperparameters.end()) return static_cast<std::size_t>(std::max(seasonal_period, 1));
  const double order = it->second;
  if (!(order >= 1.0) || order != std::floor(order)) {
    throw PreconditionError(fmt::format("ar order must be a positive integer, got {}", order));
  }
  return static_cast<std::size_t>(order);
}

FitResult fit_naive(std::span<const double> y, std::size_t horizon) {
  FitResult out;
  out.forecasts.assign(horizon, y.back());
  for (std::size_t t = 1; t < y.size(); ++t) out.residuals.push_back(y[t] - y[t - 1]);
  return out;
}

FitResult fit_seasonal_naive(std::span<const double> y, std::size_t m, std::size_t horizon) {
  FitResult out;
  const std::size_t n = y.size();
  out.forecasts.resize(horizon);
  for (std::size_t h = 0; h < horizon; ++h) out.forecasts[h] = y[n - m + h % m];
  for (std::size_t t = m; t < n; ++t) out.residuals.push_back(y[t] - y[t - m]);
  return out;
}

// y_t = c + sum_k phi_k y_{t-k}, least squares over t = p..n-1.
FitResult fit_autoregressive(std::span<const double> y, std::size_t p, std::size_t horizon) {
  const std::size_t n = y.size();
  const std::size_t rows = n - p;
  Eigen::MatrixXd x(rows, p + 1);
  Eigen::VectorXd target(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + p;
    x(r, 0) = 1.0;
    for (std::size_t k = 1; k <= p; ++k) x(r, k) = y[t - k];
    target(r) = y[t];
  }
  const Eigen::VectorXd coef = x.colPivHouseholderQr().solve(target);
  const Eigen::VectorXd fitted = x * coef;

  FitResult out;
  out.residuals.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) out.residuals[r] = target(r) - fitted(r);

  std::vector<double> history(y.begin(), y.end());
  out.forecasts.resize(horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    double next = coef(0);
    for (std::size_t k = 1; k <= p; ++k) next += coef(static_cast<Eigen::Index>(k)) * history[history.size() - k];
    out.forecasts[h] = next;
    history.push_back(next);
  }
  return out;
}

}  // namespace

std::size_t minimum_length(const ForecasterSpec& spec, int seasonal_period) {
  const auto m = static_cast<std::size_t>(std::max(seasonal_period, 1));
  switch (spec.kind) {
    case ForecasterKind::Naive:
      return 2;
    case ForecasterKind::SeasonalNaive:
      return std::max<std::size_t>(2 * m, 2);
    case ForecasterKind::EtsAdditive:
      return std::max<std::size_t>(2 * m, 3);
    case ForecasterKind::AutoRegressive:
      return std::max<std::size_t>(2 * m, 2 * ar_order(spec, seasonal_period) + 2);
  }
  return 2;
}

FitResult fit(const TimeSeries& series, const ForecasterSpec& spec, std::size_t horizon) {
  validate(series);
  if (horizon == 0) throw PreconditionError("forecast horizon must be positive");
  const auto need = minimum_length(spec, series.seasonal_period);
  if (series.size() < need) {
    throw PreconditionError(fmt::format("{} needs at least {} observations, series '{}' has {}", to_string(spec.kind),
                                        need, series.id, series.size()));
  }
  const auto m = static_cast<std::size_t>(series.seasonal_period);
  FitResult out;
  switch (spec.kind) {
    case ForecasterKind::Naive:
      out = fit_naive(series.values, horizon);
      break;
    case ForecasterKind::SeasonalNaive:
      out = fit_seasonal_naive(series.values, m, horizon);
      break;
    case ForecasterKind::EtsAdditive: {
      auto ets = fit_ets(series.values, series.seasonal_period, horizon);
      out = {std::move(ets.forecasts), std::move(ets.residuals)};
      break;
    }
    case ForecasterKind::AutoRegressive:
      out = fit_autoregressive(series.values, ar_order(spec, series.seasonal_period), horizon);
      break;
  }
  for (const double f : out.forecasts) {
    if (!std::isfinite(f)) throw PreconditionError(fmt::format("non-finite forecast for series '{}'", series.id));
  }
  return out;
}

std::vector<double> fit_predict(const TimeSeries& series, const ForecasterSpec& spec, std::size_t horizon) {
  return fit(series, spec, horizon).forecasts;
}

// ---------------------------------------------------------------------------

Method parse_method(std::string_view id) {
  const auto sep = id.rfind('_');
  if (sep == std::string_view::npos) {
    throw LookupError(fmt::format("method '{}' must look like <forecaster>_<bu|mint|none>", id));
  }
  Method m;
  m.id = std::string(id);
  m.forecaster.kind = parse_forecaster_kind(id.substr(0, sep));
  const auto rec = id.substr(sep + 1);
  if (rec == "bu") {
    m.reconciliation = Reconciliation::BottomUp;
  } else if (rec == "mint") {
    m.reconciliation = Reconciliation::MinT;
  } else if (rec == "none") {
    m.reconciliation = Reconciliation::None;
  } else {
    throw LookupError(fmt::format("unknown reconciliation '{}' in method '{}'", rec, id));
  }
  return m;
}

const std::vector<double>& ForecastRun::forecast(const NodeId& node) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == node) return forecasts[i];
  }
  throw LookupError(fmt::format("no forecast for node '{}'", node.label()));
}

ForecastRun run_method(const HtsDataset& dataset, const Method& method, std::size_t horizon) {
  const auto [train, test] = split(dataset, horizon);
  const auto& structure = train.structure();

  ForecastRun run;
  run.method = method.id;
  run.reconciliation = method.reconciliation;
  run.horizon = horizon;
  run.nodes = structure.nodes();
  run.base_forecasts.assign(structure.num_nodes(), {});

  const bool fit_all = method.reconciliation != Reconciliation::BottomUp;
  NodeSeries residuals(structure.num_nodes());
  const auto values = aggregate_all(train);
  for (std::size_t i = fit_all ? 0 : structure.bottom_offset(); i < structure.num_nodes(); ++i) {
    const TimeSeries series{run.nodes[i].label(), values[i], train.seasonal_period(), 0};
    auto result = fit(series, method.forecaster, horizon);
    run.base_forecasts[i] = std::move(result.forecasts);
    residuals[i] = std::move(result.residuals);
  }

  switch (method.reconciliation) {
    case Reconciliation::None:
      run.forecasts = run.base_forecasts;
      break;
    case Reconciliation::BottomUp:
      run.forecasts = reconcile_bu(run.base_forecasts, structure);
      break;
    case Reconciliation::MinT:
      run.forecasts = reconcile_mint(run.base_forecasts, structure, residuals, method.mint);
      break;
  }
  return run;
}

std::string forecast_dump_csv(const ForecastRun& run) {
  std::string out = "node,step,base,reconciled\n";
  for (std::size_t i = 0; i < run.nodes.size(); ++i) {
    for (std::size_t h = 0; h < run.horizon; ++h) {
      const auto base = run.base_forecasts[i].empty() ? std::string() : csv::format_double(run.base_forecasts[i][h]);
      out += fmt::format("{},{},{},{}\n", run.nodes[i].label(), h + 1, base, csv::format_double(run.forecasts[i][h]));
    }
  }
  return out;
}

}  // namespace htsr
