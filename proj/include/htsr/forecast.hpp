#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htsr/hts_core.hpp"

namespace htsr {

enum class ForecasterKind { Naive, SeasonalNaive, EtsAdditive, AutoRegressive };

/// "naive", "snaive", "ets", "ar".
std::string_view to_string(ForecasterKind kind);
ForecasterKind parse_forecaster_kind(std::string_view name);

struct ForecasterSpec {
  ForecasterKind kind = ForecasterKind::Naive;
  /// Kind-specific settings. AutoRegressive reads "order" (default: the
  /// seasonal period).
  std::map<std::string, double> hyperparameters;
};

/// Shortest training series the forecaster accepts.
std::size_t minimum_length(const ForecasterSpec& spec, int seasonal_period);

struct FitResult {
  std::vector<double> forecasts;
  /// One-step in-sample errors (actual minus fitted), oldest first.
  std::vector<double> residuals;
};

FitResult fit(const TimeSeries& series, const ForecasterSpec& spec, std::size_t horizon);

/// Point forecasts for the next `horizon` steps.
std::vector<double> fit_predict(const TimeSeries& series, const ForecasterSpec& spec, std::size_t horizon);

// ---------------------------------------------------------------------------
// Additive Holt-Winters (additive error, trend and season).

struct EtsParams {
  double alpha = 0.5;
  double beta = 0.1;
  double gamma = 0.1;
};

struct EtsFit {
  EtsParams params;
  double sse = 0.0;
  std::vector<double> forecasts;
  std::vector<double> residuals;
};

inline constexpr double kEtsLower = 1e-4;
inline constexpr double kEtsUpper = 0.9999;
inline constexpr int kEtsMaxIterations = 200;

/// In-sample one-step squared error for fixed smoothing parameters. Errors
/// are accumulated from the second seasonal cycle onward; the first cycle
/// seeds level, trend and seasonal indices. A period of 1 disables the
/// seasonal component.
double ets_sse(std::span<const double> y, int period, const EtsParams& params);

/// Runs the filter with fixed parameters and forecasts from the final state.
EtsFit ets_filter(std::span<const double> y, int period, const EtsParams& params, std::size_t horizon);

/// Chooses (alpha, beta, gamma) by bounded Nelder-Mead on ets_sse.
EtsFit fit_ets(std::span<const double> y, int period, std::size_t horizon);

// ---------------------------------------------------------------------------
// Reconciliation

enum class Reconciliation { None, BottomUp, MinT };

std::string_view to_string(Reconciliation r);

enum class CovarianceKind { Identity, SampleDiagonal, Shrinkage };

std::string_view to_string(CovarianceKind c);
CovarianceKind parse_covariance_kind(std::string_view name);

struct MintConfig {
  CovarianceKind covariance = CovarianceKind::Shrinkage;
  /// Fixed shrinkage intensity in [0, 1]; estimated when empty.
  std::optional<double> shrinkage_intensity;
};

/// Rows indexed like SummingStructure::nodes(), each holding one value per
/// horizon step. Aggregate rows may be empty where no base forecast exists.
using NodeSeries = std::vector<std::vector<double>>;

/// Replaces every aggregate row by the sum of its bottom rows.
NodeSeries reconcile_bu(const NodeSeries& base, const SummingStructure& structure);

/// Residual covariance used by MinT, row-major num_nodes x num_nodes.
struct CovarianceEstimate {
  std::vector<double> matrix;
  std::size_t size = 0;
  /// Shrinkage intensity actually applied (0 for non-shrinkage kinds).
  double lambda = 0.0;

  double at(std::size_t i, std::size_t j) const { return matrix[i * size + j]; }
};

/// Uncentred second-moment covariance of the residual rows, optionally shrunk
/// toward its diagonal. Uses the common trailing window of the rows.
CovarianceEstimate estimate_covariance(const NodeSeries& residuals, const MintConfig& config);

/// Generalised least-squares reconciliation, applied per forecast step:
/// bottom = (S' W^-1 S)^-1 S' W^-1 y, aggregates rebuilt from bottom.
NodeSeries reconcile_mint(const NodeSeries& base, const SummingStructure& structure, const NodeSeries& residuals,
                          const MintConfig& config);

// ---------------------------------------------------------------------------
// Methods

/// A forecaster paired with a reconciliation strategy, e.g. "ets_mint".
struct Method {
  std::string id;
  ForecasterSpec forecaster;
  Reconciliation reconciliation = Reconciliation::BottomUp;
  MintConfig mint;
};

/// Parses `<forecaster>_<bu|mint|none>`.
Method parse_method(std::string_view id);

struct ForecastRun {
  std::string method;
  Reconciliation reconciliation = Reconciliation::BottomUp;
  std::size_t horizon = 0;
  std::vector<NodeId> nodes;
  NodeSeries forecasts;
  /// Forecasts before reconciliation; empty rows for nodes that were not fitted.
  NodeSeries base_forecasts;

  const std::vector<double>& forecast(const NodeId& node) const;
};

/// Fits on the first length - horizon observations and forecasts the rest.
ForecastRun run_method(const HtsDataset& dataset, const Method& method, std::size_t horizon);

/// `node,step,base,reconciled`; base is blank where no base forecast exists.
std::string forecast_dump_csv(const ForecastRun& run);

}  // namespace htsr
