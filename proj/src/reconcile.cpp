#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "htsr/error.hpp"
#include "htsr/forecast.hpp"

namespace htsr {

std::string_view to_string(CovarianceKind c) {
  switch (c) {
    case CovarianceKind::Identity:
      return "identity";
    case CovarianceKind::SampleDiagonal:
      return "sample_diagonal";
    case CovarianceKind::Shrinkage:
      return "shrinkage";
  }
  return "unknown";
}

CovarianceKind parse_covariance_kind(std::string_view name) {
  for (const auto kind : {CovarianceKind::Identity, CovarianceKind::SampleDiagonal, CovarianceKind::Shrinkage}) {
    if (to_string(kind) == name) return kind;
  }
  throw LookupError(fmt::format("unknown covariance estimator '{}'", name));
}

namespace {

std::size_t forecast_length(const NodeSeries& rows, const SummingStructure& structure) {
  if (rows.size() != structure.num_nodes()) {
    throw DimensionError(fmt::format("expected {} node rows, got {}", structure.num_nodes(), rows.size()));
  }
  std::size_t len = 0;
  for (std::size_t i = structure.bottom_offset(); i < rows.size(); ++i) {
    if (rows[i].empty()) {
      throw LookupError(fmt::format("missing base forecast for bottom node '{}'", structure.nodes()[i].label()));
    }
    if (len == 0) len = rows[i].size();
    if (rows[i].size() != len) throw DimensionError("bottom forecasts differ in length");
  }
  return len;
}

Eigen::MatrixXd summing_matrix(const SummingStructure& structure) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(structure.num_nodes()),
                                            static_cast<Eigen::Index>(structure.num_bottom()));
  for (std::size_t i = 0; i < structure.num_nodes(); ++i) {
    for (const auto b : structure.members(i)) s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = 1.0;
  }
  return s;
}

}  // namespace

NodeSeries reconcile_bu(const NodeSeries& base, const SummingStructure& structure) {
  forecast_length(base, structure);
  const std::span<const std::vector<double>> bottom(base.data() + structure.bottom_offset(), structure.num_bottom());
  return structure.sum_up(bottom);
}

CovarianceEstimate estimate_covariance(const NodeSeries& residuals, const MintConfig& config) {
  const std::size_t p = residuals.size();
  CovarianceEstimate est;
  est.size = p;
  est.matrix.assign(p * p, 0.0);
  if (config.covariance == CovarianceKind::Identity) {
    for (std::size_t i = 0; i < p; ++i) est.matrix[i * p + i] = 1.0;
    return est;
  }

  std::size_t n = residuals.empty() ? 0 : residuals.front().size();
  for (const auto& r : residuals) n = std::min(n, r.size());
  if (n < 2) {
    throw PreconditionError(fmt::format("{} covariance needs at least 2 residuals per node, got {}",
                                        to_string(config.covariance), n));
  }
  // Trailing common window, rows = observations.
  Eigen::MatrixXd e(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    const auto& r = residuals[j];
    for (std::size_t t = 0; t < n; ++t) e(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = r[r.size() - n + t];
  }
  const double nn = static_cast<double>(n);
  const Eigen::MatrixXd cov = (e.transpose() * e) / nn;

  Eigen::MatrixXd w;
  if (config.covariance == CovarianceKind::SampleDiagonal) {
    w = cov.diagonal().asDiagonal();
  } else {
    double lambda = 0.0;
    if (config.shrinkage_intensity) {
      lambda = *config.shrinkage_intensity;
      if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw PreconditionError(fmt::format("shrinkage intensity must lie in [0, 1], got {}", lambda));
      }
    } else {
      // Schafer-Strimmer intensity for a diagonal target: the summed variance
      // of the off-diagonal correlation estimates over their summed squares.
      const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
      if ((sd.array() <= 0.0).any()) {
        throw SingularityError("a node has zero residual variance; use identity covariance");
      }
      const Eigen::MatrixXd xs = e * sd.cwiseInverse().asDiagonal();
      const Eigen::MatrixXd xs2 = xs.cwiseProduct(xs);
      const Eigen::MatrixXd cross = xs.transpose() * xs;
      Eigen::MatrixXd v = (xs2.transpose() * xs2 - cross.cwiseProduct(cross) / nn) / (nn * (nn - 1.0));
      v.diagonal().setZero();
      Eigen::MatrixXd corr = cross / nn;
      corr.diagonal().setZero();
      const double denom = corr.cwiseProduct(corr).sum();
      lambda = denom > 0.0 ? std::clamp(v.sum() / denom, 0.0, 1.0) : 1.0;
    }
    Eigen::MatrixXd target = Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
    target.diagonal() = cov.diagonal();
    w = lambda * target + (1.0 - lambda) * cov;
    est.lambda = lambda;
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) est.matrix[i * p + j] = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return est;
}

NodeSeries reconcile_mint(const NodeSeries& base, const SummingStructure& structure, const NodeSeries& residuals,
                          const MintConfig& config) {
  const std::size_t horizon = forecast_length(base, structure);
  for (std::size_t i = 0; i < structure.num_aggregates(); ++i) {
    if (base[i].size() != horizon) {
      throw LookupError(fmt::format("missing base forecast for node '{}'", structure.nodes()[i].label()));
    }
  }
  if (config.covariance != CovarianceKind::Identity && residuals.size() != structure.num_nodes()) {
    throw PreconditionError(fmt::format("{} covariance needs residuals for all {} nodes",
                                        to_string(config.covariance), structure.num_nodes()));
  }
  const auto p = static_cast<Eigen::Index>(structure.num_nodes());
  const auto cov = estimate_covariance(config.covariance == CovarianceKind::Identity ? NodeSeries(structure.num_nodes())
                                                                                     : residuals,
                                       config);
  const Eigen::MatrixXd w = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cov.matrix.data(), p, p);
  const Eigen::MatrixXd s = summing_matrix(structure);

  const Eigen::LDLT<Eigen::MatrixXd> w_ldlt(w);
  const Eigen::VectorXd pivots = w_ldlt.vectorD();
  const double pivot_scale = pivots.cwiseAbs().maxCoeff();
  if (w_ldlt.info() != Eigen::Success || !(pivots.minCoeff() > 1e-12 * pivot_scale)) {
    throw SingularityError(fmt::format("{} error covariance is singular; use shrinkage or identity covariance",
                                       to_string(config.covariance)));
  }
  const Eigen::MatrixXd winv_s = w_ldlt.solve(s);
  const Eigen::MatrixXd normal = s.transpose() * winv_s;
  const Eigen::LLT<Eigen::MatrixXd> normal_llt(normal);
  const Eigen::VectorXd normal_diag = normal.diagonal();
  if (normal_llt.info() != Eigen::Success) {
    throw SingularityError("S' W^-1 S is singular; use shrinkage or identity covariance");
  }
  const Eigen::MatrixXd l = normal_llt.matrixL();
  if (!(l.diagonal().minCoeff() > 1e-8 * std::sqrt(normal_diag.maxCoeff()))) {
    throw SingularityError("S' W^-1 S is ill-conditioned; use shrinkage or identity covariance");
  }
  // Projection onto bottom level: G = (S' W^-1 S)^-1 S' W^-1 = (W^-1 S (S' W^-1 S)^-1)'.
  const Eigen::MatrixXd g = normal_llt.solve(winv_s.transpose());

  const auto nb = structure.num_bottom();
  NodeSeries bottom(nb, std::vector<double>(horizon));
  Eigen::VectorXd y(p);
  for (std::size_t h = 0; h < horizon; ++h) {
    for (Eigen::Index i = 0; i < p; ++i) y(i) = base[static_cast<std::size_t>(i)][h];
    const Eigen::VectorXd b = g * y;
    for (std::size_t k = 0; k < nb; ++k) bottom[k][h] = b(static_cast<Eigen::Index>(k));
  }
  return structure.sum_up(bottom);
}

}  // namespace htsr
