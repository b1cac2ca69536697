#pragma once

#include <span>
#include <vector>

namespace htsr {

/// Natural cubic spline (zero second derivative at both ends) through a set
/// of points with strictly increasing abscissae. Evaluation outside the knot
/// range extrapolates with the boundary cubic.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  /// Second derivatives at the knots.
  const std::vector<double>& moments() const { return m_; }

 private:
  std::size_t interval(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

/// Solves a tridiagonal system with the Thomas algorithm. `sub[0]` and
/// `super[n-1]` are ignored. Requires diagonal dominance for stability.
std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> super, std::span<const double> rhs);

/// `count` equally spaced positions covering [lo, hi] inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace htsr
