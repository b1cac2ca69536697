#include "htsr/spline.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "htsr/error.hpp"

namespace htsr {

std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> super, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (sub.size() != n || super.size() != n || rhs.size() != n) {
    throw DimensionError("tridiagonal bands must share the system size");
  }
  if (n == 0) return {};
  std::vector<double> c(n), d(n);
  c[0] = super[0] / diag[0];
  d[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double denom = diag[i] - sub[i] * c[i - 1];
    c[i] = i + 1 < n ? super[i] / denom : 0.0;
    d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out[count - 1] = hi;
  return out;
}

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2) throw PreconditionError("a spline needs at least two knots");
  if (y_.size() != n) throw DimensionError(fmt::format("{} abscissae but {} ordinates", n, y_.size()));
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw PreconditionError("spline knots must be strictly increasing");
  }
  m_.assign(n, 0.0);
  if (n == 2) return;

  // Interior moments M_1..M_{n-2}:
  // h_{i-1} M_{i-1} + 2 (h_{i-1} + h_i) M_i + h_i M_{i+1} = 6 (delta_i - delta_{i-1})
  const std::size_t k = n - 2;
  std::vector<double> sub(k), diag(k), super(k), rhs(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t i = j + 1;
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    sub[j] = h0;
    diag[j] = 2.0 * (h0 + h1);
    super[j] = h1;
    rhs[j] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  const auto interior = solve_tridiagonal(sub, diag, super, rhs);
  std::copy(interior.begin(), interior.end(), m_.begin() + 1);
}

std::size_t NaturalCubicSpline::interval(double x) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const auto pos = static_cast<std::size_t>(it - x_.begin());
  if (pos == 0) return 0;
  return std::min(pos - 1, x_.size() - 2);
}

// On [x_i, x_{i+1}] with dx = x - x_i the spline is
// y_i + b dx + (M_i / 2) dx^2 + (M_{i+1} - M_i) / (6 h) dx^3.
// Constant data gives b = M = 0, so the spline evaluates to y_i exactly.

double NaturalCubicSpline::operator()(double x) const {
  const auto i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double dx = x - x_[i];
  const double b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
  const double c = m_[i] / 2.0;
  const double d = (m_[i + 1] - m_[i]) / (6.0 * h);
  return y_[i] + dx * (b + dx * (c + dx * d));
}

double NaturalCubicSpline::derivative(double x) const {
  const auto i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double dx = x - x_[i];
  const double b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
  return b + dx * (m_[i] + dx * (m_[i + 1] - m_[i]) / (2.0 * h));
}

double NaturalCubicSpline::second_derivative(double x) const {
  const auto i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double dx = x - x_[i];
  return m_[i] + dx * (m_[i + 1] - m_[i]) / h;
}

}  // namespace htsr
