#include "potx/spline.hpp"

#include <algorithm>
#include <cmath>

#include "potx/error.hpp"

namespace potx {

CyclicCubicBasis::CyclicCubicBasis(std::vector<double> knots, double period)
    : knots_(std::move(knots)), period_(period) {
  const std::size_t n = knots_.size();
  if (n < 3) throw PreconditionError("cyclic spline needs at least 3 knots");
  if (!(period_ > 0.0)) throw PreconditionError("cyclic spline period must be > 0");
  for (std::size_t j = 1; j < n; ++j) {
    if (!(knots_[j] > knots_[j - 1])) {
      throw PreconditionError("cyclic spline knots must increase strictly");
    }
  }
  if (!(knots_.back() - knots_.front() < period_)) {
    throw PreconditionError("cyclic spline knots must span less than one period");
  }

  // Periodic continuity of the first derivative:
  //   h[j-1]/6 M[j-1] + (h[j-1]+h[j])/3 M[j] + h[j]/6 M[j+1]
  //     = (b[j+1]-b[j])/h[j] - (b[j]-b[j-1])/h[j-1]
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t prev = (j + n - 1) % n;
    const std::size_t next = (j + 1) % n;
    const double h_prev = width(prev);
    const double h = width(j);
    lhs(j, prev) += h_prev / 6.0;
    lhs(j, j) += (h_prev + h) / 3.0;
    lhs(j, next) += h / 6.0;
    rhs(j, next) += 1.0 / h;
    rhs(j, j) -= 1.0 / h + 1.0 / h_prev;
    rhs(j, prev) += 1.0 / h_prev;
  }
  curvature_ = lhs.partialPivLu().solve(rhs);
}

CyclicCubicBasis CyclicCubicBasis::uniform(std::size_t n, double start,
                                           double period) {
  std::vector<double> knots(n);
  for (std::size_t j = 0; j < n; ++j) {
    knots[j] = start + period * static_cast<double>(j) / static_cast<double>(n);
  }
  return CyclicCubicBasis(std::move(knots), period);
}

double CyclicCubicBasis::width(std::size_t j) const noexcept {
  const std::size_t n = knots_.size();
  return j + 1 < n ? knots_[j + 1] - knots_[j]
                   : knots_.front() + period_ - knots_.back();
}

std::size_t CyclicCubicBasis::locate(double x, double& offset) const {
  double u = std::fmod(x - knots_.front(), period_);
  if (u < 0.0) u += period_;
  if (u >= period_) u = 0.0;
  const double pos = knots_.front() + u;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), pos);
  const std::size_t j = static_cast<std::size_t>(it - knots_.begin()) - 1;
  offset = pos - knots_[j];
  return j;
}

void CyclicCubicBasis::basis_row(double x, std::span<double> out) const {
  const std::size_t n = knots_.size();
  double offset = 0.0;
  const std::size_t j = locate(x, offset);
  const std::size_t next = (j + 1) % n;
  const double h = width(j);
  const double t = offset / h;
  const double s = 1.0 - t;
  const double c_lo = h * h / 6.0 * (s * s * s - s);
  const double c_hi = h * h / 6.0 * (t * t * t - t);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = c_lo * curvature_(j, k) + c_hi * curvature_(next, k);
  }
  out[j] += s;
  out[next] += t;
}

double CyclicCubicBasis::evaluate(std::span<const double> coefficients, double x,
                                  int derivative_order) const {
  const std::size_t n = knots_.size();
  double offset = 0.0;
  const std::size_t j = locate(x, offset);
  const std::size_t next = (j + 1) % n;
  const double h = width(j);
  const double t = offset / h;
  const double s = 1.0 - t;
  double m_lo = 0.0, m_hi = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    m_lo += curvature_(j, k) * coefficients[k];
    m_hi += curvature_(next, k) * coefficients[k];
  }
  const double b_lo = coefficients[j];
  const double b_hi = coefficients[next];
  switch (derivative_order) {
    case 0:
      return s * b_lo + t * b_hi +
             h * h / 6.0 * ((s * s * s - s) * m_lo + (t * t * t - t) * m_hi);
    case 1:
      return (b_hi - b_lo) / h +
             h / 6.0 * ((1.0 - 3.0 * s * s) * m_lo + (3.0 * t * t - 1.0) * m_hi);
    case 2:
      return s * m_lo + t * m_hi;
    default:
      throw PreconditionError("derivative order must be 0, 1 or 2");
  }
}

}  // namespace potx
