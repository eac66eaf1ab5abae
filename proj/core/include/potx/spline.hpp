#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace potx {

// Cyclic cubic regression spline basis on a circle of length `period`.
//
// Coefficients are the spline values at the knots. Second derivatives at the
// knots follow from the periodic continuity system, so every coefficient
// vector gives a C2 periodic cubic that interpolates it. Constants are
// reproduced exactly.
class CyclicCubicBasis {
 public:
  CyclicCubicBasis() = default;

  // knots strictly increasing, knots.back() - knots.front() < period,
  // at least 3 knots.
  CyclicCubicBasis(std::vector<double> knots, double period);

  // n evenly spaced knots start, start + period/n, ...
  static CyclicCubicBasis uniform(std::size_t n, double start, double period);

  std::size_t size() const noexcept { return knots_.size(); }
  const std::vector<double>& knots() const noexcept { return knots_; }
  double period() const noexcept { return period_; }

  // Writes the basis function values at x into out (size() entries).
  void basis_row(double x, std::span<double> out) const;

  // derivative_order in {0, 1, 2}.
  double evaluate(std::span<const double> coefficients, double x,
                  int derivative_order = 0) const;

 private:
  // Index of the knot interval holding x and offset inside it.
  std::size_t locate(double x, double& offset) const;
  double width(std::size_t j) const noexcept;

  std::vector<double> knots_;
  double period_ = 0.0;
  Eigen::MatrixXd curvature_;  // knot values -> knot second derivatives
};

}  // namespace potx
