#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "potx/error.hpp"
#include "potx/spline.hpp"

using potx::CyclicCubicBasis;

namespace {

std::vector<double> wavy(std::size_t n) {
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = 2.0 + std::sin(0.9 * k) + 0.3 * std::cos(2.3 * k);
  return c;
}

}  // namespace

TEST(CyclicSpline, UniformKnots) {
  const auto b = CyclicCubicBasis::uniform(10, 1.0, 365.0);
  ASSERT_EQ(b.size(), 10u);
  EXPECT_DOUBLE_EQ(b.knots().front(), 1.0);
  EXPECT_DOUBLE_EQ(b.knots()[1], 37.5);
  EXPECT_DOUBLE_EQ(b.period(), 365.0);
}

TEST(CyclicSpline, InterpolatesKnotValues) {
  const auto b = CyclicCubicBasis::uniform(10, 1.0, 365.0);
  const auto c = wavy(10);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_NEAR(b.evaluate(c, b.knots()[k]), c[k], 1e-12);
}

TEST(CyclicSpline, ReproducesConstants) {
  const auto b = CyclicCubicBasis::uniform(7, 1.0, 365.0);
  const std::vector<double> c(7, 3.5);
  for (double x = 1.0; x < 366.0; x += 0.37) {
    EXPECT_NEAR(b.evaluate(c, x), 3.5, 1e-12);
    EXPECT_NEAR(b.evaluate(c, x, 1), 0.0, 1e-12);
    EXPECT_NEAR(b.evaluate(c, x, 2), 0.0, 1e-12);
  }
}

TEST(CyclicSpline, BasisRowSumsToOne) {
  const auto b = CyclicCubicBasis::uniform(10, 1.0, 365.0);
  std::vector<double> row(10);
  for (double x = 1.0; x < 366.0; x += 1.3) {
    b.basis_row(x, row);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(CyclicSpline, BasisRowMatchesEvaluate) {
  const auto b = CyclicCubicBasis::uniform(10, 1.0, 365.0);
  const auto c = wavy(10);
  std::vector<double> row(10);
  for (double x = 1.0; x < 366.0; x += 2.9) {
    b.basis_row(x, row);
    EXPECT_NEAR(std::inner_product(row.begin(), row.end(), c.begin(), 0.0), b.evaluate(c, x), 1e-12);
  }
}

TEST(CyclicSpline, PeriodicExactly) {
  const auto b = CyclicCubicBasis::uniform(10, 1.0, 365.0);
  const auto c = wavy(10);
  for (int d = 1; d <= 365; ++d) {
    EXPECT_EQ(b.evaluate(c, d), b.evaluate(c, d + 365.0));
    EXPECT_EQ(b.evaluate(c, d), b.evaluate(c, d - 365.0));
  }
}

TEST(CyclicSpline, SmoothAcrossTheWrap) {
  const auto b = CyclicCubicBasis::uniform(10, 1.0, 365.0);
  const auto c = wavy(10);
  for (int order = 0; order <= 2; ++order) {
    const double at_wrap = b.evaluate(c, 1.0, order);
    double previous = 1e300;
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
      const double gap = std::abs(b.evaluate(c, 366.0 - eps, order) - at_wrap);
      EXPECT_LE(gap, previous + 1e-12) << "order " << order;
      previous = gap;
    }
    EXPECT_LT(previous, 1e-6) << "order " << order;
  }
}

TEST(CyclicSpline, SmoothAtInteriorKnotsOnDenseGrid) {
  const auto b = CyclicCubicBasis::uniform(10, 1.0, 365.0);
  const auto c = wavy(10);
  for (double k : b.knots()) {
    for (int order = 0; order <= 2; ++order) {
      const double left = b.evaluate(c, k - 1e-9, order), right = b.evaluate(c, k + 1e-9, order);
      EXPECT_NEAR(left, right, 1e-6) << "knot " << k << " order " << order;
    }
  }
}

TEST(CyclicSpline, DerivativeMatchesFiniteDifference) {
  const auto b = CyclicCubicBasis::uniform(10, 1.0, 365.0);
  const auto c = wavy(10);
  for (double x = 3.3; x < 365.0; x += 17.1) {
    const double h = 1e-4;
    EXPECT_NEAR(b.evaluate(c, x, 1), (b.evaluate(c, x + h) - b.evaluate(c, x - h)) / (2 * h), 1e-6);
    EXPECT_NEAR(b.evaluate(c, x, 2), (b.evaluate(c, x + h, 1) - b.evaluate(c, x - h, 1)) / (2 * h),
                1e-5);
  }
}

TEST(CyclicSpline, RejectsBadKnots) {
  EXPECT_THROW(CyclicCubicBasis({1.0, 2.0}, 365.0), potx::PreconditionError);
  EXPECT_THROW(CyclicCubicBasis({1.0, 3.0, 2.0}, 365.0), potx::PreconditionError);
  EXPECT_THROW(CyclicCubicBasis({1.0, 100.0, 400.0}, 365.0), potx::PreconditionError);
}
