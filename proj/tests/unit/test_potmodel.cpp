#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "potx/error.hpp"
#include "potx/potmodel.hpp"
#include "potx/rng.hpp"
#include "potx/stats.hpp"

using namespace potx;
using potx::testing::make_target;

namespace {

CyclicScale constant_scale(double c) {
  return CyclicScale(CyclicCubicBasis::uniform(kDefaultBasisSize, 1.0, 365.0),
                     std::vector<double>(kDefaultBasisSize, c), 1e-6);
}

PotModel unit_model(ModelKind kind, double q = 0.0) {
  PotModel m;
  m.target = kind == ModelKind::Angular ? TargetId::T3 : TargetId::T1;
  m.level = 0.99;
  m.threshold = q;
  m.scale = constant_scale(1.0);
  m.kind = kind;
  for (int d = 1; d <= 365; ++d) m.day_pool.push_back(d);
  return m;
}

// Seasonal scale inside the spline span: knot values of a smooth cycle.
std::vector<double> truth_coefficients() {
  std::vector<double> c(kDefaultBasisSize);
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] = 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * k / c.size());
  }
  return c;
}

ExceedanceSet seasonal_exceedances(std::size_t n, std::uint64_t seed, const CyclicScale& g) {
  Rng rng(seed);
  ExceedanceSet set;
  set.level = 0.99;
  for (std::size_t i = 0; i < n; ++i) {
    const int day = static_cast<int>(rng.below(365)) + 1;
    set.records.push_back({i, day, g(day) * rng.exponential()});
  }
  return set;
}

}  // namespace

TEST(Quantile, OrderStatisticConvention) {
  std::vector<double> y(100);
  std::iota(y.begin(), y.end(), 1.0);
  std::shuffle(y.begin(), y.end(), std::mt19937(1));
  EXPECT_EQ(empirical_quantile(y, 0.99), 99.0);
  EXPECT_EQ(empirical_quantile(y, 0.5), 50.0);
  EXPECT_EQ(empirical_quantile(y, 0.001), 1.0);
  EXPECT_EQ(empirical_quantile(y, 0.999), 100.0);
}

TEST(Quantile, ConstantSample) {
  const std::vector<double> y(37, 4.25);
  for (double p : {0.01, 0.5, 0.9999}) EXPECT_EQ(empirical_quantile(y, p), 4.25);
}

TEST(Quantile, ExponentialTail) {
  Rng rng(7);
  std::vector<double> y(100000);
  for (auto& v : y) v = rng.exponential();
  EXPECT_NEAR(empirical_quantile(y, 0.999), -std::log(0.001), 0.2);
}

TEST(Quantile, Errors) {
  EXPECT_THROW(empirical_quantile(std::vector<double>{}, 0.5), InsufficientDataError);
  EXPECT_THROW(empirical_quantile(std::vector<double>{1.0}, 1.0), PreconditionError);
  EXPECT_THROW(empirical_quantile(std::vector<double>{1.0}, 0.0), PreconditionError);
}

TEST(Quantile, MonotoneInLevel) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> y(1 + rng.below(500));
    for (auto& v : y) v = std::floor(rng.exponential() * 4);  // ties included
    double previous = -1e300;
    for (double p = 0.001; p < 1.0; p += 0.0137) {
      const double q = empirical_quantile(y, p);
      ASSERT_GE(q, previous);
      previous = q;
    }
  }
}

TEST(Exceedances, CountAtHighLevel) {
  Rng rng(5);
  std::vector<double> y(240900);
  for (auto& v : y) v = rng.exponential();
  const auto set = extract_exceedances(make_target(y), 0.999, false);
  // Continuous data: n - ceil(n p) strict exceedances.
  EXPECT_EQ(set.records.size(), 240u);
  for (const auto& r : set.records) {
    EXPECT_GT(r.excess, 0.0);
    EXPECT_EQ(r.excess, y[r.position] - set.threshold);
    EXPECT_EQ(r.day, static_cast<int>(r.position % 365) + 1);
  }
}

TEST(Exceedances, HalfOfSymmetricData) {
  std::vector<double> y;
  for (int i = -500; i < 500; ++i) y.push_back(i + 0.5);
  const auto set = extract_exceedances(make_target(y), 0.5, false);
  EXPECT_EQ(set.records.size(), 500u);
}

TEST(Exceedances, StrictInequalityWithTies) {
  const std::vector<double> y{1, 2, 2, 2, 3};
  const auto set = extract_exceedances(make_target(y), 0.5, false);
  EXPECT_EQ(set.threshold, 2.0);
  EXPECT_EQ(set.records.size(), 1u);
}

TEST(Exceedances, AuxLevelAboveLimitIsTooHigh) {
  UnivariateTarget t = make_target(std::vector<double>(100, 0.0));
  t.id = TargetId::T3;
  for (int k = 1; k <= 100; ++k) {
    const double norm = 0.08 * k;
    t.aux_norm.push_back(norm);
    t.aux_pair.push_back({norm / std::sqrt(2.0), norm / std::sqrt(2.0)});
    t.y[k - 1] = norm / std::sqrt(2.0);
  }
  EXPECT_NEAR(empirical_quantile(t.aux_norm, 0.9), 7.2, 1e-12);
  EXPECT_THROW(extract_exceedances(t, 0.9, true), LevelTooHighError);
  EXPECT_NO_THROW(extract_exceedances(t, 0.8, true));
  EXPECT_THROW(extract_exceedances(make_target({1, 2, 3}), 0.5, true), PreconditionError);
}

TEST(SeasonalScale, ConstantExcessGivesConstantScale) {
  ExceedanceSet set;
  for (std::size_t i = 0; i < 50; ++i) set.records.push_back({i, static_cast<int>(7 * i % 365) + 1, 2.5});
  const CyclicScale f = fit_seasonal_scale(set);
  for (int d = 1; d <= 365; ++d) EXPECT_NEAR(f(d), 2.5, 1e-9);
  EXPECT_DOUBLE_EQ(f.floor(), 2.5e-6);
}

TEST(SeasonalScale, RecoversScaleInSpan) {
  const CyclicScale g(CyclicCubicBasis::uniform(kDefaultBasisSize, 1.0, 365.0), truth_coefficients(),
                      1e-9);
  const CyclicScale f = fit_seasonal_scale(seasonal_exceedances(10000, 11, g));
  double worst = 0.0;
  for (double d = 1.0; d <= 365.0; d += 0.25) worst = std::max(worst, std::abs(f(d) - g(d)) / g(d));
  EXPECT_LT(worst, 0.10);
}

TEST(SeasonalScale, PeriodicAndFloored) {
  const CyclicScale g(CyclicCubicBasis::uniform(kDefaultBasisSize, 1.0, 365.0), truth_coefficients(),
                      1e-9);
  const CyclicScale f = fit_seasonal_scale(seasonal_exceedances(400, 12, g));
  for (int d = 1; d <= 365; ++d) {
    EXPECT_EQ(f(d), f(d + 365));
    EXPECT_GE(f(d), f.floor());
  }
}

TEST(SeasonalScale, ScaleEquivariance) {
  const CyclicScale g(CyclicCubicBasis::uniform(kDefaultBasisSize, 1.0, 365.0), truth_coefficients(),
                      1e-9);
  const ExceedanceSet base = seasonal_exceedances(2000, 13, g);
  ExceedanceSet scaled = base;
  const double c = 3.7;
  for (auto& r : scaled.records) r.excess *= c;
  const CyclicScale f = fit_seasonal_scale(base), fc = fit_seasonal_scale(scaled);
  for (double d = 1.0; d <= 365.0; d += 3.0) EXPECT_NEAR(fc(d), c * f(d), 1e-9 * c * f(d));
  const auto a = adjust(base, f), b = adjust(scaled, fc);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-9);
}

TEST(SeasonalScale, Errors) {
  ExceedanceSet set;
  for (std::size_t i = 0; i < 19; ++i) set.records.push_back({i, static_cast<int>(i) + 1, 1.0});
  EXPECT_THROW(fit_seasonal_scale(set), InsufficientDataError);
  EXPECT_THROW(fit_seasonal_scale(set, 3), PreconditionError);

  ExceedanceSet one_day;
  for (std::size_t i = 0; i < 40; ++i) one_day.records.push_back({i, 100, 1.0 + i});
  EXPECT_THROW(fit_seasonal_scale(one_day), RankDeficiencyError);
}

TEST(Adjust, IdentityAndExactScale) {
  const ExceedanceSet set = seasonal_exceedances(100, 14, constant_scale(1.0));
  const auto same = adjust(set, constant_scale(1.0));
  for (std::size_t i = 0; i < set.records.size(); ++i) EXPECT_DOUBLE_EQ(same.values[i], set.records[i].excess);

  const CyclicScale g(CyclicCubicBasis::uniform(kDefaultBasisSize, 1.0, 365.0), truth_coefficients(),
                      1e-9);
  ExceedanceSet exact = set;
  for (auto& r : exact.records) r.excess = g(r.day);
  for (double v : adjust(exact, g).values) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(Adjust, MeanNearOneOnSeasonalData) {
  const CyclicScale g(CyclicCubicBasis::uniform(kDefaultBasisSize, 1.0, 365.0), truth_coefficients(),
                      1e-9);
  const ExceedanceSet set = seasonal_exceedances(5000, 15, g);
  const auto adj = adjust(set, fit_seasonal_scale(set));
  for (double v : adj.values) EXPECT_GT(v, 0.0);
  EXPECT_NEAR(stats::mean(adj.values), 1.0, 3.0 / std::sqrt(5000.0));
}

TEST(QQ, SelfConsistentQuantiles) {
  AdjustedExceedances adj;
  const std::size_t n = 10000;
  for (std::size_t k = 1; k <= n; ++k) adj.values.push_back(-std::log(1.0 - (k - 0.5) / n));
  const auto qq = qq_exponential(adj);
  ASSERT_EQ(qq.points.size(), n);
  // Only the sample-mean rescaling separates the points from the diagonal.
  const double m = stats::mean(adj.values);
  EXPECT_LT(qq.max_deviation, qq.points.back().second * std::abs(1.0 - m) + 1e-12);
  EXPECT_LT(qq.max_deviation, 0.01);
}

TEST(QQ, ExponentialBulkDeviationSmall) {
  Rng rng(16);
  AdjustedExceedances adj;
  for (int i = 0; i < 10000; ++i) adj.values.push_back(rng.exponential());
  EXPECT_LT(qq_exponential(adj).bulk_max_deviation, 0.15);
}

TEST(QQ, ParetoTailDeviates) {
  Rng rng(17);
  AdjustedExceedances adj;
  for (int i = 0; i < 10000; ++i) adj.values.push_back(std::pow(1.0 - rng.uniform(), -0.5) - 1.0);
  const auto qq = qq_exponential(adj);
  EXPECT_GT(qq.max_deviation, 1.0);
  EXPECT_GT(qq.points.back().second, qq.points.back().first);
}

TEST(QQ, NeedsTwentyValues) {
  AdjustedExceedances adj;
  adj.values.assign(19, 1.0);
  EXPECT_THROW(qq_exponential(adj), InsufficientDataError);
}

TEST(Sampling, DirectMeanIsOne) {
  const auto x = sample_model(unit_model(ModelKind::Direct), 1'000'000, 1);
  EXPECT_NEAR(stats::mean(x), 1.0, 0.003);
  for (double v : x) ASSERT_GT(v, 0.0);
}

TEST(Sampling, AngularMeanMatchesQuadrature) {
  // Composite Simpson of min(sin, cos) over [0, pi/2], divided by pi/2.
  const int steps = 20000;
  const double h = (std::numbers::pi / 2) / steps;
  double integral = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = i * h;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    integral += w * std::min(std::sin(t), std::cos(t));
  }
  const double quadrature = integral * h / 3.0 / (std::numbers::pi / 2);
  EXPECT_NEAR(quadrature, (4.0 - 2.0 * std::sqrt(2.0)) / std::numbers::pi, 1e-9);

  const auto x = sample_model(unit_model(ModelKind::Angular), 1'000'000, 2);
  const double se = stats::stddev(x) / 1000.0;
  EXPECT_NEAR(stats::mean(x), quadrature, 3.0 * se);
}

TEST(Sampling, Bounds) {
  PotModel m = unit_model(ModelKind::Direct, 2.0);
  m.scale = CyclicScale(CyclicCubicBasis::uniform(kDefaultBasisSize, 1.0, 365.0), truth_coefficients(),
                        1e-6);
  for (double v : sample_model(m, 100000, 3)) ASSERT_GT(v, 2.0);
  m.kind = ModelKind::Angular;
  m.target = TargetId::T3;
  for (double v : sample_model(m, 100000, 3)) ASSERT_GE(v, 0.0);
}

TEST(Sampling, Deterministic) {
  const auto m = unit_model(ModelKind::Angular);
  EXPECT_EQ(sample_model(m, 1000, 9), sample_model(m, 1000, 9));
  EXPECT_NE(sample_model(m, 1000, 9), sample_model(m, 1000, 10));
}

TEST(Sampling, Errors) {
  PotModel m = unit_model(ModelKind::Direct);
  EXPECT_THROW(sample_model(m, 0, 1), PreconditionError);
  m.day_pool.clear();
  EXPECT_THROW(sample_model(m, 10, 1), PreconditionError);
  m = unit_model(ModelKind::Angular);
  m.target = TargetId::T1;
  EXPECT_THROW(sample_model(m, 10, 1), ConsistencyError);
}

TEST(Sampling, UsesDayPoolNotCalendar) {
  PotModel m = unit_model(ModelKind::Direct);
  std::vector<double> knots(kDefaultBasisSize, 0.1);
  knots[5] = 10.0;  // large scale near day 183 only
  m.scale = CyclicScale(CyclicCubicBasis::uniform(kDefaultBasisSize, 1.0, 365.0), knots, 1e-6);
  m.day_pool.assign(10, 183);
  const double f183 = m.scale(183);
  const auto x = sample_model(m, 200000, 5);
  EXPECT_NEAR(stats::mean(x), f183, 0.02 * f183);
}

TEST(Sampling, ThresholdCounterAgreesWithSampler) {
  for (ModelKind kind : {ModelKind::Direct, ModelKind::Angular}) {
    PotModel m = unit_model(kind, 1.0);
    m.scale = CyclicScale(CyclicCubicBasis::uniform(kDefaultBasisSize, 1.0, 365.0), truth_coefficients(),
                          1e-6);
    const ModelSampler sampler(m);
    const ThresholdCounter counter(m, 3.0);
    Rng a(21), b(21);
    std::size_t via_sampler = 0, via_counter = 0;
    for (int i = 0; i < 200000; ++i) {
      via_sampler += sampler(a) >= 3.0;
      via_counter += counter(b);
    }
    EXPECT_EQ(via_sampler, via_counter);
    EXPECT_GT(via_counter, 0u);
  }
}

TEST(Fit, DayPoolIsExceedanceMultiset) {
  Rng rng(30);
  std::vector<double> y(20000);
  for (auto& v : y) v = rng.exponential();
  const PotFit fit = fit_pot_model(make_target(y), 0.99);
  std::map<int, int> pool, days;
  for (int d : fit.model.day_pool) ++pool[d];
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > fit.model.threshold) ++days[static_cast<int>(i % 365) + 1];
  }
  EXPECT_EQ(pool, days);
  EXPECT_EQ(fit.model.kind, ModelKind::Direct);
  EXPECT_EQ(fit.model.shape, 0.0);
  EXPECT_EQ(exceedance_observations(make_target(y), fit.exceedances).size(), fit.model.day_pool.size());
}

TEST(Fit, AuxTargetGivesAngularModel) {
  Rng rng(31);
  UnivariateTarget t;
  t.id = TargetId::T3;
  for (std::size_t i = 0; i < 20000; ++i) {
    const double a = rng.exponential(), b = rng.exponential();
    t.y.push_back(std::min(a, b));
    t.aux_pair.push_back({a, b});
    t.aux_norm.push_back(std::sqrt(a * a + b * b));
    t.day_of_year.push_back(static_cast<int>(i % 365) + 1);
    t.index.push_back(i + 1);
  }
  const PotFit fit = fit_pot_model(t, 0.99);
  EXPECT_EQ(fit.model.kind, ModelKind::Angular);
  EXPECT_TRUE(fit.exceedances.on_aux);
  EXPECT_EQ(fit.model.threshold, empirical_quantile(t.aux_norm, 0.99));
}

TEST(ModelJson, RoundTripFullPrecision) {
  Rng rng(32);
  std::vector<double> y(30000);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = (1.0 + 0.5 * std::sin(i * 0.0172)) * rng.exponential();
  }
  const PotModel m = fit_pot_model(make_target(y), 0.99).model;
  const PotModel back = model_from_json(model_to_json(m));
  EXPECT_EQ(back.target, m.target);
  EXPECT_EQ(back.level, m.level);
  EXPECT_EQ(back.threshold, m.threshold);
  EXPECT_EQ(back.day_pool, m.day_pool);
  EXPECT_EQ(back.kind, m.kind);
  EXPECT_EQ(back.scale.floor(), m.scale.floor());
  for (double d = 1.0; d <= 365.0; d += 0.125) ASSERT_EQ(back.scale(d), m.scale(d));
  EXPECT_EQ(model_to_json(back), model_to_json(m));
  EXPECT_THROW(model_from_json("{not json"), ParseError);
  EXPECT_THROW(model_from_json("{}"), ParseError);
}
