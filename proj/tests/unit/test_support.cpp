#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "potx/csv.hpp"
#include "potx/parallel.hpp"
#include "potx/rng.hpp"
#include "potx/stats.hpp"

using namespace potx;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs = differs || x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformRangeAndMoments) {
  Rng rng(1);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum_sq / n, 1.0 / 3.0, 0.002);
}

TEST(Rng, ExponentialMeanAndTail) {
  Rng rng(2);
  const int n = 1'000'000;
  double sum = 0.0;
  int tail = 0;
  for (int i = 0; i < n; ++i) {
    const double e = rng.exponential();
    ASSERT_GE(e, 0.0);
    sum += e;
    tail += e > 3.0;
  }
  EXPECT_NEAR(sum / n, 1.0, 5.0 / std::sqrt(n));
  const double p = std::exp(-3.0);
  EXPECT_NEAR(static_cast<double>(tail) / n, p, 5.0 * std::sqrt(p / n));
}

TEST(Rng, BelowIsUniform) {
  Rng rng(3);
  std::vector<int> count(7, 0);
  const int n = 700'000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    ++count[k];
  }
  for (int c : count) EXPECT_NEAR(c, n / 7.0, 5.0 * std::sqrt(n / 7.0));
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(Rng, DerivedSeedsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed_for_level(5, 0.999), derive_seed_for_level(5, 0.9995));
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Csv, ShortestRoundTrip) {
  EXPECT_EQ(csv::format_double(0.1), "0.1");
  EXPECT_EQ(csv::format_double(2.0), "2");
  EXPECT_EQ(csv::format_double(-0.25), "-0.25");
  Rng rng(4);
  for (int i = 0; i < 100000; ++i) {
    const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.below(80)) - 40);
    double back = 0.0;
    ASSERT_TRUE(csv::parse_double(csv::format_double(v), back));
    ASSERT_EQ(back, v);
  }
}

TEST(Csv, StrictParsing) {
  double d = 0.0;
  long long i = 0;
  EXPECT_TRUE(csv::parse_double("1e-3", d));
  EXPECT_EQ(d, 1e-3);
  EXPECT_FALSE(csv::parse_double("1.5x", d));
  EXPECT_FALSE(csv::parse_double("", d));
  EXPECT_TRUE(csv::parse_int("-12", i));
  EXPECT_EQ(i, -12);
  EXPECT_FALSE(csv::parse_int("3.0", i));
  const auto f = csv::split("a,,b");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[1], "");
  EXPECT_EQ(csv::provenance_line(7, 255), "# seed=7 config_hash=00000000000000ff");
}

TEST(Stats, KolmogorovSmirnov) {
  const std::vector<double> point{0.5, 0.5, 0.5};
  EXPECT_NEAR(stats::ks_distance(point, [](double x) { return x; }), 0.5, 1e-15);
  std::vector<double> grid;
  for (int k = 0; k < 1000; ++k) grid.push_back((k + 0.5) / 1000.0);
  EXPECT_NEAR(stats::ks_distance(grid, [](double x) { return x; }), 0.0005, 1e-12);
  EXPECT_NEAR(stats::ks_p_value(1.36 / std::sqrt(10000.0), 10000), 0.05, 0.002);
  EXPECT_NEAR(stats::ks_p_value(1.63 / std::sqrt(10000.0), 10000), 0.01, 0.001);
}

TEST(Stats, MeanAndStddev) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_EQ(stats::mean(x), 2.5);
  EXPECT_NEAR(stats::stddev(x), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(stats::stddev(std::vector<double>{3.0}), 0.0);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_GE(thread_count(), 1u);
}

TEST(Parallel, RethrowsItemException) {
  EXPECT_THROW(parallel_for(50, [](std::size_t i) {
                 if (i == 17) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Parallel, ThreadCapFromEnvironment) {
  ::setenv("POTX_THREADS", "3", 1);
  EXPECT_EQ(thread_count(), 3u);
  ::setenv("POTX_THREADS", "0", 1);
  EXPECT_GE(thread_count(), 1u);
  ::unsetenv("POTX_THREADS");
}
