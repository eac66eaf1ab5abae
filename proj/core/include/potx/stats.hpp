#pragma once

#include <functional>
#include <span>

namespace potx::stats {

// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_distance(std::span<const double> sample,
                   const std::function<double(double)>& cdf);

// Asymptotic Kolmogorov survival function with the Stephens small-sample
// correction: P(D_n > d) for a sample of size n.
double ks_p_value(double distance, std::size_t n);

double mean(std::span<const double> x);

// Unbiased sample standard deviation; 0 for fewer than two values.
double stddev(std::span<const double> x);

}  // namespace potx::stats
