#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "potx/potmodel.hpp"
#include "potx/reduce.hpp"

namespace potx {

struct EstimateConfig {
  int replications = 1000;
  int total_runs = 50;
  int given_runs = 4;
  int years = 165;
  double confidence = 0.92;
  std::uint64_t seed = 0;
  // When set, the model must have been fitted at exactly this level.
  std::optional<double> expected_level;

  void validate() const;

  // ceil((1 - p) * unseen runs * years * 365)
  std::size_t samples_per_replication(double level) const;
};

struct PoissonInterval {
  long lo = 0;
  long hi = 0;
  double coverage = 1.0;
};

// Shortest integer interval [lo, hi] with Poisson(lambda) mass >= confidence.
// Ties go to the larger mass, then the smaller lo. hi is searched up to
// lambda + 10 sqrt(lambda + 1) + 10.
PoissonInterval poisson_interval(double lambda, double confidence);

// Divides counts by total_runs.
std::pair<double, double> interval_to_frequency(long lo_count, long hi_count,
                                                int total_runs = 50);

struct FrequencyEstimate {
  double point = 0.0;               // lower median count / total_runs
  std::vector<long> counts;         // per replication, observed add-on included
  double lambda = 0.0;              // mean of counts
  PoissonInterval interval;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double achieved_coverage = 0.0;
  std::size_t samples_per_replication = 0;
  int total_runs = 50;
};

// Each replication draws samples_per_replication values from the model and
// counts those >= spec.event_threshold, then adds observed_count.
FrequencyEstimate estimate_frequency(const PotModel& model, const TargetSpec& spec,
                                     long observed_count, const EstimateConfig& cfg);

struct PoissonHistogramRow {
  long count = 0;
  double poisson_prob = 0.0;
  double empirical_freq = 0.0;
};

// Poisson(lambda) pmf next to the empirical distribution of the counts.
std::vector<PoissonHistogramRow> poisson_histogram(const FrequencyEstimate& estimate);

}  // namespace potx
