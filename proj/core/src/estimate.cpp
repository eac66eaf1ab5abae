#include "potx/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <tuple>

#include "potx/error.hpp"
#include "potx/parallel.hpp"
#include "potx/rng.hpp"

namespace potx {
namespace {

double poisson_pmf(double lambda, long j) {
  if (lambda == 0.0) return j == 0 ? 1.0 : 0.0;
  const double jd = static_cast<double>(j);
  return std::exp(-lambda + jd * std::log(lambda) - std::lgamma(jd + 1.0));
}

}  // namespace

void EstimateConfig::validate() const {
  if (replications < 100) throw PreconditionError("estimate: N must be >= 100");
  if (!(confidence > 0.5 && confidence < 1.0)) {
    throw PreconditionError("estimate: confidence must be in (0.5, 1)");
  }
  if (total_runs < 1 || given_runs < 0 || given_runs >= total_runs) {
    throw PreconditionError("estimate: need 0 <= given_runs < total_runs");
  }
  if (years < 1) throw PreconditionError("estimate: years must be >= 1");
}

std::size_t EstimateConfig::samples_per_replication(double level) const {
  const double unseen_days = static_cast<double>(total_runs - given_runs) *
                             static_cast<double>(years) * kDaysPerYear;
  return static_cast<std::size_t>(std::ceil((1.0 - level) * unseen_days - 1e-7));
}

PoissonInterval poisson_interval(double lambda, double confidence) {
  if (!std::isfinite(lambda)) throw PreconditionError("poisson_interval: lambda not finite");
  if (lambda < 0.0) throw PreconditionError("poisson_interval: lambda must be >= 0");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw PreconditionError("poisson_interval: confidence must be in (0, 1)");
  }
  const auto bound = static_cast<long>(std::floor(lambda + 10.0 * std::sqrt(lambda + 1.0) + 10.0));
  std::vector<long double> prefix(static_cast<std::size_t>(bound) + 2, 0.0L);
  for (long j = 0; j <= bound; ++j) {
    prefix[static_cast<std::size_t>(j) + 1] =
        prefix[static_cast<std::size_t>(j)] + poisson_pmf(lambda, j);
  }
  const auto mass = [&](long a, long b) {
    return static_cast<double>(prefix[static_cast<std::size_t>(b) + 1] -
                               prefix[static_cast<std::size_t>(a)]);
  };
  for (long length = 0; length <= bound; ++length) {
    std::optional<PoissonInterval> best;
    for (long a = 0; a + length <= bound; ++a) {
      const double m = mass(a, a + length);
      if (m >= confidence && (!best || m > best->coverage)) {
        best = PoissonInterval{a, a + length, m};
      }
    }
    if (best) return *best;
  }
  throw Error("poisson_interval: no interval within the search bound");
}

std::pair<double, double> interval_to_frequency(long lo_count, long hi_count,
                                                int total_runs) {
  if (lo_count > hi_count) throw PreconditionError("interval_to_frequency: lo > hi");
  if (total_runs < 1) throw PreconditionError("interval_to_frequency: total_runs < 1");
  const double runs = static_cast<double>(total_runs);
  return {static_cast<double>(lo_count) / runs, static_cast<double>(hi_count) / runs};
}

FrequencyEstimate estimate_frequency(const PotModel& model, const TargetSpec& spec,
                                     long observed_count, const EstimateConfig& cfg) {
  cfg.validate();
  model.validate();
  if (model.target != spec.id) {
    throw ConsistencyError("estimate: model is for " + std::string(to_string(model.target)) +
                           " but the target is " + std::string(to_string(spec.id)));
  }
  if (cfg.expected_level && std::abs(*cfg.expected_level - model.level) > 1e-12) {
    throw ConsistencyError("estimate: model fitted at p = " + std::to_string(model.level) +
                           ", expected p = " + std::to_string(*cfg.expected_level));
  }
  if (observed_count < 0) throw PreconditionError("estimate: observed_count < 0");

  FrequencyEstimate out;
  out.total_runs = cfg.total_runs;
  out.samples_per_replication = cfg.samples_per_replication(model.level);
  out.counts.assign(static_cast<std::size_t>(cfg.replications), 0);

  const ThresholdCounter exceeds(model, spec.event_threshold);
  const std::size_t m = out.samples_per_replication;
  parallel_for(out.counts.size(), [&](std::size_t r) {
    Rng rng(derive_seed(cfg.seed, r));
    long hits = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (exceeds(rng)) ++hits;
    }
    out.counts[r] = hits + observed_count;
  });

  std::vector<long> sorted = out.counts;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  out.point = static_cast<double>(*mid) / cfg.total_runs;

  long double total = 0.0L;
  for (long c : out.counts) total += c;
  out.lambda = static_cast<double>(total / out.counts.size());
  out.interval = poisson_interval(out.lambda, cfg.confidence);
  std::tie(out.ci_lo, out.ci_hi) =
      interval_to_frequency(out.interval.lo, out.interval.hi, cfg.total_runs);
  out.achieved_coverage = out.interval.coverage;
  return out;
}

std::vector<PoissonHistogramRow> poisson_histogram(const FrequencyEstimate& estimate) {
  std::map<long, std::size_t> tally;
  for (long c : estimate.counts) ++tally[c];
  long top = static_cast<long>(
      std::ceil(estimate.lambda + 5.0 * std::sqrt(estimate.lambda + 1.0) + 5.0));
  if (!tally.empty()) top = std::max(top, tally.rbegin()->first);
  top = std::max(top, estimate.interval.hi);
  std::vector<PoissonHistogramRow> rows;
  rows.reserve(static_cast<std::size_t>(top) + 1);
  const double n = static_cast<double>(estimate.counts.size());
  for (long c = 0; c <= top; ++c) {
    const auto it = tally.find(c);
    rows.push_back({c, poisson_pmf(estimate.lambda, c),
                    it == tally.end() ? 0.0 : static_cast<double>(it->second) / n});
  }
  return rows;
}

}  // namespace potx
