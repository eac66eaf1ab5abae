#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "potx/reduce.hpp"
#include "potx/rng.hpp"
#include "potx/spline.hpp"

namespace potx {

// ceil(n * p)-th smallest value of y.
double empirical_quantile(std::span<const double> y, double p);

struct Exceedance {
  std::size_t position = 0;  // row in the UnivariateTarget arrays
  int day = 0;
  double excess = 0.0;       // value - threshold, > 0
};

struct ExceedanceSet {
  double level = 0.0;
  double threshold = 0.0;
  bool on_aux = false;       // exceedances of aux_norm rather than y
  std::vector<Exceedance> records;
};

// Ybar > u is implied by Y >= T3 only while u < sqrt(2) * T3 = sqrt(50).
inline const double kAuxLevelLimit = std::sqrt(50.0);

// Strict exceedances of y (or aux_norm when use_aux) above the empirical
// p-quantile. With use_aux the quantile must stay below aux_limit.
ExceedanceSet extract_exceedances(const UnivariateTarget& target, double p,
                                  bool use_aux, double aux_limit = kAuxLevelLimit);

// Seasonal scale f(d): cyclic cubic spline clamped below at `floor`.
class CyclicScale {
 public:
  CyclicScale() = default;
  CyclicScale(CyclicCubicBasis basis, std::vector<double> coefficients, double floor);

  double operator()(double day) const {
    return std::max(basis_.evaluate(coefficients_, day), floor_);
  }
  // Unclamped spline value or derivative.
  double raw(double day, int derivative_order = 0) const {
    return basis_.evaluate(coefficients_, day, derivative_order);
  }

  std::size_t n_basis() const noexcept { return coefficients_.size(); }
  const CyclicCubicBasis& basis() const noexcept { return basis_; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  double floor() const noexcept { return floor_; }

 private:
  CyclicCubicBasis basis_;
  std::vector<double> coefficients_;
  double floor_ = 0.0;
};

inline constexpr std::size_t kDefaultBasisSize = 10;

// Least squares of excess on a cyclic cubic basis of day_of_year with
// n_basis evenly spaced knots on [1, 366). The fit is floored at
// 1e-6 * mean(excess) and rescaled so the adjusted exceedances average 1.
CyclicScale fit_seasonal_scale(const ExceedanceSet& exceedances,
                               std::size_t n_basis = kDefaultBasisSize);

struct AdjustedExceedances {
  std::vector<double> values;  // excess / f(day)
};

AdjustedExceedances adjust(const ExceedanceSet& exceedances, const CyclicScale& scale);

struct QQReport {
  // (theoretical exponential quantile scaled to the sample mean, k-th smallest)
  std::vector<std::pair<double, double>> points;
  double max_deviation = 0.0;
  double bulk_max_deviation = 0.0;  // over k <= 0.99 n
};

QQReport qq_exponential(const AdjustedExceedances& adjusted);

enum class ModelKind { Direct, Angular };

// Generative exceedance model:
//   D ~ uniform on day_pool, E ~ Exp(1)
//   Direct:  Y = q + f(D) E
//   Angular: Y = (q + f(D) E) min(sin T, cos T), T ~ U[0, pi/2]
struct PotModel {
  TargetId target = TargetId::T1;
  double level = 0.0;
  double threshold = 0.0;
  CyclicScale scale;
  std::vector<int> day_pool;
  ModelKind kind = ModelKind::Direct;
  double shape = 0.0;  // GPD shape, fixed at zero

  void validate() const;
};

struct FitOptions {
  std::size_t n_basis = kDefaultBasisSize;
  // sqrt(2) * event threshold for Angular models.
  double aux_limit = kAuxLevelLimit;
};

struct PotFit {
  PotModel model;
  ExceedanceSet exceedances;
  AdjustedExceedances adjusted;
};

// Full fit at level p. Targets carrying an auxiliary norm get an Angular
// model fitted on the norm.
PotFit fit_pot_model(const UnivariateTarget& target, double p,
                     const FitOptions& options = {});

// Observed target values at the exceedance times (y itself, also for
// exceedances of the auxiliary norm).
std::vector<double> exceedance_observations(const UnivariateTarget& target,
                                            const ExceedanceSet& exceedances);

// Draws from a PotModel. Precomputes f over the day pool; immutable after
// construction, so one sampler may be shared by threads each owning an Rng.
class ModelSampler {
 public:
  explicit ModelSampler(const PotModel& model);

  double operator()(Rng& rng) const;

 private:
  double threshold_;
  ModelKind kind_;
  std::vector<double> pool_scale_;
};

// Decides `sampler(rng) >= threshold` from the same random words without
// forming the draw: for Direct models E >= c is u >= 1 - exp(-c).
class ThresholdCounter {
 public:
  ThresholdCounter(const PotModel& model, double threshold);

  bool operator()(Rng& rng) const;

 private:
  ModelSampler sampler_;
  double threshold_;
  bool direct_;
  std::vector<double> uniform_cut_;  // per pool entry, Direct only
};

std::vector<double> sample_model(const PotModel& model, std::size_t n,
                                 std::uint64_t seed);

// JSON: {target_id, p, q, n_basis, knots[], period, coefficients[], floor,
//        day_pool[], kind, shape}
std::string model_to_json(const PotModel& model);
PotModel model_from_json(const std::string& text);

}  // namespace potx
