#include "potx/potmodel.hpp"

#include <algorithm>
#include <numbers>

#include <json.hpp>

#include "potx/error.hpp"

namespace potx {
namespace {

void check_level(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw PreconditionError("probability level must lie in (0, 1), got " +
                            std::to_string(p));
  }
}

ModelKind kind_from_string(const std::string& text) {
  if (text == "Direct") return ModelKind::Direct;
  if (text == "Angular") return ModelKind::Angular;
  throw ParseError("model JSON: unknown kind '" + text + "'");
}

}  // namespace

double empirical_quantile(std::span<const double> y, double p) {
  check_level(p);
  if (y.empty()) throw InsufficientDataError("empirical_quantile: empty sample");
  const double n = static_cast<double>(y.size());
  // n * p can land a few ulps above an integer; those cases mean that integer.
  auto k = static_cast<std::size_t>(std::ceil(n * p - 1e-9));
  k = std::clamp<std::size_t>(k, 1, y.size());
  std::vector<double> work(y.begin(), y.end());
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   work.end());
  return work[k - 1];
}

ExceedanceSet extract_exceedances(const UnivariateTarget& target, double p,
                                  bool use_aux, double aux_limit) {
  if (use_aux && !target.has_aux()) {
    throw PreconditionError("extract_exceedances: target has no auxiliary norm");
  }
  const std::vector<double>& series = use_aux ? target.aux_norm : target.y;
  ExceedanceSet set;
  set.level = p;
  set.on_aux = use_aux;
  set.threshold = empirical_quantile(series, p);
  if (use_aux && !(set.threshold < aux_limit)) {
    throw LevelTooHighError("auxiliary quantile " + std::to_string(set.threshold) +
                            " at level " + std::to_string(p) +
                            " is not below " + std::to_string(aux_limit));
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] > set.threshold) {
      set.records.push_back({i, target.day_of_year[i], series[i] - set.threshold});
    }
  }
  return set;
}

CyclicScale::CyclicScale(CyclicCubicBasis basis, std::vector<double> coefficients,
                         double floor)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)), floor_(floor) {
  if (coefficients_.size() != basis_.size()) {
    throw PreconditionError("CyclicScale: coefficient count does not match basis");
  }
}

CyclicScale fit_seasonal_scale(const ExceedanceSet& exceedances, std::size_t n_basis) {
  if (n_basis < 4) throw PreconditionError("fit_seasonal_scale: n_basis must be >= 4");
  const std::size_t n = exceedances.records.size();
  if (n < 2 * n_basis) {
    throw InsufficientDataError("fit_seasonal_scale: " + std::to_string(n) +
                                " exceedances, need at least " +
                                std::to_string(2 * n_basis));
  }
  auto basis = CyclicCubicBasis::uniform(n_basis, 1.0, kDaysPerYear);

  Eigen::MatrixXd design(n, n_basis);
  Eigen::VectorXd response(n);
  std::vector<double> row(n_basis);
  double excess_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = exceedances.records[i];
    basis.basis_row(rec.day, row);
    for (std::size_t k = 0; k < n_basis; ++k) design(i, k) = row[k];
    response(i) = rec.excess;
    excess_sum += rec.excess;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(n_basis)) {
    throw RankDeficiencyError("fit_seasonal_scale: design has rank " +
                              std::to_string(qr.rank()) + " < " +
                              std::to_string(n_basis) + "; reduce n_basis");
  }
  const Eigen::VectorXd beta = qr.solve(response);

  std::vector<double> coefficients(beta.data(), beta.data() + beta.size());
  double floor = 1e-6 * excess_sum / static_cast<double>(n);
  CyclicScale raw(basis, coefficients, floor);

  // Rescale so sum(f(d_t)) == sum(excess). Equals 1 unless the floor is
  // active; mean(excess / f) is not used because a single exceedance in a
  // floored season would dominate it.
  double fitted_sum = 0.0;
  for (const auto& rec : exceedances.records) fitted_sum += raw(rec.day);
  const double factor = excess_sum / fitted_sum;
  for (double& c : coefficients) c *= factor;
  floor *= factor;
  return CyclicScale(std::move(basis), std::move(coefficients), floor);
}

AdjustedExceedances adjust(const ExceedanceSet& exceedances, const CyclicScale& scale) {
  AdjustedExceedances out;
  out.values.reserve(exceedances.records.size());
  for (const auto& rec : exceedances.records) {
    out.values.push_back(rec.excess / scale(rec.day));
  }
  return out;
}

QQReport qq_exponential(const AdjustedExceedances& adjusted) {
  const std::size_t n = adjusted.values.size();
  if (n < 20) {
    throw InsufficientDataError("qq_exponential: need at least 20 values, got " +
                                std::to_string(n));
  }
  std::vector<double> sorted = adjusted.values;
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= static_cast<double>(n);

  QQReport report;
  report.points.reserve(n);
  const double bulk_limit = 0.99 * static_cast<double>(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double prob = (static_cast<double>(k) - 0.5) / static_cast<double>(n);
    const double theoretical = -std::log1p(-prob) * mean;
    const double observed = sorted[k - 1];
    const double deviation = std::abs(observed - theoretical);
    report.points.emplace_back(theoretical, observed);
    report.max_deviation = std::max(report.max_deviation, deviation);
    if (static_cast<double>(k) <= bulk_limit) {
      report.bulk_max_deviation = std::max(report.bulk_max_deviation, deviation);
    }
  }
  return report;
}

void PotModel::validate() const {
  check_level(level);
  if (day_pool.empty()) throw PreconditionError("PotModel: empty day pool");
  if (scale.n_basis() == 0) throw PreconditionError("PotModel: scale not fitted");
  if (!(scale.floor() > 0.0)) throw PreconditionError("PotModel: floor must be > 0");
  if (!std::isfinite(threshold)) throw PreconditionError("PotModel: threshold not finite");
  if ((kind == ModelKind::Angular) != (target == TargetId::T3)) {
    throw ConsistencyError("PotModel: Angular kind is reserved for T3");
  }
}

PotFit fit_pot_model(const UnivariateTarget& target, double p, const FitOptions& options) {
  const bool use_aux = target.has_aux();
  PotFit fit;
  fit.exceedances = extract_exceedances(target, p, use_aux, options.aux_limit);
  const CyclicScale scale = fit_seasonal_scale(fit.exceedances, options.n_basis);
  fit.adjusted = adjust(fit.exceedances, scale);

  PotModel& model = fit.model;
  model.target = target.id;
  model.level = p;
  model.threshold = fit.exceedances.threshold;
  model.scale = scale;
  model.kind = use_aux ? ModelKind::Angular : ModelKind::Direct;
  model.day_pool.reserve(fit.exceedances.records.size());
  for (const auto& rec : fit.exceedances.records) model.day_pool.push_back(rec.day);
  return fit;
}

std::vector<double> exceedance_observations(const UnivariateTarget& target,
                                            const ExceedanceSet& exceedances) {
  std::vector<double> out;
  out.reserve(exceedances.records.size());
  for (const auto& rec : exceedances.records) out.push_back(target.y[rec.position]);
  return out;
}

ModelSampler::ModelSampler(const PotModel& model)
    : threshold_(model.threshold), kind_(model.kind) {
  model.validate();
  pool_scale_.reserve(model.day_pool.size());
  for (int d : model.day_pool) pool_scale_.push_back(model.scale(d));
}

double ModelSampler::operator()(Rng& rng) const {
  const double f = pool_scale_[rng.below(pool_scale_.size())];
  double value = threshold_ + f * rng.exponential();
  if (kind_ == ModelKind::Angular) {
    const double theta = rng.uniform() * (std::numbers::pi / 2.0);
    value *= std::min(std::sin(theta), std::cos(theta));
  }
  return value;
}

ThresholdCounter::ThresholdCounter(const PotModel& model, double threshold)
    : sampler_(model), threshold_(threshold), direct_(model.kind == ModelKind::Direct) {
  if (!direct_) return;
  uniform_cut_.reserve(model.day_pool.size());
  for (int d : model.day_pool) {
    const double needed = (threshold - model.threshold) / model.scale(d);
    uniform_cut_.push_back(needed <= 0.0 ? -1.0 : -std::expm1(-needed));
  }
}

bool ThresholdCounter::operator()(Rng& rng) const {
  if (!direct_) return sampler_(rng) >= threshold_;
  const double cut = uniform_cut_[rng.below(uniform_cut_.size())];
  return rng.uniform() >= cut;
}

std::vector<double> sample_model(const PotModel& model, std::size_t n,
                                 std::uint64_t seed) {
  if (n == 0) throw PreconditionError("sample_model: n must be >= 1");
  const ModelSampler sampler(model);
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) v = sampler(rng);
  return out;
}

std::string model_to_json(const PotModel& model) {
  nlohmann::json j;
  j["target_id"] = std::string(to_string(model.target));
  j["p"] = model.level;
  j["q"] = model.threshold;
  j["n_basis"] = model.scale.n_basis();
  j["knots"] = model.scale.basis().knots();
  j["period"] = model.scale.basis().period();
  j["coefficients"] = model.scale.coefficients();
  j["floor"] = model.scale.floor();
  j["day_pool"] = model.day_pool;
  j["kind"] = model.kind == ModelKind::Angular ? "Angular" : "Direct";
  j["shape"] = model.shape;
  return j.dump(2);
}

PotModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  try {
    PotModel model;
    model.target = parse_target_id(j.at("target_id").get<std::string>());
    model.level = j.at("p").get<double>();
    model.threshold = j.at("q").get<double>();
    auto knots = j.at("knots").get<std::vector<double>>();
    const double period = j.value("period", static_cast<double>(kDaysPerYear));
    auto coefficients = j.at("coefficients").get<std::vector<double>>();
    if (coefficients.size() != j.at("n_basis").get<std::size_t>()) {
      throw ParseError("model JSON: n_basis does not match coefficients");
    }
    model.scale = CyclicScale(CyclicCubicBasis(std::move(knots), period),
                              std::move(coefficients), j.at("floor").get<double>());
    model.day_pool = j.at("day_pool").get<std::vector<int>>();
    model.kind = kind_from_string(j.at("kind").get<std::string>());
    model.shape = j.value("shape", 0.0);
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace potx
