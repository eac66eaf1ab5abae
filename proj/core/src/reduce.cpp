#include "potx/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

#include "potx/csv.hpp"
#include "potx/error.hpp"
#include "potx/potmodel.hpp"
#include "potx/stats.hpp"

namespace potx {

std::string_view to_string(TargetId id) noexcept {
  switch (id) {
    case TargetId::T1: return "T1";
    case TargetId::T2: return "T2";
    case TargetId::T3: return "T3";
  }
  return "?";
}

TargetId parse_target_id(std::string_view text) {
  if (text == "T1" || text == "t1" || text == "1") return TargetId::T1;
  if (text == "T2" || text == "t2" || text == "2") return TargetId::T2;
  if (text == "T3" || text == "t3" || text == "3") return TargetId::T3;
  throw ValidationError("unknown target '" + std::string(text) + "'");
}

TargetSpec TargetSpec::canonical(TargetId id) noexcept {
  switch (id) {
    case TargetId::T1: return {TargetId::T1, 25, 1.7, false};
    case TargetId::T2: return {TargetId::T2, 6, 5.7, false};
    case TargetId::T3: return {TargetId::T3, 3, 5.0, true};
  }
  return {};
}

void TargetSpec::validate() const {
  if (rank < 1 || rank > static_cast<int>(kLocations)) {
    throw ValidationError("target rank must be in 1..25");
  }
  if (std::isnan(event_threshold)) throw ValidationError("event threshold is NaN");
  if (consecutive != (id == TargetId::T3)) {
    throw ValidationError("only T3 is a consecutive-day target");
  }
}

double rank_statistic(std::span<const double> row, int rank) {
  std::array<double, kLocations> work{};
  std::copy(row.begin(), row.end(), work.begin());
  auto nth = work.begin() + (rank - 1);
  std::nth_element(work.begin(), nth, work.begin() + static_cast<std::ptrdiff_t>(row.size()),
                   std::greater<>());
  return *nth;
}

UnivariateTarget reduce_target(const Dataset& data, const TargetSpec& spec) {
  spec.validate();
  UnivariateTarget out;
  out.id = spec.id;
  const std::size_t n = data.n_total();
  const std::size_t n_out = spec.consecutive ? n - data.runs.size() : n;
  out.y.reserve(n_out);
  out.day_of_year.reserve(n_out);
  out.index.reserve(n_out);
  if (spec.consecutive) {
    out.aux_pair.reserve(n_out);
    out.aux_norm.reserve(n_out);
  }

  std::size_t offset = 0;
  for (const auto& run : data.runs) {
    const std::size_t days = run.n_days();
    if (!spec.consecutive) {
      for (std::size_t t = 0; t < days; ++t) {
        out.y.push_back(rank_statistic(run.day(t), spec.rank));
        out.day_of_year.push_back(run.day_of_year[t]);
        out.index.push_back(offset + t + 1);
      }
    } else if (days > 0) {
      // Pairs (t, t+1) never cross a run boundary.
      double today = rank_statistic(run.day(0), spec.rank);
      for (std::size_t t = 0; t + 1 < days; ++t) {
        const double tomorrow = rank_statistic(run.day(t + 1), spec.rank);
        out.y.push_back(std::min(today, tomorrow));
        out.aux_pair.push_back({today, tomorrow});
        out.aux_norm.push_back(std::sqrt(today * today + tomorrow * tomorrow));
        out.day_of_year.push_back(run.day_of_year[t]);
        out.index.push_back(offset + t + 1);
        today = tomorrow;
      }
    }
    offset += days;
  }
  return out;
}

std::size_t count_events(const UnivariateTarget& target, const TargetSpec& spec) {
  if (target.id != spec.id) {
    throw ConsistencyError("count_events: target " + std::string(to_string(target.id)) +
                           " does not match spec " + std::string(to_string(spec.id)));
  }
  return static_cast<std::size_t>(std::count_if(
      target.y.begin(), target.y.end(),
      [&](double v) { return v >= spec.event_threshold; }));
}

AngularReport angular_diagnostic(const UnivariateTarget& target, double p) {
  if (!target.has_aux()) {
    throw PreconditionError("angular_diagnostic: target has no auxiliary pairs");
  }
  constexpr double kQuarterTurn = std::numbers::pi / 2.0;
  AngularReport report;
  report.threshold = empirical_quantile(target.aux_norm, p);
  for (std::size_t i = 0; i < target.aux_norm.size(); ++i) {
    const double norm = target.aux_norm[i];
    if (norm > report.threshold) {
      const double ratio = std::clamp(target.aux_pair[i][0] / norm, 0.0, 1.0);
      report.angles.push_back(std::asin(ratio));
    }
  }
  if (report.angles.size() < 20) {
    throw InsufficientDataError("angular_diagnostic: " +
                                std::to_string(report.angles.size()) +
                                " exceedances, need at least 20");
  }
  for (double a : report.angles) {
    const auto bin = static_cast<std::size_t>(a / kQuarterTurn * 20.0);
    ++report.histogram[std::min<std::size_t>(bin, 19)];
  }
  report.ks_distance = stats::ks_distance(report.angles, [](double a) {
    return std::clamp(a / kQuarterTurn, 0.0, 1.0);
  });
  return report;
}

void write_target_csv(std::ostream& out, const UnivariateTarget& target) {
  out << "target_id,t,day_of_year,y";
  if (target.has_aux()) out << ",y31,y32,ybar";
  out << '\n';
  const std::string_view id = to_string(target.id);
  for (std::size_t i = 0; i < target.size(); ++i) {
    out << id << ',' << target.index[i] << ',' << target.day_of_year[i] << ','
        << csv::format_double(target.y[i]);
    if (target.has_aux()) {
      out << ',' << csv::format_double(target.aux_pair[i][0]) << ','
          << csv::format_double(target.aux_pair[i][1]) << ','
          << csv::format_double(target.aux_norm[i]);
    }
    out << '\n';
  }
}

}  // namespace potx
