#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "potx/ingest.hpp"

namespace potx {

enum class TargetId { T1, T2, T3 };

std::string_view to_string(TargetId id) noexcept;
// Accepts "T1"/"t1"/"1" etc.; throws ValidationError otherwise.
TargetId parse_target_id(std::string_view text);

struct TargetSpec {
  TargetId id = TargetId::T1;
  int rank = 25;                 // rank-th largest of the 25 values
  double event_threshold = 1.7;
  bool consecutive = false;      // event on day t and t+1

  // T1: min >= 1.7, T2: 6th largest >= 5.7, T3: 3rd largest >= 5 on two
  // consecutive days.
  static TargetSpec canonical(TargetId id) noexcept;

  void validate() const;
};

// Reduced daily series. For consecutive targets each entry is the day pair
// (t, t+1) inside one run, y = min of the two daily order statistics and
// aux_norm their Euclidean norm.
struct UnivariateTarget {
  TargetId id = TargetId::T1;
  std::vector<double> y;
  std::vector<int> day_of_year;
  std::vector<std::size_t> index;   // 1-based position in the concatenated runs
  std::vector<std::array<double, 2>> aux_pair;
  std::vector<double> aux_norm;

  bool has_aux() const noexcept { return !aux_norm.empty(); }
  std::size_t size() const noexcept { return y.size(); }
};

// rank-th largest value of a row, duplicates counted by multiplicity.
double rank_statistic(std::span<const double> row, int rank);

UnivariateTarget reduce_target(const Dataset& data, const TargetSpec& spec);

// Number of entries with y >= event_threshold.
std::size_t count_events(const UnivariateTarget& target, const TargetSpec& spec);

struct AngularReport {
  double threshold = 0.0;              // empirical quantile of aux_norm
  std::vector<double> angles;          // arcsin(y31 / ybar), in [0, pi/2]
  std::array<std::size_t, 20> histogram{};
  double ks_distance = 0.0;            // vs uniform on [0, pi/2]
};

// Angles of the auxiliary pairs whose norm exceeds its empirical p-quantile.
AngularReport angular_diagnostic(const UnivariateTarget& target, double p);

// CSV: target_id,t,day_of_year,y[,y31,y32,ybar]
void write_target_csv(std::ostream& out, const UnivariateTarget& target);

}  // namespace potx
