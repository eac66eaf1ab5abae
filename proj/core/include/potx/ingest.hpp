#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace potx {

inline constexpr std::size_t kLocations = 25;
inline constexpr int kDaysPerYear = 365;
// Days in one 165-year run.
inline constexpr std::size_t kDaysPerRun = 165 * 365;

struct TargetSpec;

// One climate run: n_days rows of 25 daily precipitation values.
struct GridRun {
  int run_id = 0;
  std::vector<int> day_of_year;  // 1..365, cycling
  std::vector<double> values;    // row-major, n_days x kLocations

  std::size_t n_days() const noexcept { return day_of_year.size(); }

  std::span<const double> day(std::size_t t) const noexcept {
    return {values.data() + t * kLocations, kLocations};
  }

  // Throws ValidationError when a GridRun invariant does not hold.
  void validate() const;
};

// Runs ordered by ascending run_id.
struct Dataset {
  std::vector<GridRun> runs;

  std::size_t n_total() const noexcept;
  void validate() const;
};

struct SynthSpec {
  int n_runs = 4;
  int years_per_run = 165;
  std::uint64_t seed = 1;
  double seasonal_amplitude = 0.5;
  double tail_scale = 1.0;
  std::array<double, kLocations> spatial_loading = filled_loading(1.0);

  static constexpr std::array<double, kLocations> filled_loading(double v) {
    std::array<double, kLocations> a{};
    a.fill(v);
    return a;
  }

  // Latent scale s(d) for day of year d.
  double latent_scale(int day) const noexcept;

  void validate() const;
};

// Reads one CSV run file (header required, '#' comment lines skipped).
GridRun load_run(const std::filesystem::path& path);

// Loads, validates and orders runs by run_id.
Dataset load_dataset(std::span<const std::filesystem::path> paths);

// Canonical CSV serialization; load_run of the output reproduces the run.
void write_run(std::ostream& out, const GridRun& run);
void write_run(const std::filesystem::path& path, const GridRun& run);

// Writes one file per run (run_NNN.csv) and returns their paths.
std::vector<std::filesystem::path> write_dataset(
    const std::filesystem::path& directory, const Dataset& data);

// Day t has latent factor Z_t = s(d_t) * E_t with E_t ~ Exp(1); location j
// gets spatial_loading[j] * Z_t plus independent Exp(1) noise.
Dataset generate_synthetic(const SynthSpec& spec);

struct OracleFrequency {
  double per_run = 0.0;     // expected events per run
  double std_error = 0.0;   // Monte Carlo standard error of per_run
  std::uint64_t events = 0;
  std::uint64_t trials = 0; // days (or day pairs) simulated
};

// Brute-force expected number of target events per run of run_days days
// under the synthetic generator. Independent of reduce_target: events are
// counted as "at least rank locations >= threshold" with early exit.
OracleFrequency ground_truth_frequency(const SynthSpec& spec,
                                       const TargetSpec& target,
                                       std::uint64_t oracle_days,
                                       std::size_t run_days = kDaysPerRun);

}  // namespace potx
