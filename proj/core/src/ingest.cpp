#include "potx/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "potx/csv.hpp"
#include "potx/error.hpp"
#include "potx/parallel.hpp"
#include "potx/reduce.hpp"
#include "potx/rng.hpp"

namespace potx {
namespace {

constexpr std::size_t kColumns = kLocations + 3;

std::string expected_header() {
  std::string header = "run_id,day_index,day_of_year";
  for (std::size_t j = 0; j < kLocations; ++j) {
    header += (j < 10) ? ",loc_0" : ",loc_";
    header += std::to_string(j);
  }
  return header;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

}  // namespace

void GridRun::validate() const {
  const std::string id = "run " + std::to_string(run_id);
  if (n_days() == 0 || n_days() % kDaysPerYear != 0) {
    throw ValidationError(id + ": day count " + std::to_string(n_days()) +
                          " is not a positive multiple of 365");
  }
  if (values.size() != n_days() * kLocations) {
    throw ValidationError(id + ": value matrix must have 25 columns per day");
  }
  for (std::size_t t = 0; t < n_days(); ++t) {
    const int expected = static_cast<int>(t % kDaysPerYear) + 1;
    if (day_of_year[t] != expected) {
      throw ValidationError(id + ": day_of_year at row " + std::to_string(t + 1) +
                            " is " + std::to_string(day_of_year[t]) +
                            ", expected " + std::to_string(expected));
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      throw ValidationError(id + ": value at row " +
                            std::to_string(i / kLocations + 1) +
                            " is negative or not finite");
    }
  }
}

std::size_t Dataset::n_total() const noexcept {
  std::size_t n = 0;
  for (const auto& run : runs) n += run.n_days();
  return n;
}

void Dataset::validate() const {
  if (runs.empty()) throw ValidationError("dataset has no runs");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    runs[i].validate();
    if (i > 0 && runs[i].run_id <= runs[i - 1].run_id) {
      throw ValidationError("run ids must be unique and ascending (run " +
                            std::to_string(runs[i].run_id) + ")");
    }
  }
}

double SynthSpec::latent_scale(int day) const noexcept {
  return tail_scale *
         (1.0 + seasonal_amplitude *
                    std::sin(2.0 * std::numbers::pi * day / kDaysPerYear));
}

void SynthSpec::validate() const {
  if (n_runs < 1) throw ValidationError("synth: n_runs must be >= 1");
  if (years_per_run < 1) throw ValidationError("synth: years_per_run must be >= 1");
  if (!(seasonal_amplitude >= 0.0 && seasonal_amplitude < 1.0)) {
    throw ValidationError("synth: seasonal_amplitude must be in [0, 1)");
  }
  if (!(tail_scale > 0.0) || !std::isfinite(tail_scale)) {
    throw ValidationError("synth: tail_scale must be positive");
  }
  for (double w : spatial_loading) {
    if (!(w > 0.0 && w <= 1.0)) {
      throw ValidationError("synth: spatial loadings must lie in (0, 1]");
    }
  }
}

GridRun load_run(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");

  static const std::string header = expected_header();
  GridRun run;
  bool seen_header = false;
  bool seen_row = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      if (csv::split(line).size() != kColumns) {
        throw SchemaError(where(path, line_no) + ": header must have 27 columns");
      }
      if (line != header) {
        throw SchemaError(where(path, line_no) + ": unexpected header, want " +
                          header);
      }
      seen_header = true;
      continue;
    }
    const auto fields = csv::split(line);
    if (fields.size() != kColumns) {
      throw SchemaError(where(path, line_no) + ": expected 27 columns, found " +
                        std::to_string(fields.size()));
    }
    long long run_id = 0, day_index = 0, doy = 0;
    if (!csv::parse_int(fields[0], run_id) || !csv::parse_int(fields[1], day_index) ||
        !csv::parse_int(fields[2], doy)) {
      throw ParseError(where(path, line_no) + ": malformed integer field");
    }
    if (!seen_row) {
      run.run_id = static_cast<int>(run_id);
      seen_row = true;
    } else if (run_id != run.run_id) {
      throw ValidationError(where(path, line_no) + ": run_id changes within file");
    }
    if (day_index != static_cast<long long>(run.n_days()) + 1) {
      throw ValidationError(where(path, line_no) + ": day_index out of sequence");
    }
    if (doy < 1 || doy > kDaysPerYear) {
      throw ValidationError(where(path, line_no) + ": day_of_year " +
                            std::to_string(doy) + " outside 1..365");
    }
    run.day_of_year.push_back(static_cast<int>(doy));
    for (std::size_t j = 0; j < kLocations; ++j) {
      double v = 0.0;
      if (!csv::parse_double(fields[3 + j], v)) {
        throw ParseError(where(path, line_no) + ": malformed value in column " +
                         std::to_string(4 + j));
      }
      run.values.push_back(v);
    }
  }
  if (!seen_header) throw SchemaError(path.string() + ": missing header");
  try {
    run.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return run;
}

Dataset load_dataset(std::span<const std::filesystem::path> paths) {
  Dataset data;
  for (const auto& path : paths) data.runs.push_back(load_run(path));
  std::sort(data.runs.begin(), data.runs.end(),
            [](const GridRun& a, const GridRun& b) { return a.run_id < b.run_id; });
  data.validate();
  return data;
}

void write_run(std::ostream& out, const GridRun& run) {
  out << expected_header() << '\n';
  std::string row;
  for (std::size_t t = 0; t < run.n_days(); ++t) {
    row.clear();
    row += std::to_string(run.run_id);
    row += ',';
    row += std::to_string(t + 1);
    row += ',';
    row += std::to_string(run.day_of_year[t]);
    for (double v : run.day(t)) {
      row += ',';
      row += csv::format_double(v);
    }
    row += '\n';
    out << row;
  }
}

void write_run(const std::filesystem::path& path, const GridRun& run) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  write_run(out, run);
}

std::vector<std::filesystem::path> write_dataset(
    const std::filesystem::path& directory, const Dataset& data) {
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> paths;
  for (const auto& run : data.runs) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%03d.csv", run.run_id);
    paths.push_back(directory / name);
    write_run(paths.back(), run);
  }
  return paths;
}

Dataset generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  Dataset data;
  data.runs.resize(static_cast<std::size_t>(spec.n_runs));
  const std::size_t n_days =
      static_cast<std::size_t>(spec.years_per_run) * kDaysPerYear;
  parallel_for(data.runs.size(), [&](std::size_t r) {
    GridRun& run = data.runs[r];
    run.run_id = static_cast<int>(r) + 1;
    run.day_of_year.resize(n_days);
    run.values.resize(n_days * kLocations);
    Rng rng(derive_seed(spec.seed, r + 1));
    for (std::size_t t = 0; t < n_days; ++t) {
      const int d = static_cast<int>(t % kDaysPerYear) + 1;
      run.day_of_year[t] = d;
      const double z = spec.latent_scale(d) * rng.exponential();
      double* row = run.values.data() + t * kLocations;
      for (std::size_t j = 0; j < kLocations; ++j) {
        row[j] = spec.spatial_loading[j] * z + rng.exponential();
      }
    }
  });
  return data;
}

OracleFrequency ground_truth_frequency(const SynthSpec& spec,
                                       const TargetSpec& target,
                                       std::uint64_t oracle_days,
                                       std::size_t run_days) {
  spec.validate();
  target.validate();
  if (oracle_days < 1'000'000) {
    throw PreconditionError("ground_truth_frequency: oracle_days must be >= 1e6");
  }
  constexpr std::uint64_t kYearsPerChunk = 1000;
  const std::uint64_t years = (oracle_days + kDaysPerYear - 1) / kDaysPerYear;
  const std::uint64_t n_chunks = (years + kYearsPerChunk - 1) / kYearsPerChunk;
  const std::uint64_t oracle_seed = derive_seed(spec.seed, 0x0ac1e0ac1eULL);

  const int need = target.rank;
  const int allowed_misses = static_cast<int>(kLocations) - target.rank;
  const double threshold = target.event_threshold;

  std::vector<std::uint64_t> events(n_chunks, 0), trials(n_chunks, 0);
  parallel_for(n_chunks, [&](std::size_t c) {
    const std::uint64_t chunk_years =
        std::min(kYearsPerChunk, years - c * kYearsPerChunk);
    const std::uint64_t chunk_days = chunk_years * kDaysPerYear;
    Rng rng(derive_seed(oracle_seed, c));
    std::uint64_t hits_total = 0;
    bool previous = false;
    for (std::uint64_t t = 0; t < chunk_days; ++t) {
      const int d = static_cast<int>(t % kDaysPerYear) + 1;
      const double z = spec.latent_scale(d) * rng.exponential();
      int hits = 0, misses = 0;
      bool event = false;
      for (std::size_t j = 0; j < kLocations; ++j) {
        const double v = spec.spatial_loading[j] * z + rng.exponential();
        if (v >= threshold) {
          if (++hits == need) {
            event = true;
            break;
          }
        } else if (++misses > allowed_misses) {
          break;
        }
      }
      if (target.consecutive) {
        if (t > 0 && previous && event) ++hits_total;
      } else if (event) {
        ++hits_total;
      }
      previous = event;
    }
    events[c] = hits_total;
    trials[c] = target.consecutive ? chunk_days - 1 : chunk_days;
  });

  OracleFrequency result;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    result.events += events[c];
    result.trials += trials[c];
  }
  const double rate =
      static_cast<double>(result.events) / static_cast<double>(result.trials);
  const double per_day_se =
      std::sqrt(rate * (1.0 - rate) / static_cast<double>(result.trials));
  result.per_run = rate * static_cast<double>(run_days);
  result.std_error = per_day_se * static_cast<double>(run_days);
  return result;
}

}  // namespace potx
