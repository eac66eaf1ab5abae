#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "potx/ingest.hpp"
#include "potx/reduce.hpp"

namespace potx::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() /
              (name + "_" + std::to_string(std::random_device{}()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Run of n_days with every location set to fill(t, j).
template <class F>
GridRun make_run(int run_id, std::size_t n_days, F fill) {
  GridRun run;
  run.run_id = run_id;
  for (std::size_t t = 0; t < n_days; ++t) {
    run.day_of_year.push_back(static_cast<int>(t % kDaysPerYear) + 1);
    for (std::size_t j = 0; j < kLocations; ++j) run.values.push_back(fill(t, j));
  }
  return run;
}

// Target series with the given values on consecutive days of year.
inline UnivariateTarget make_target(const std::vector<double>& y) {
  UnivariateTarget t;
  t.id = TargetId::T1;
  t.y = y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    t.day_of_year.push_back(static_cast<int>(i % kDaysPerYear) + 1);
    t.index.push_back(i + 1);
  }
  return t;
}

}  // namespace potx::testing
