#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace potx::csv {

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Strict full-field parses; return false on any trailing garbage.
bool parse_double(std::string_view field, double& out);
bool parse_int(std::string_view field, long long& out);

// Comment line placed at the top of every emitted CSV.
std::string provenance_line(std::uint64_t seed, std::uint64_t config_hash);

}  // namespace potx::csv
