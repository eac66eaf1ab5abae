#include "potx/csv.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <system_error>

namespace potx::csv {

std::string format_double(double value) {
  std::array<char, 64> buffer{};
  const auto result =
      std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), result.ptr);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

bool parse_double(std::string_view field, double& out) {
  if (field.empty()) return false;
  const char* first = field.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

bool parse_int(std::string_view field, long long& out) {
  if (field.empty()) return false;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

std::string provenance_line(std::uint64_t seed, std::uint64_t config_hash) {
  std::array<char, 96> buffer{};
  std::snprintf(buffer.data(), buffer.size(),
                "# seed=%llu config_hash=%016llx",
                static_cast<unsigned long long>(seed),
                static_cast<unsigned long long>(config_hash));
  return buffer.data();
}

}  // namespace potx::csv
