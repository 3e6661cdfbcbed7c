#include "optdesign/csv.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>

#include "optdesign/error.hpp"

namespace optdesign::csv {

std::string format_roundtrip(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_significant(double x, int digits) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return std::string(buf, static_cast<std::size_t>(n));
}

namespace {
std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}
}  // namespace

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field) {
  double x = 0.0;
  const auto* end = field.data() + field.size();
  // from_chars rejects a leading '+', which users do write.
  const auto* begin = (!field.empty() && field.front() == '+') ? field.data() + 1 : field.data();
  const auto res = std::from_chars(begin, end, x);
  if (field.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw ValidationError("not a number: '" + std::string(field) + "'");
  }
  return x;
}

int parse_int(std::string_view field) {
  int x = 0;
  const auto* end = field.data() + field.size();
  const auto* begin = (!field.empty() && field.front() == '+') ? field.data() + 1 : field.data();
  const auto res = std::from_chars(begin, end, x);
  if (field.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw ValidationError("not an integer: '" + std::string(field) + "'");
  }
  return x;
}

}  // namespace optdesign::csv
