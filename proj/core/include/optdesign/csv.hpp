#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace optdesign::csv {

/// Shortest decimal that parses back to exactly the same double.
std::string format_roundtrip(double x);
/// printf("%.*g") formatting.
std::string format_significant(double x, int digits);

/// Splits one CSV line on commas and trims surrounding whitespace.
std::vector<std::string> split_line(std::string_view line);

/// Parses a whole field as a double; throws ValidationError otherwise.
double parse_double(std::string_view field);
/// Parses a whole field as an int; throws ValidationError otherwise.
int parse_int(std::string_view field);

}  // namespace optdesign::csv
