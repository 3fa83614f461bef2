#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace irtgrid {

/// Splits one CSV line. Supports double-quoted fields with "" escapes;
/// no multi-line fields.
std::vector<std::string> split_csv_line(const std::string& line);

/// Quotes a field only when it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

/// Shortest decimal representation that round-trips the exact double
/// (std::to_chars). "nan"/"inf"/"-inf" for non-finite values.
std::string format_double(double value);

/// Strict double parse of a whole token; throws ParseError otherwise.
double parse_double(const std::string& token, const std::string& context);

/// Strict non-negative integer parse; throws ParseError otherwise.
long long parse_integer(const std::string& token, const std::string& context);

/// Trims ASCII whitespace from both ends.
std::string trim(const std::string& s);

}  // namespace irtgrid
