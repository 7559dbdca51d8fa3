#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cddsat::csv {

// RFC 4180 quoting: fields containing ',', '"', CR or LF are quoted and inner
// quotes doubled.
std::string field(std::string_view value);

// One CRLF-free line; callers append '\n'.
std::string row(const std::vector<std::string>& fields);

// Shortest decimal that round-trips ("0.0625", "1", "489.6592").
std::string number(double value);

}  // namespace cddsat::csv
