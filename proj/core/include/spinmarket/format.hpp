#pragma once

#include <string>

namespace spinmarket {

/// Shortest decimal text that round-trips to the same double. "nan"/"inf"/"-inf"
/// for non-finite values.
std::string format_real(double value);

/// Parses text written by format_real. Throws std::invalid_argument.
double parse_real(const std::string& text);

}  // namespace spinmarket
