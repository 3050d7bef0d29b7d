#pragma once

#include <string>

namespace lingua_adapt {

/// Shortest round-trip text for `value` after rounding to 10 decimal places.
std::string format_number(double value);

/// `value` rounded to 10 decimal places (negative zero folded to zero).
double tidy(double value);

} // namespace lingua_adapt
