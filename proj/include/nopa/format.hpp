#pragma once

#include <string>

namespace nopa {

/// Shortest decimal representation that parses back to the same double.
std::string format_csv(double v);

/// Human-oriented rendering with 10 significant digits, for messages.
std::string format_number(double v);

/// Fixed rendering with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

}  // namespace nopa
