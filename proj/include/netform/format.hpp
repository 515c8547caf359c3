#pragma once

#include <string>

namespace netform {

/// Shortest decimal form that round-trips to the same double; "inf", "-inf"
/// and "nan" for non-finite values. Locale independent.
std::string format_double(double v);

}  // namespace netform
