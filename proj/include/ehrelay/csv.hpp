#pragma once

#include <string>

namespace ehrelay {

// Shortest decimal form that round-trips to the same double. Locale
// independent, so CSV output is byte-stable across runs.
std::string format_double(double v);

} // namespace ehrelay
