#include "ehrelay/csv.hpp"

#include <array>
#include <charconv>

namespace ehrelay {

std::string format_double(double v) {
    if (v == 0.0)
        v = 0.0; // drop the sign of -0
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

} // namespace ehrelay
