#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ehrelay/validation.hpp"

namespace ehrelay::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationFailed = 1;
inline constexpr int kUsageError = 2;

// Runs one invocation; args excludes the program name. Output files are
// written directly; anything without --out goes to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

// One axis of a sweep grid.
struct GridAxis {
    double min = 0.0;
    double max = 0.0;
    double step = 0.0;

    // Grid values min, min + step, ... up to max (inclusive within 1e-9).
    // Throws ConfigError when step <= 0, min > max or the range leaves [0,1].
    std::vector<double> values() const;
};

// Parses "min:max:step" (both axes) or "min:max:step,min:max:step"
// (lambda_s then lambda_r).
std::pair<GridAxis, GridAxis> parse_grid(const std::string& text);

// Criterion 11: repeats each command with identical inputs and compares
// the outputs byte for byte.
CheckResult check_determinism(const ValidationOptions& opts);

// All acceptance checks, 1 to 11.
std::vector<CheckResult> acceptance_suite(const ValidationOptions& opts);

} // namespace ehrelay::cli
