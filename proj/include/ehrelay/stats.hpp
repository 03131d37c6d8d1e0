#pragma once

#include <span>

namespace ehrelay {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    // Ordinary least-squares standard error of the slope (iid residuals).
    double slope_stderr = 0.0;
};

// Requires xs.size() == ys.size(); fewer than two points give a zero fit.
LinearFit fit_line(std::span<const double> xs, std::span<const double> ys);

} // namespace ehrelay
