#include "ehrelay/stats.hpp"

#include <cmath>

namespace ehrelay {

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    LinearFit fit;
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n)
        return fit;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0)
        return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
            sse += r * r;
        }
        fit.slope_stderr = std::sqrt(sse / (n - 2) / sxx);
    }
    return fit;
}

} // namespace ehrelay
