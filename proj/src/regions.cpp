#include "ehrelay/regions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "ehrelay/csv.hpp"
#include "ehrelay/errors.hpp"
#include "ehrelay/model.hpp"

namespace ehrelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool strictly_below(double lhs, double rhs) { return lhs < rhs - kProbTol; }

struct Coefficients {
    double ms;      // min(delta_s, q_s)
    double mr;      // min(delta_r, q_r)
    double alpha;   // success_aggregate
    double capture; // (1 - p_sd) p_sr
    double p_rd;

    explicit Coefficients(const RegionSpec& spec)
        : ms(effective_access(spec.en.delta_s, spec.pol.q_s)),
          mr(effective_access(spec.en.delta_r, spec.pol.q_r)),
          alpha(success_aggregate(spec.ch)),
          capture(relay_capture(spec.ch)),
          p_rd(spec.ch.p_rd) {}

    // Slope of lambda_{R,total} in lambda_s; zero when alpha == 0 (then
    // capture is zero too).
    double relay_share() const { return alpha > 0.0 ? capture / alpha : 0.0; }
};

// y = intercept - slope * x, slope >= 0.
struct Line {
    double intercept;
    double slope;
    std::string tag;

    double at(double x) const { return intercept - slope * x; }
};

// Region { 0 <= x < x_limit, y < min_i lines[i](x) } clipped to [0,1]^2.
BoundaryPolyline build_polyline(const std::vector<Line>& lines, double x_limit,
                                const std::string& limit_tag) {
    BoundaryPolyline poly;
    if (lines.empty())
        return poly;
    x_limit = std::min(x_limit, 1.0);

    auto min_at = [&](double x) {
        double best = kInf;
        for (const auto& l : lines)
            best = std::min(best, l.at(x));
        return best;
    };

    const double y0 = std::min(min_at(0.0), 1.0);
    if (!(y0 > 0.0) || x_limit < 0.0)
        return poly;

    poly.vertices.push_back({0.0, y0});
    if (x_limit == 0.0) {
        poly.vertices.push_back({0.0, 0.0});
        poly.segment_tags.push_back(limit_tag);
        return poly;
    }

    // Active line at the left edge: lowest value, ties broken by the
    // steeper slope (it stays lowest to the right).
    std::size_t active = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const double vi = lines[i].at(0.0), va = lines[active].at(0.0);
        if (vi < va || (vi == va && lines[i].slope > lines[active].slope))
            active = i;
    }

    double x = 0.0;
    for (std::size_t guard = 0; guard <= lines.size() + 1; ++guard) {
        const Line& a = lines[active];
        double next_x = kInf;
        std::optional<std::size_t> next_line;
        for (std::size_t j = 0; j < lines.size(); ++j) {
            if (j == active || lines[j].slope <= a.slope)
                continue;
            const double xj = (lines[j].intercept - a.intercept) / (lines[j].slope - a.slope);
            if (xj > x && xj < next_x) {
                next_x = xj;
                next_line = j;
            }
        }
        const double x_zero = a.slope > 0.0 ? a.intercept / a.slope : kInf;

        if (x_zero <= next_x && x_zero <= x_limit) {
            poly.vertices.push_back({x_zero, 0.0});
            poly.segment_tags.push_back(a.tag);
            return poly;
        }
        if (x_limit <= next_x) {
            poly.vertices.push_back({x_limit, a.at(x_limit)});
            poly.segment_tags.push_back(a.tag);
            poly.vertices.push_back({x_limit, 0.0});
            poly.segment_tags.push_back(limit_tag);
            return poly;
        }
        poly.vertices.push_back({next_x, a.at(next_x)});
        poly.segment_tags.push_back(a.tag);
        x = next_x;
        active = *next_line;
    }
    return poly;
}

struct Limits {
    double left;
    double right;
};

// Left/right limits of the polyline height at x, and the tag of the
// non-vertical segment covering (x - 0, x + 0).
Limits height_limits(const BoundaryPolyline& poly, double x) {
    Limits lim{0.0, 0.0};
    const auto& v = poly.vertices;
    if (v.empty())
        return lim;
    if (x == v.front().lambda_s)
        lim.left = v.front().lambda_r;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double x0 = v[i].lambda_s, x1 = v[i + 1].lambda_s;
        if (!(x1 > x0))
            continue;
        const double t_val = v[i].lambda_r + (v[i + 1].lambda_r - v[i].lambda_r) * (x - x0) / (x1 - x0);
        if (x0 < x && x <= x1)
            lim.left = x == x1 ? v[i + 1].lambda_r : t_val;
        if (x0 <= x && x < x1)
            lim.right = x == x0 ? v[i].lambda_r : t_val;
    }
    return lim;
}

std::string tag_at(const BoundaryPolyline& poly, double x_mid) {
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i].lambda_s < x_mid && x_mid < v[i + 1].lambda_s)
            return poly.segment_tags[i];
    return {};
}

// Tag of a vertical drop located at x, if any.
std::string vertical_tag_at(const BoundaryPolyline& poly, double x) {
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i].lambda_s == x && v[i + 1].lambda_s == x)
            return poly.segment_tags[i];
    return {};
}

constexpr double kMergeTol = 1e-12;

void push_vertex(BoundaryPolyline& poly, RatePoint p, const std::string& tag) {
    auto& v = poly.vertices;
    if (!v.empty() && std::abs(v.back().lambda_s - p.lambda_s) <= kMergeTol &&
        std::abs(v.back().lambda_r - p.lambda_r) <= kMergeTol)
        return;
    // Merge a collinear continuation of the same constraint.
    if (v.size() >= 2 && poly.segment_tags.back() == tag) {
        const RatePoint& a = v[v.size() - 2];
        const RatePoint& b = v.back();
        const double cross = (b.lambda_s - a.lambda_s) * (p.lambda_r - a.lambda_r) -
                             (b.lambda_r - a.lambda_r) * (p.lambda_s - a.lambda_s);
        if (std::abs(cross) < 1e-15) {
            v.back() = p;
            return;
        }
    }
    if (!v.empty())
        poly.segment_tags.push_back(tag);
    v.push_back(p);
}

} // namespace

bool inner_contains(const RatePoint& p, const RegionSpec& spec) {
    const Coefficients k(spec);
    if (!strictly_below(p.lambda_s, k.ms * (1.0 - k.mr) * k.alpha))
        return false;
    const double relay_total = p.lambda_r + k.relay_share() * p.lambda_s;
    return strictly_below(relay_total, k.mr * (1.0 - k.ms) * k.p_rd);
}

OuterBound::OuterBound(const RegionSpec& spec) {
    const Coefficients k(spec);
    relay_share_ = k.relay_share();

    const double d1 = (1.0 - k.ms) * k.p_rd;
    if (d1 > 0.0) {
        r1_valid_ = true;
        r1_coef_s_ = 1.0 + k.ms * k.capture / d1;
        r1_coef_r_ = k.ms * k.alpha / d1;
        r1_rhs_ = k.ms * k.alpha;
        r1_relay_rhs_ = k.mr * (1.0 - k.ms) * k.p_rd;
    }
    const double d2 = (1.0 - k.mr) * k.alpha;
    if (d2 > 0.0) {
        r2_valid_ = true;
        r2_coef_s_ = ((1.0 - k.mr) * k.capture + k.mr * k.p_rd) / d2;
        r2_rhs_ = k.mr * k.p_rd;
        r2_source_rhs_ = k.ms * (1.0 - k.mr) * k.alpha;
    }
}

bool OuterBound::contains(const RatePoint& p) const noexcept {
    if (r1_valid_ && strictly_below(r1_coef_s_ * p.lambda_s + r1_coef_r_ * p.lambda_r, r1_rhs_) &&
        strictly_below(p.lambda_r + relay_share_ * p.lambda_s, r1_relay_rhs_))
        return true;
    return r2_valid_ && strictly_below(p.lambda_r + r2_coef_s_ * p.lambda_s, r2_rhs_) &&
           strictly_below(p.lambda_s, r2_source_rhs_);
}

bool r1_contains(const RatePoint& p, const RegionSpec& spec) {
    const Coefficients k(spec);
    const double denom = (1.0 - k.ms) * k.p_rd;
    if (!(denom > 0.0))
        throw DegenerateRegionError("R1: [1 - min(delta_s,q_s)] p_rd is zero");
    const double coef_s = 1.0 + k.ms * k.capture / denom;
    const double coef_r = k.ms * k.alpha / denom;
    if (!strictly_below(coef_s * p.lambda_s + coef_r * p.lambda_r, k.ms * k.alpha))
        return false;
    const double relay_total = p.lambda_r + k.relay_share() * p.lambda_s;
    return strictly_below(relay_total, k.mr * (1.0 - k.ms) * k.p_rd);
}

bool r2_contains(const RatePoint& p, const RegionSpec& spec) {
    const Coefficients k(spec);
    const double denom = (1.0 - k.mr) * k.alpha;
    if (!(denom > 0.0))
        throw DegenerateRegionError("R2: [1 - min(delta_r,q_r)] alpha is zero");
    const double coef_s = ((1.0 - k.mr) * k.capture + k.mr * k.p_rd) / denom;
    if (!strictly_below(p.lambda_r + coef_s * p.lambda_s, k.mr * k.p_rd))
        return false;
    return strictly_below(p.lambda_s, k.ms * (1.0 - k.mr) * k.alpha);
}

bool outer_contains(const RatePoint& p, const RegionSpec& spec) {
    return OuterBound(spec).contains(p);
}

BoundaryPolyline inner_boundary(const RegionSpec& spec) {
    const Coefficients k(spec);
    std::vector<Line> lines{{k.mr * (1.0 - k.ms) * k.p_rd, k.relay_share(), "inner.relay"}};
    return build_polyline(lines, k.ms * (1.0 - k.mr) * k.alpha, "inner.source");
}

BoundaryPolyline r1_boundary(const RegionSpec& spec) {
    const Coefficients k(spec);
    const double denom = (1.0 - k.ms) * k.p_rd;
    if (!(denom > 0.0))
        return {};
    const double coef_s = 1.0 + k.ms * k.capture / denom;
    const double coef_r = k.ms * k.alpha / denom;
    std::vector<Line> lines{{k.mr * (1.0 - k.ms) * k.p_rd, k.relay_share(), "r1.relay"}};
    double x_limit = kInf;
    if (coef_r > 0.0)
        lines.push_back({k.ms * k.alpha / coef_r, coef_s / coef_r, "r1.source"});
    else
        x_limit = 0.0; // coef_s * x < 0 has no solution with x >= 0
    return build_polyline(lines, x_limit, "r1.source");
}

BoundaryPolyline r2_boundary(const RegionSpec& spec) {
    const Coefficients k(spec);
    const double denom = (1.0 - k.mr) * k.alpha;
    if (!(denom > 0.0))
        return {};
    const double coef_s = ((1.0 - k.mr) * k.capture + k.mr * k.p_rd) / denom;
    std::vector<Line> lines{{k.mr * k.p_rd, coef_s, "r2.relay"}};
    return build_polyline(lines, k.ms * (1.0 - k.mr) * k.alpha, "r2.source");
}

BoundaryPolyline outer_boundary(const RegionSpec& spec) {
    const std::array<BoundaryPolyline, 2> parts{r1_boundary(spec), r2_boundary(spec)};

    std::vector<double> xs;
    for (const auto& p : parts)
        for (const auto& v : p.vertices)
            xs.push_back(v.lambda_s);
    if (xs.empty())
        return {};

    // Crossings between non-vertical segments of the two boundaries.
    const auto& a = parts[0].vertices;
    const auto& b = parts[1].vertices;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        for (std::size_t j = 0; j + 1 < b.size(); ++j) {
            const double ax0 = a[i].lambda_s, ax1 = a[i + 1].lambda_s;
            const double bx0 = b[j].lambda_s, bx1 = b[j + 1].lambda_s;
            if (!(ax1 > ax0) || !(bx1 > bx0))
                continue;
            const double lo = std::max(ax0, bx0), hi = std::min(ax1, bx1);
            if (!(hi > lo))
                continue;
            const double sa = (a[i + 1].lambda_r - a[i].lambda_r) / (ax1 - ax0);
            const double sb = (b[j + 1].lambda_r - b[j].lambda_r) / (bx1 - bx0);
            if (sa == sb)
                continue;
            const double ia = a[i].lambda_r - sa * ax0;
            const double ib = b[j].lambda_r - sb * bx0;
            const double x = (ib - ia) / (sa - sb);
            if (x > lo && x < hi)
                xs.push_back(x);
        }
    }
    std::sort(xs.begin(), xs.end());
    // The two boundaries often share a corner up to rounding.
    xs.erase(std::unique(xs.begin(), xs.end(), [](double u, double v) { return v - u <= kMergeTol; }), xs.end());

    BoundaryPolyline env;
    std::string pending_tag;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double x = xs[k];
        double left = 0.0, right = 0.0;
        std::size_t top_part = 0;
        for (std::size_t p = 0; p < parts.size(); ++p) {
            const Limits lim = height_limits(parts[p], x);
            if (lim.left > left) {
                left = lim.left;
                top_part = p;
            }
            right = std::max(right, lim.right);
        }
        push_vertex(env, {x, left}, pending_tag);
        if (right < left) {
            std::string vtag = vertical_tag_at(parts[top_part], x);
            push_vertex(env, {x, right}, vtag.empty() ? "axis" : vtag);
        }
        if (right <= 0.0)
            break;
        if (k + 1 < xs.size()) {
            const double mid = 0.5 * (x + xs[k + 1]);
            double best = -1.0;
            for (const auto& p : parts) {
                const Limits lim = height_limits(p, mid);
                if (lim.left > best) {
                    best = lim.left;
                    pending_tag = tag_at(p, mid);
                }
            }
        }
    }
    return env;
}

double polyline_height(const BoundaryPolyline& poly, double x) {
    return height_limits(poly, x).left;
}

std::string polyline_csv(const BoundaryPolyline& poly) {
    std::string out = "lambda_s,lambda_r,active_constraint\n";
    for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
        out += format_double(poly.vertices[i].lambda_s);
        out += ',';
        out += format_double(poly.vertices[i].lambda_r);
        out += ',';
        out += i == 0 ? std::string("start") : poly.segment_tags[i - 1];
        out += '\n';
    }
    return out;
}

} // namespace ehrelay
