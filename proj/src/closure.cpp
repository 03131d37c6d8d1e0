#include "ehrelay/closure.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "ehrelay/csv.hpp"
#include "ehrelay/errors.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/regions.hpp"

namespace ehrelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Terms {
    double alpha;
    double capture;
    double p_rd;
    double ds;
    double dr;

    Terms(const ChannelParams& ch, const EnergyParams& en)
        : alpha(success_aggregate(ch)), capture(relay_capture(ch)), p_rd(ch.p_rd),
          ds(en.delta_s), dr(en.delta_r) {}

    double share() const { return alpha > 0.0 ? capture / alpha : 0.0; }

    // Where the q_r = delta_r line (AB / EF) meets the lambda_s axis.
    double relay_line_root() const {
        const double denom = (1.0 - dr) * capture + dr * p_rd;
        return denom > 0.0 ? dr * p_rd * alpha * (1.0 - dr) / denom : 0.0;
    }

    // Where the q_s = delta_s line (CD / FG) meets the lambda_s axis.
    std::optional<double> source_line_root() const {
        const double denom = (1.0 - ds) * p_rd + ds * capture;
        if (!(denom > 0.0))
            return std::nullopt;
        return ds * (1.0 - ds) * p_rd * alpha / denom;
    }

    // Where the curve meets the lambda_s axis: sqrt(x/alpha) = s0.
    double curve_root() const {
        const double s0 = std::sqrt(p_rd) / (std::sqrt(p_rd) + std::sqrt(capture));
        return alpha * s0 * s0;
    }

    // x on the q_r = delta_r line for ordinate y.
    double relay_line_x(double y) const {
        const double denom = (1.0 - dr) * capture + dr * p_rd;
        return denom > 0.0 ? (dr * p_rd - y) * (1.0 - dr) * alpha / denom : 0.0;
    }

    // x on the q_s = delta_s line for ordinate y.
    double source_line_x(double y) const {
        const double denom = (1.0 - ds) * p_rd + ds * capture;
        return denom > 0.0 ? ((1.0 - ds) * p_rd - y) * ds * alpha / denom : 0.0;
    }

    // x on the curve for ordinate y; the root of
    // (p_rd - c) s^2 - 2 p_rd s + (p_rd - y) = 0 in [0, 1].
    double curve_x(double y) const {
        const double disc = p_rd * y + capture * (p_rd - y);
        const double s = (p_rd - y) / (p_rd + std::sqrt(std::max(disc, 0.0)));
        return alpha * s * s;
    }
};

MinBranch pick_min(double first, double second) {
    const double scale = std::max({1.0, std::abs(first), std::abs(second)});
    if (std::abs(first - second) <= 1e-12 * scale)
        return MinBranch::Both;
    return first < second ? MinBranch::First : MinBranch::Second;
}

void finish_empty(ClosureBoundary& b, char first, char last, double y_first) {
    b.vertices = {{first, {0.0, std::max(y_first, 0.0)}}, {last, {0.0, 0.0}}};
    b.segments = {{SegmentKind::Line, first, last}};
}

ClosureBoundary build_above_one(const ChannelParams& ch, const EnergyParams& en) {
    const Terms t(ch, en);
    ClosureBoundary b;
    b.closure_case = ClosureCase::AboveOne;
    b.ch = ch;
    b.en = en;

    const NamedVertex a{'A', {0.0, t.dr * t.p_rd}};
    const NamedVertex vb{'B', {(1.0 - t.dr) * (1.0 - t.dr) * t.alpha,
                               t.dr * t.dr * t.p_rd - (1.0 - t.dr) * (1.0 - t.dr) * t.capture}};
    const NamedVertex vc{'C', {t.ds * t.ds * t.alpha,
                               (1.0 - t.ds) * (1.0 - t.ds) * t.p_rd - t.ds * t.ds * t.capture}};

    const auto cd_root = t.source_line_root();
    b.terminal_min_first = t.capture > 0.0 ? (1.0 - t.ds) * (1.0 - t.ds) * t.alpha / t.capture : kInf;
    b.terminal_min_second = cd_root.value_or(kInf);
    b.terminal_branch = pick_min(b.terminal_min_first, b.terminal_min_second);

    if (!(a.point.lambda_r > 0.0)) {
        b.dropped = {vb, vc};
        finish_empty(b, 'A', 'D', a.point.lambda_r);
        return b;
    }
    if (vb.point.lambda_r <= 0.0) {
        b.dropped = {vb, vc};
        b.vertices = {a, {'D', {t.relay_line_root(), 0.0}}};
        b.segments = {{SegmentKind::Line, 'A', 'D'}};
        return b;
    }
    if (vc.point.lambda_r < 0.0) {
        b.dropped = {vc};
        b.vertices = {a, vb, {'D', {t.curve_root(), 0.0}}};
        b.segments = {{SegmentKind::Line, 'A', 'B'}, {SegmentKind::Curve, 'B', 'D'}};
        return b;
    }
    b.vertices = {a, vb, vc, {'D', {cd_root.value_or(vc.point.lambda_s), 0.0}}};
    b.segments = {{SegmentKind::Line, 'A', 'B'},
                  {SegmentKind::Curve, 'B', 'C'},
                  {SegmentKind::Line, 'C', 'D'}};
    return b;
}

ClosureBoundary build_below_one(const ChannelParams& ch, const EnergyParams& en) {
    const Terms t(ch, en);
    ClosureBoundary b;
    b.closure_case = ClosureCase::BelowOne;
    b.ch = ch;
    b.en = en;

    const NamedVertex e{'E', {0.0, t.dr * t.p_rd}};
    const NamedVertex f{'F', {t.ds * (1.0 - t.dr) * t.alpha,
                              t.dr * (1.0 - t.ds) * t.p_rd - t.ds * (1.0 - t.dr) * t.capture}};

    const auto fg_root = t.source_line_root();
    b.terminal_min_first =
        t.capture > 0.0 ? (1.0 - t.ds) * t.dr * t.p_rd * t.alpha / t.capture : kInf;
    b.terminal_min_second = fg_root.value_or(kInf);
    b.terminal_branch = pick_min(b.terminal_min_first, b.terminal_min_second);

    if (!(e.point.lambda_r > 0.0)) {
        b.dropped = {f};
        finish_empty(b, 'E', 'G', e.point.lambda_r);
        return b;
    }
    if (f.point.lambda_r <= 0.0) {
        b.dropped = {f};
        b.vertices = {e, {'G', {t.relay_line_root(), 0.0}}};
        b.segments = {{SegmentKind::Line, 'E', 'G'}};
        return b;
    }
    b.vertices = {e, f, {'G', {fg_root.value_or(f.point.lambda_s), 0.0}}};
    b.segments = {{SegmentKind::Line, 'E', 'F'}, {SegmentKind::Line, 'F', 'G'}};
    return b;
}

double p2_objective(double q_r, double x, const Terms& t) {
    double y = q_r * t.p_rd - t.share() * x;
    if (x > 0.0)
        y -= q_r * t.p_rd * x / ((1.0 - q_r) * t.alpha);
    return y;
}

} // namespace

std::string to_string(ClosureCase c) {
    return c == ClosureCase::AboveOne ? "above_one" : "below_one";
}

std::string to_string(MinBranch b) {
    switch (b) {
    case MinBranch::First: return "first";
    case MinBranch::Second: return "second";
    case MinBranch::Both: return "both";
    }
    return "?";
}

std::string to_string(OptBranch b) {
    switch (b) {
    case OptBranch::Interior: return "interior";
    case OptBranch::ClampedAtDelta: return "clamped_at_delta";
    case OptBranch::ClampedAtZero: return "clamped_at_zero";
    case OptBranch::SourceLimited: return "source_limited";
    case OptBranch::RelayLimited: return "relay_limited";
    }
    return "?";
}

const NamedVertex* ClosureBoundary::find(char label) const {
    for (const auto& v : vertices)
        if (v.label == label)
            return &v;
    return nullptr;
}

double ClosureBoundary::x_end() const {
    return vertices.empty() ? 0.0 : vertices.back().point.lambda_s;
}

double curve_y(double x, const ChannelParams& ch) {
    const double alpha = success_aggregate(ch);
    const double ratio = alpha > 0.0 ? std::max(x, 0.0) / alpha : 0.0;
    const double s = std::sqrt(ratio);
    return ch.p_rd * (1.0 - s) * (1.0 - s) - relay_capture(ch) * ratio;
}

ClosureBoundary boundary_as(ClosureCase forced, const ChannelParams& ch, const EnergyParams& en) {
    return forced == ClosureCase::AboveOne ? build_above_one(ch, en) : build_below_one(ch, en);
}

ClosureBoundary boundary(const ChannelParams& ch, const EnergyParams& en) {
    const bool above = en.delta_s + en.delta_r >= 1.0;
    return boundary_as(above ? ClosureCase::AboveOne : ClosureCase::BelowOne, ch, en);
}

double boundary_y(const ClosureBoundary& b, double x) {
    if (b.vertices.empty())
        return 0.0;
    if (x <= 0.0)
        return b.vertices.front().point.lambda_r;
    if (x > b.x_end())
        return 0.0;
    for (std::size_t i = 0; i < b.segments.size(); ++i) {
        const RatePoint& p0 = b.vertices[i].point;
        const RatePoint& p1 = b.vertices[i + 1].point;
        if (x < p0.lambda_s || x > p1.lambda_s || !(p1.lambda_s > p0.lambda_s))
            continue;
        if (b.segments[i].kind == SegmentKind::Curve)
            return curve_y(x, b.ch);
        const double t = (x - p0.lambda_s) / (p1.lambda_s - p0.lambda_s);
        return p0.lambda_r + t * (p1.lambda_r - p0.lambda_r);
    }
    return 0.0;
}

bool contains(const RatePoint& p, const ClosureBoundary& b) {
    if (p.lambda_s < 0.0 || p.lambda_r < 0.0)
        return false;
    if (!(p.lambda_s < b.x_end() - kProbTol))
        return false;
    return p.lambda_r < boundary_y(b, p.lambda_s) - kProbTol;
}

bool contains(const RatePoint& p, const ChannelParams& ch, const EnergyParams& en) {
    return contains(p, boundary(ch, en));
}

P2Solution optimize_p2(double x, const ChannelParams& ch, const EnergyParams& en) {
    const Terms t(ch, en);
    if (!(t.alpha > 0.0))
        throw InfeasibleError("optimize_p2: alpha is zero, the source never departs");
    if (x < 0.0 || x > t.alpha + kProbTol)
        throw InfeasibleError("optimize_p2: x must lie in [0, alpha]");
    if (!(t.ds > 0.0) || x > t.ds * t.alpha)
        throw InfeasibleError("optimize_p2: x exceeds delta_s * alpha, no feasible q_s");

    const double root = std::sqrt(x / t.alpha);
    const double q_unconstrained = 1.0 - root;
    const double q_source_bound = 1.0 - x / (t.ds * t.alpha);

    P2Solution sol;
    if (t.dr <= q_unconstrained && t.dr <= q_source_bound) {
        sol.q_r_star = t.dr;
        sol.branch = OptBranch::ClampedAtDelta;
        sol.y_star = p2_objective(t.dr, x, t);
    } else if (q_source_bound < q_unconstrained) {
        sol.q_r_star = q_source_bound;
        sol.branch = OptBranch::SourceLimited;
        sol.y_star = p2_objective(q_source_bound, x, t);
    } else {
        sol.q_r_star = q_unconstrained;
        sol.branch = OptBranch::Interior;
        const double ratio = x / t.alpha;
        sol.y_star = t.p_rd - 2.0 * t.p_rd * root + ratio * (t.p_rd - t.capture);
    }
    if (sol.q_r_star <= 0.0) {
        sol.q_r_star = 0.0;
        sol.branch = OptBranch::ClampedAtZero;
        sol.y_star = p2_objective(0.0, x, t);
    }
    if (sol.y_star < -kProbTol)
        throw InfeasibleError("optimize_p2: best relay rate is negative");
    sol.y_star = std::max(sol.y_star, 0.0);
    sol.q_s = sol.q_r_star < 1.0 ? x / ((1.0 - sol.q_r_star) * t.alpha) : 0.0;
    return sol;
}

P1Solution optimize_p1(double y, const ChannelParams& ch, const EnergyParams& en) {
    const Terms t(ch, en);
    if (y < 0.0)
        throw InfeasibleError("optimize_p1: y must be nonnegative");
    if (y > t.dr * t.p_rd + kProbTol)
        throw InfeasibleError("optimize_p1: y exceeds delta_r * p_rd, no feasible q_r");
    if (!(t.alpha > 0.0))
        throw InfeasibleError("optimize_p1: alpha is zero, the source never departs");

    const ClosureBoundary b = boundary(ch, en);
    P1Solution sol;
    for (std::size_t i = 0; i < b.segments.size(); ++i) {
        const double y_hi = b.vertices[i].point.lambda_r;
        const double y_lo = b.vertices[i + 1].point.lambda_r;
        const bool last = i + 1 == b.segments.size();
        if (!(y <= y_hi + kProbTol && (y >= y_lo || last)))
            continue;
        const ClosureSegment& seg = b.segments[i];
        if (seg.kind == SegmentKind::Curve) {
            sol.x_star = t.curve_x(y);
            sol.q_s_star = std::sqrt(sol.x_star / t.alpha);
            sol.q_r = 1.0 - sol.q_s_star;
            sol.branch = OptBranch::Interior;
        } else if (seg.from == 'A' || seg.from == 'E') {
            sol.x_star = std::max(t.relay_line_x(y), 0.0);
            sol.q_r = t.dr;
            sol.q_s_star = t.dr < 1.0 ? sol.x_star / ((1.0 - t.dr) * t.alpha) : 0.0;
            sol.branch = OptBranch::RelayLimited;
        } else {
            sol.x_star = std::max(t.source_line_x(y), 0.0);
            sol.q_s_star = t.ds;
            sol.q_r = t.ds > 0.0 ? 1.0 - sol.x_star / (t.ds * t.alpha) : 0.0;
            sol.branch = OptBranch::ClampedAtDelta;
        }
        break;
    }
    if (sol.q_s_star <= 0.0) {
        sol.q_s_star = 0.0;
        sol.branch = OptBranch::ClampedAtZero;
    }
    return sol;
}

std::vector<BoundarySample> sample_boundary(const ClosureBoundary& b, int curve_samples) {
    std::vector<BoundarySample> out;
    if (b.vertices.empty())
        return out;
    out.push_back({std::string(1, b.vertices.front().label), b.vertices.front().point});
    for (std::size_t i = 0; i < b.segments.size(); ++i) {
        const ClosureSegment& seg = b.segments[i];
        const RatePoint p0 = b.vertices[i].point;
        const RatePoint p1 = b.vertices[i + 1].point;
        if (seg.kind == SegmentKind::Curve && p1.lambda_s > p0.lambda_s) {
            const std::string name{seg.from, seg.to};
            for (int k = 1; k <= curve_samples; ++k) {
                const double x = p0.lambda_s + (p1.lambda_s - p0.lambda_s) * k / (curve_samples + 1);
                out.push_back({name, {x, curve_y(x, b.ch)}});
            }
        }
        out.push_back({std::string(1, b.vertices[i + 1].label), p1});
    }
    return out;
}

std::string boundary_csv(const ClosureBoundary& b, int curve_samples) {
    std::string out = "segment,lambda_s,lambda_r\n";
    for (const auto& s : sample_boundary(b, curve_samples)) {
        out += s.segment;
        out += ',';
        out += format_double(s.point.lambda_s);
        out += ',';
        out += format_double(s.point.lambda_r);
        out += '\n';
    }
    return out;
}

MembershipGrid union_oracle(const ChannelParams& ch, const EnergyParams& en,
                            const UnionOracleOptions& opts) {
    const int n = std::max(opts.grid_n, 2);
    MembershipGrid grid;
    grid.rate_n = std::max(opts.rate_n, 2);
    grid.inside.assign(static_cast<std::size_t>(grid.rate_n) * grid.rate_n, 0);

    const double hi_s = opts.domain == PolicyDomain::Clamped ? en.delta_s : 1.0;
    const double hi_r = opts.domain == PolicyDomain::Clamped ? en.delta_r : 1.0;
    std::vector<double> qs_values(n), qr_values(n);
    for (int i = 0; i < n; ++i) {
        qs_values[i] = hi_s * i / (n - 1);
        qr_values[i] = hi_r * i / (n - 1);
    }

    std::vector<OuterBound> bounds;
    bounds.reserve(static_cast<std::size_t>(n) * n);
    for (double qs : qs_values)
        for (double qr : qr_values)
            bounds.emplace_back(RegionSpec{ch, en, {qs, qr}});

    const double alpha = success_aggregate(ch);
    std::atomic<int> next_column{0};
    auto worker = [&] {
        std::vector<OuterBound> extra;
        for (int i = next_column++; i < grid.rate_n; i = next_column++) {
            const double x = grid.coord(i);
            extra.clear();
            if (opts.include_curve_policies && alpha > 0.0 && x <= alpha) {
                const double qr = 1.0 - std::sqrt(x / alpha);
                if (qr >= 0.0 && qr <= hi_r)
                    for (double qs : qs_values)
                        extra.emplace_back(RegionSpec{ch, en, {qs, qr}});
            }
            for (int j = 0; j < grid.rate_n; ++j) {
                const RatePoint p{x, grid.coord(j)};
                bool in = false;
                for (const auto& bound : bounds)
                    if (bound.contains(p)) {
                        in = true;
                        break;
                    }
                if (!in)
                    for (const auto& bound : extra)
                        if (bound.contains(p)) {
                            in = true;
                            break;
                        }
                grid.inside[static_cast<std::size_t>(i) * grid.rate_n + j] = in ? 1 : 0;
            }
        }
    };

    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    return grid;
}

double distance_to_boundary(const RatePoint& p, const ClosureBoundary& b) {
    const auto samples = sample_boundary(b, 4096);
    if (samples.empty())
        return kInf;
    double best = kInf;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const RatePoint a = samples[i].point, c = samples[i + 1].point;
        const double dx = c.lambda_s - a.lambda_s, dy = c.lambda_r - a.lambda_r;
        const double len2 = dx * dx + dy * dy;
        double t = 0.0;
        if (len2 > 0.0)
            t = std::clamp(((p.lambda_s - a.lambda_s) * dx + (p.lambda_r - a.lambda_r) * dy) / len2, 0.0, 1.0);
        const double ex = a.lambda_s + t * dx - p.lambda_s, ey = a.lambda_r + t * dy - p.lambda_r;
        best = std::min(best, std::hypot(ex, ey));
    }
    if (samples.size() == 1)
        best = std::hypot(samples[0].point.lambda_s - p.lambda_s, samples[0].point.lambda_r - p.lambda_r);
    return best;
}

} // namespace ehrelay
