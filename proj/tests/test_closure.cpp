#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/tools/minima.hpp>

#include "ehrelay/closure.hpp"
#include "ehrelay/errors.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/regions.hpp"

using namespace ehrelay;

namespace {

const ChannelParams kStar{0.2, 0.6, 0.5};

void check_vertex(const ClosureBoundary& b, char label, double x, double y) {
    const auto* v = b.find(label);
    REQUIRE_MESSAGE(v != nullptr, "missing vertex " << label);
    CHECK(v->point.lambda_s == doctest::Approx(x).epsilon(1e-12));
    CHECK(v->point.lambda_r == doctest::Approx(y).epsilon(1e-12));
}

ChannelParams random_channel(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double p_sd = 0.05 + 0.45 * u(rng);
    return {p_sd, p_sd + (0.95 - p_sd) * (0.1 + 0.9 * u(rng)), 0.1 + 0.85 * u(rng)};
}

// Largest relay rate at source rate x, by Brent over q_r. q_s is pinned by
// x; the objective is concave on the feasible interval.
double brent_p2(double x, const ChannelParams& ch, const EnergyParams& en) {
    const double alpha = success_aggregate(ch), c = relay_capture(ch);
    const double q_hi = std::min(en.delta_r, 1.0 - x / (en.delta_s * alpha));
    auto neg = [&](double q_r) { return -(q_r * ch.p_rd * (1.0 - x / ((1.0 - q_r) * alpha)) - c * x / alpha); };
    const auto [q, v] = boost::math::tools::brent_find_minima(neg, 0.0, q_hi, 60);
    (void)q;
    // Brent never evaluates the ends; the clamped optima sit there.
    return -std::min({v, neg(0.0), neg(q_hi)});
}

// Largest source rate at relay rate y. The boundary height decreases in
// x, so bisect on the Brent solution of the relay problem.
double bisect_p1(double y, const ChannelParams& ch, const EnergyParams& en) {
    double lo = 0.0, hi = en.delta_s * success_aggregate(ch);
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (brent_p2(mid, ch, en) >= y)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

} // namespace

TEST_CASE("reference vertices, harvest sum above one") {
    const auto b = boundary(kStar, {0.5, 0.6});
    CHECK(b.closure_case == ClosureCase::AboveOne);
    REQUIRE(b.vertices.size() == 4);
    check_vertex(b, 'A', 0.0, 0.36);
    check_vertex(b, 'B', 0.096, 0.152);
    check_vertex(b, 'C', 0.15, 0.05);
    check_vertex(b, 'D', 0.18, 0.0);
    CHECK(b.dropped.empty());
    CHECK(b.terminal_branch == MinBranch::Second);
    CHECK(b.terminal_min_second == doctest::Approx(0.18));
    CHECK(b.segments.size() == 3);
    CHECK(b.segments[1].kind == SegmentKind::Curve);
}

TEST_CASE("reference vertices, harvest sum below one") {
    const auto b = boundary(kStar, {0.3, 0.4});
    CHECK(b.closure_case == ClosureCase::BelowOne);
    REQUIRE(b.vertices.size() == 3);
    check_vertex(b, 'E', 0.0, 0.24);
    check_vertex(b, 'F', 0.108, 0.096);
    check_vertex(b, 'G', 0.14, 0.0);
}

TEST_CASE("full harvest gives a pure curve") {
    const auto b = boundary(kStar, {1.0, 1.0});
    // A and B coincide on the axis; the curve meets the lambda_s axis.
    check_vertex(b, 'A', 0.0, 0.6);
    check_vertex(b, 'B', 0.0, 0.6);
    const double s0 = std::sqrt(0.6) / (std::sqrt(0.6) + std::sqrt(0.4));
    check_vertex(b, 'D', 0.6 * s0 * s0, 0.0);
    CHECK(curve_y(b.x_end(), kStar) == doctest::Approx(0.0).epsilon(1e-12));
    for (double x : {0.01, 0.05, 0.1, 0.15})
        CHECK(boundary_y(b, x) == doctest::Approx(curve_y(x, kStar)).epsilon(1e-12));
}

TEST_CASE("clipping at the axis") {
    // C would sit below the axis, so the curve runs down to its root.
    const auto b = boundary(kStar, {0.9, 0.9});
    REQUIRE(b.dropped.size() == 1);
    CHECK(b.dropped[0].label == 'C');
    CHECK(b.dropped[0].point.lambda_r < 0.0);
    CHECK(b.vertices.back().point.lambda_r == 0.0);
    CHECK(curve_y(b.x_end(), kStar) == doctest::Approx(0.0).epsilon(1e-12));
    // Here the closed-form minimum picks a different abscissa.
    CHECK(std::abs(std::min(b.terminal_min_first, b.terminal_min_second) - b.x_end()) > 1e-3);
}

TEST_CASE("curve continuity at B and C") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto ch = random_channel(rng);
        const EnergyParams en{0.3 + 0.7 * u(rng), 0.3 + 0.7 * u(rng)};
        if (en.delta_s + en.delta_r < 1.0)
            continue;
        const auto b = boundary(ch, en);
        for (const auto& v : b.vertices)
            if (v.label == 'B' || v.label == 'C')
                CHECK(curve_y(v.point.lambda_s, ch) == doctest::Approx(v.point.lambda_r).epsilon(1e-9));
    }
}

TEST_CASE("both constructions agree when the harvest rates sum to one") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const auto ch = random_channel(rng);
        const double ds = 0.1 + 0.8 * u(rng);
        const EnergyParams en{ds, 1.0 - ds};
        const auto above = boundary_as(ClosureCase::AboveOne, ch, en);
        const auto below = boundary_as(ClosureCase::BelowOne, ch, en);
        CHECK(above.x_end() == doctest::Approx(below.x_end()).epsilon(1e-9));
        for (int k = 0; k <= 20; ++k) {
            const double x = above.x_end() * k / 20.0;
            CHECK(boundary_y(above, x) == doctest::Approx(boundary_y(below, x)).epsilon(1e-9));
        }
    }
}

TEST_CASE("P2 at the reference point") {
    const auto sol = optimize_p2(0.12, kStar, {0.5, 0.6});
    CHECK(sol.branch == OptBranch::Interior);
    CHECK(sol.q_r_star == doctest::Approx(0.5527864045).epsilon(1e-9));
    CHECK(sol.y_star == doctest::Approx(0.1033436854).epsilon(1e-9));
    CHECK(sol.q_s == doctest::Approx(0.12 / ((1.0 - sol.q_r_star) * 0.6)));

    CHECK(optimize_p2(0.05, kStar, {0.5, 0.6}).branch == OptBranch::ClampedAtDelta);
    CHECK(optimize_p2(0.17, kStar, {0.5, 0.6}).branch == OptBranch::SourceLimited);
    CHECK(curve_y(0.15, kStar) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK_THROWS_AS(optimize_p2(0.19, kStar, {0.5, 0.6}), InfeasibleError);
    CHECK_THROWS_AS(optimize_p2(-0.01, kStar, {0.5, 0.6}), InfeasibleError);
}

TEST_CASE("P1 at the reference point") {
    CHECK(optimize_p1(0.0, kStar, {0.5, 0.6}).x_star == doctest::Approx(0.18).epsilon(1e-12));
    const auto mid = optimize_p1(0.1033436854, kStar, {0.5, 0.6});
    CHECK(mid.branch == OptBranch::Interior);
    CHECK(mid.x_star == doctest::Approx(0.12).epsilon(1e-8));
    CHECK(optimize_p1(0.3, kStar, {0.5, 0.6}).branch == OptBranch::RelayLimited);
    CHECK_THROWS_AS(optimize_p1(0.37, kStar, {0.5, 0.6}), InfeasibleError);
    CHECK_THROWS_AS(optimize_p1(-0.1, kStar, {0.5, 0.6}), InfeasibleError);
}

TEST_CASE("optimizers match Brent minimisation and bisection") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto ch = random_channel(rng);
        const EnergyParams en{0.1 + 0.9 * u(rng), 0.1 + 0.9 * u(rng)};
        const auto b = boundary(ch, en);
        const double x = b.x_end() * u(rng);
        CHECK(optimize_p2(x, ch, en).y_star == doctest::Approx(brent_p2(x, ch, en)).epsilon(1e-10));
        const double y = en.delta_r * ch.p_rd * u(rng);
        CHECK(optimize_p1(y, ch, en).x_star == doctest::Approx(bisect_p1(y, ch, en)).epsilon(1e-10));
    }
}

TEST_CASE("P1 and P2 invert each other") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto ch = random_channel(rng);
        const EnergyParams en{0.1 + 0.9 * u(rng), 0.1 + 0.9 * u(rng)};
        const double y = 0.98 * en.delta_r * ch.p_rd * u(rng);
        const auto p1 = optimize_p1(y, ch, en);
        if (p1.x_star <= 0.0)
            continue;
        CHECK(optimize_p2(p1.x_star, ch, en).y_star == doctest::Approx(y).epsilon(1e-9));
    }
}

TEST_CASE("closure contains every stability region") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const auto ch = random_channel(rng);
        const EnergyParams en{u(rng), u(rng)};
        const RegionSpec spec{ch, en, {u(rng), u(rng)}};
        const auto b = boundary(ch, en);
        const RatePoint p{0.5 * u(rng), 0.5 * u(rng)};
        if (outer_contains(p, spec))
            CHECK(contains(p, b));
    }
}

TEST_CASE("membership and distance") {
    const auto b = boundary(kStar, {0.5, 0.6});
    CHECK(contains({0.1, 0.1}, b));
    CHECK_FALSE(contains({0.15, 0.05}, b));
    CHECK(contains({0.15, 0.0499}, b));
    CHECK_FALSE(contains({-0.01, 0.1}, b));
    CHECK(distance_to_boundary({0.15, 0.05}, b) < 1e-9);
    CHECK(distance_to_boundary({0.0, 0.0}, b) > 0.1);
}

TEST_CASE("union oracle agrees away from the boundary") {
    UnionOracleOptions opts;
    opts.grid_n = 60;
    opts.rate_n = 60;
    opts.include_curve_policies = false;
    for (const EnergyParams en : {EnergyParams{0.5, 0.6}, EnergyParams{0.3, 0.4}}) {
        const auto b = boundary(kStar, en);
        const auto grid = union_oracle(kStar, en, opts);
        for (int i = 0; i < grid.rate_n; ++i)
            for (int j = 0; j < grid.rate_n; ++j) {
                const RatePoint p{grid.coord(i), grid.coord(j)};
                if (grid.at(i, j) != contains(p, b))
                    CHECK(distance_to_boundary(p, b) < 0.02);
            }
    }
}

TEST_CASE("boundary csv") {
    const std::string csv = boundary_csv(boundary(kStar, {0.5, 0.6}), 8);
    CHECK(csv.rfind("segment,lambda_s,lambda_r\n", 0) == 0);
    for (const char* row : {"\nA,0,0.36\n", "\nD,"})
        CHECK(csv.find(row) != std::string::npos);
    CHECK(csv.find("\nBC,") != std::string::npos);
}
