#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ehrelay/params.hpp"

namespace ehrelay {

enum class ClosureCase {
    AboveOne, // delta_s + delta_r >= 1: line AB, curve BC, line CD
    BelowOne, // delta_s + delta_r < 1: lines EF and FG
};

std::string to_string(ClosureCase c);

// Which of the two expressions inside the x_D (x_G) minimum is smaller.
enum class MinBranch { First, Second, Both };

std::string to_string(MinBranch b);

struct NamedVertex {
    char label = '?';
    RatePoint point;
};

enum class SegmentKind { Line, Curve };

struct ClosureSegment {
    SegmentKind kind = SegmentKind::Line;
    char from = '?';
    char to = '?';
};

// Exact closure of the stability region over all transmit probabilities.
//
// `vertices` is the boundary after clipping at the lambda_s axis, in order
// of increasing lambda_s; `segments[i]` joins vertices[i] and
// vertices[i + 1]. The terminal vertex (D or G) always lies on the axis.
// Vertices that the unclipped construction would place below the axis are
// listed in `dropped` with their raw coordinates.
struct ClosureBoundary {
    ClosureCase closure_case = ClosureCase::AboveOne;
    ChannelParams ch;
    EnergyParams en;
    std::vector<NamedVertex> vertices;
    std::vector<ClosureSegment> segments;
    std::vector<NamedVertex> dropped;

    // The two closed-form candidates for the terminal abscissa and which
    // one the minimum picks. They locate the terminal vertex exactly only
    // when no clipping happened.
    double terminal_min_first = 0.0;
    double terminal_min_second = 0.0;
    MinBranch terminal_branch = MinBranch::Both;

    const NamedVertex* find(char label) const;
    // Abscissa where the region ends (the terminal vertex).
    double x_end() const;
};

// Result of maximising one coordinate of the closure for a fixed value of
// the other.
enum class OptBranch {
    Interior,       // stationary point of the concave objective
    ClampedAtDelta, // the optimised probability sits at its harvest rate
    ClampedAtZero,  // the optimised probability is zero
    SourceLimited,  // P2: q_r bound by x < delta_s (1 - q_r) alpha
    RelayLimited,   // P1: q_s bound by the relay constraint at q_r = delta_r
};

std::string to_string(OptBranch b);

struct P2Solution {
    double q_r_star = 0.0;
    double y_star = 0.0;
    // Source probability that attains the optimum (q_s = x / ((1 - q_r) alpha)).
    double q_s = 0.0;
    OptBranch branch = OptBranch::Interior;
};

struct P1Solution {
    double q_s_star = 0.0;
    double x_star = 0.0;
    double q_r = 0.0;
    OptBranch branch = OptBranch::Interior;
};

// Largest relay rate y such that (x, y) is on the closure boundary, with
// the maximising q_r. Throws InfeasibleError when the best y is negative
// or x lies outside [0, alpha].
P2Solution optimize_p2(double x, const ChannelParams& ch, const EnergyParams& en);

// Largest source rate x for relay rate y. Throws InfeasibleError when y
// exceeds delta_r p_rd or is negative.
P1Solution optimize_p1(double y, const ChannelParams& ch, const EnergyParams& en);

// Explicit lambda_r on the curve
//   sqrt(x/alpha) + sqrt((1-p_sd) p_sr x / (p_rd alpha) + y / p_rd) = 1,
// i.e. p_rd (1 - sqrt(x/alpha))^2 - (1-p_sd) p_sr x / alpha. May be negative.
double curve_y(double x, const ChannelParams& ch);

ClosureBoundary boundary(const ChannelParams& ch, const EnergyParams& en);

// Build the boundary with a forced case construction. Used to compare the
// two constructions at delta_s + delta_r == 1.
ClosureBoundary boundary_as(ClosureCase forced, const ChannelParams& ch, const EnergyParams& en);

// Boundary ordinate at abscissa x; zero beyond x_end().
double boundary_y(const ClosureBoundary& b, double x);

// Strictly below the boundary.
bool contains(const RatePoint& p, const ClosureBoundary& b);
bool contains(const RatePoint& p, const ChannelParams& ch, const EnergyParams& en);

// Dense sampling of the boundary: exact vertices plus `curve_samples`
// interior points on the curve segment.
struct BoundarySample {
    std::string segment; // vertex label ("A") or segment name ("BC")
    RatePoint point;
};
std::vector<BoundarySample> sample_boundary(const ClosureBoundary& b, int curve_samples = 512);

// CSV with header `segment,lambda_s,lambda_r`.
std::string boundary_csv(const ClosureBoundary& b, int curve_samples = 512);

// Brute-force closure: union of outer bounds over a policy grid.
enum class PolicyDomain {
    Clamped, // [0, delta_s] x [0, delta_r]
    Full,    // [0, 1]^2
};

struct UnionOracleOptions {
    int grid_n = 200;          // policy grid points per axis
    int rate_n = 200;          // rate grid points per axis over [0, 1]
    PolicyDomain domain = PolicyDomain::Clamped;
    bool include_curve_policies = true; // add q_r = 1 - sqrt(x/alpha) per column
    unsigned threads = 0;               // 0: hardware concurrency
};

struct MembershipGrid {
    int rate_n = 0;
    // inside[i * rate_n + j] for lambda_s = i / (rate_n - 1), lambda_r = j / (rate_n - 1)
    std::vector<unsigned char> inside;

    double coord(int k) const { return static_cast<double>(k) / (rate_n - 1); }
    bool at(int i, int j) const { return inside[static_cast<std::size_t>(i) * rate_n + j] != 0; }
};

MembershipGrid union_oracle(const ChannelParams& ch, const EnergyParams& en,
                            const UnionOracleOptions& opts = {});

// Euclidean distance from p to the closure boundary curve (A..D or E..G).
double distance_to_boundary(const RatePoint& p, const ClosureBoundary& b);

} // namespace ehrelay
