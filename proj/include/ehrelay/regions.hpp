#pragma once

#include <string>
#include <vector>

#include "ehrelay/params.hpp"

namespace ehrelay {

// The tuple defining the stability region at a fixed transmit-probability
// vector.
struct RegionSpec {
    ChannelParams ch;
    EnergyParams en;
    AccessPolicy pol;
};

// Boundary of a downward-closed region in the (lambda_s, lambda_r) plane.
// segment_tags[i] names the constraint active on the segment from
// vertices[i] to vertices[i + 1]. Vertical drops appear as two vertices
// with the same lambda_s.
struct BoundaryPolyline {
    std::vector<RatePoint> vertices;
    std::vector<std::string> segment_tags;

    bool empty() const { return vertices.empty(); }
};

// Sufficient conditions (saturated analysis). Strict inequalities.
bool inner_contains(const RatePoint& p, const RegionSpec& spec);

// Necessary conditions from the source-dominant system. Throws
// DegenerateRegionError when min(delta_s, q_s) == 1.
bool r1_contains(const RatePoint& p, const RegionSpec& spec);

// Necessary conditions from the relay-dominant system. Throws
// DegenerateRegionError when min(delta_r, q_r) == 1 or alpha == 0.
bool r2_contains(const RatePoint& p, const RegionSpec& spec);

// r1 OR r2; a degenerate sub-region counts as empty.
bool outer_contains(const RatePoint& p, const RegionSpec& spec);

// Precomputed form of outer_contains for evaluating many points against
// one policy.
class OuterBound {
public:
    explicit OuterBound(const RegionSpec& spec);
    bool contains(const RatePoint& p) const noexcept;
    bool r1_empty() const noexcept { return !r1_valid_; }
    bool r2_empty() const noexcept { return !r2_valid_; }

private:
    bool r1_valid_ = false;
    bool r2_valid_ = false;
    double relay_share_ = 0.0;
    double r1_coef_s_ = 0.0, r1_coef_r_ = 0.0, r1_rhs_ = 0.0, r1_relay_rhs_ = 0.0;
    double r2_coef_s_ = 0.0, r2_rhs_ = 0.0, r2_source_rhs_ = 0.0;
};

BoundaryPolyline inner_boundary(const RegionSpec& spec);
BoundaryPolyline r1_boundary(const RegionSpec& spec);
BoundaryPolyline r2_boundary(const RegionSpec& spec);
// Upper envelope of the R1 and R2 boundaries.
BoundaryPolyline outer_boundary(const RegionSpec& spec);

// Height of the polyline at abscissa x, approached from the left (the
// region is open, so a vertical drop at x is attributed to its top).
// Zero outside the polyline's extent.
double polyline_height(const BoundaryPolyline& poly, double x);

// CSV with header `lambda_s,lambda_r,active_constraint`; the tag on each
// row is the constraint of the segment ending at that vertex ("start" for
// the first vertex).
std::string polyline_csv(const BoundaryPolyline& poly);

} // namespace ehrelay
