#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "gecko/geo.hpp"
#include "gecko/geometry.hpp"

namespace gecko {

/// Volume between two altitudes, bounded laterally by a closed lon/lat
/// polygon. Rings must not cross the antimeridian (pre-split by the caller).
struct PolygonFrustum {
    std::vector<GeoPoint> ring;  // surface vertices; vertex altitudes unused
    double alt_min = 0;
    double alt_max = 0;

    std::vector<Vec2> ring2() const;
};

struct VolumeSpec {
    std::vector<PolygonFrustum> frustums;
};

/// Relative grid size f from the cover heuristic: the target cell area is
/// f times the covered polygon's area. f=0 forces the maximum tree depth.
struct RelativeGridSize {
    double f = 1.0;
};

/// Throws std::invalid_argument when the frustum violates its invariants
/// (ring size, coordinate ranges, self-intersection, antimeridian crossing,
/// inverted altitude range).
void validate_polygon(const EarthModel& m, const PolygonFrustum& s);

/// Area of the surface projection on the authalic sphere [m^2], computed by
/// the shoelace formula in the cylindrical equal-area (lon, sin lat) plane.
/// Throws std::invalid_argument for a zero-area ring.
double polygon_area(const EarthModel& m, const PolygonFrustum& s);

/// Smallest surface tree depth whose cell at the polygon's reference point
/// (first ring vertex) has area at most f times the polygon area; maximum
/// depth when no cell is small enough or f=0.
int grid_depth(const EarthModel& m, const PolygonFrustum& s, RelativeGridSize f);

/// Prefix-free set of surface bit strings whose cells cover the polygon:
/// grid cells at grid_depth found by breadth-first search from the reference
/// cell, then sibling pairs merged into parents until fixpoint.
std::set<BitString> surface_cover(const EarthModel& m, const PolygonFrustum& s,
                                  RelativeGridSize f);

/// Longest common prefix of the altitude encodings of the range's lowest and
/// highest occupied meter cells; covers [alt_min, alt_max).
BitString altitude_range_string(const EarthModel& m, double alt_min, double alt_max);

/// Disjoint node set covering the volume: per frustum the cross product of
/// its surface cover with its single altitude string, with nested pairs
/// reduced to the shallower one.
std::vector<BitStringPair> cover_volume(const EarthModel& m, const VolumeSpec& v,
                                        RelativeGridSize f);

struct AltRange {
    double lo = 0;
    double hi = 0;
};

/// Circumscribed regular 16-gon around the circle, in the local tangent
/// plane. Throws if the polygon would cross the antimeridian.
PolygonFrustum circle_frustum(const EarthModel& m, const GeoPoint& center,
                              double radius_m, std::optional<AltRange> alt);

/// Cover of a query circle; the altitude range defaults to the full shell.
std::vector<BitStringPair> cover_circle(const EarthModel& m, const GeoPoint& center,
                                        double radius_m, std::optional<AltRange> alt,
                                        RelativeGridSize f);

/// Closed-boundary intersection between a node box and a polygon frustum.
bool intersects(const NodeFrustum& n, const PolygonFrustum& s);

/// Closed-boundary intersection between two polygon frustums.
bool frustums_intersect(const PolygonFrustum& a, const PolygonFrustum& b);

}  // namespace gecko
