#pragma once

#include <vector>

namespace gecko {

/// Planar lon/lat point in degrees.
struct Vec2 {
    double x = 0;
    double y = 0;
};

/// Closed point-in-polygon test (boundary counts as inside). Ray casting with
/// an explicit on-edge check.
bool point_in_ring(const Vec2& p, const std::vector<Vec2>& ring);

/// Segment intersection with closed endpoints.
bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2);

/// True if the ring has a proper self-intersection (non-adjacent edges cross).
bool ring_self_intersects(const std::vector<Vec2>& ring);

/// Signed planar shoelace area in degree^2 (positive for counter-clockwise).
double ring_signed_area(const std::vector<Vec2>& ring);

struct Rect2 {
    double x_lo = 0, x_hi = 0;
    double y_lo = 0, y_hi = 0;
};

/// Closed rectangle/polygon intersection (boundary touch counts).
bool ring_intersects_rect(const std::vector<Vec2>& ring, const Rect2& r);

/// Closed polygon/polygon intersection (boundary touch counts).
bool rings_intersect(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

/// Area of the ring clipped to the rectangle, in degree^2. Used to decide
/// whether a grid cell overlaps a polygon in more than a shared boundary.
double ring_clip_rect_area(const std::vector<Vec2>& ring, const Rect2& r);

}  // namespace gecko
