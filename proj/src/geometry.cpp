#include "gecko/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace gecko {

namespace {
double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    if (std::abs(cross(a, b, p)) > 1e-12 * (std::abs(b.x - a.x) + std::abs(b.y - a.y) + 1.0))
        return false;
    return p.x >= std::min(a.x, b.x) - 1e-15 && p.x <= std::max(a.x, b.x) + 1e-15 &&
           p.y >= std::min(a.y, b.y) - 1e-15 && p.y <= std::max(a.y, b.y) + 1e-15;
}
}  // namespace

bool point_in_ring(const Vec2& p, const std::vector<Vec2>& ring) {
    size_t n = ring.size();
    bool inside = false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % n];
        if (on_segment(p, a, b)) return true;
        if ((a.y > p.y) != (b.y > p.y)) {
            double t = (p.y - a.y) / (b.y - a.y);
            if (p.x < a.x + t * (b.x - a.x)) inside = !inside;
        }
    }
    return inside;
}

bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2) {
    double d1 = cross(b1, b2, a1);
    double d2 = cross(b1, b2, a2);
    double d3 = cross(a1, a2, b1);
    double d4 = cross(a1, a2, b2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    return on_segment(a1, b1, b2) || on_segment(a2, b1, b2) || on_segment(b1, a1, a2) ||
           on_segment(b2, a1, a2);
}

bool ring_self_intersects(const std::vector<Vec2>& ring) {
    size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            // Skip adjacent edges (they share an endpoint).
            if ((j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]))
                return true;
        }
    }
    return false;
}

double ring_signed_area(const std::vector<Vec2>& ring) {
    double acc = 0;
    size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return acc / 2.0;
}

bool ring_intersects_rect(const std::vector<Vec2>& ring, const Rect2& r) {
    for (const Vec2& v : ring) {
        if (v.x >= r.x_lo && v.x <= r.x_hi && v.y >= r.y_lo && v.y <= r.y_hi) return true;
    }
    std::vector<Vec2> corners{{r.x_lo, r.y_lo}, {r.x_hi, r.y_lo}, {r.x_hi, r.y_hi},
                              {r.x_lo, r.y_hi}};
    for (const Vec2& c : corners) {
        if (point_in_ring(c, ring)) return true;
    }
    size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < 4; ++j) {
            if (segments_intersect(ring[i], ring[(i + 1) % n], corners[j],
                                   corners[(j + 1) % 4])) {
                return true;
            }
        }
    }
    return false;
}

bool rings_intersect(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    for (const Vec2& v : a) {
        if (point_in_ring(v, b)) return true;
    }
    for (const Vec2& v : b) {
        if (point_in_ring(v, a)) return true;
    }
    for (size_t i = 0; i < a.size(); ++i) {
        for (size_t j = 0; j < b.size(); ++j) {
            if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j],
                                   b[(j + 1) % b.size()])) {
                return true;
            }
        }
    }
    return false;
}

double ring_clip_rect_area(const std::vector<Vec2>& ring, const Rect2& r) {
    // Sutherland-Hodgman clip against the four rectangle half-planes.
    std::vector<Vec2> poly = ring;
    auto clip = [&](auto inside, auto intersect) {
        std::vector<Vec2> out;
        size_t n = poly.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& cur = poly[i];
            const Vec2& nxt = poly[(i + 1) % n];
            bool cin = inside(cur);
            bool nin = inside(nxt);
            if (cin) out.push_back(cur);
            if (cin != nin) out.push_back(intersect(cur, nxt));
        }
        poly = std::move(out);
    };
    auto lerp_x = [](const Vec2& a, const Vec2& b, double x) {
        double t = (x - a.x) / (b.x - a.x);
        return Vec2{x, a.y + t * (b.y - a.y)};
    };
    auto lerp_y = [](const Vec2& a, const Vec2& b, double y) {
        double t = (y - a.y) / (b.y - a.y);
        return Vec2{a.x + t * (b.x - a.x), y};
    };
    clip([&](const Vec2& p) { return p.x >= r.x_lo; },
         [&](const Vec2& a, const Vec2& b) { return lerp_x(a, b, r.x_lo); });
    if (poly.empty()) return 0;
    clip([&](const Vec2& p) { return p.x <= r.x_hi; },
         [&](const Vec2& a, const Vec2& b) { return lerp_x(a, b, r.x_hi); });
    if (poly.empty()) return 0;
    clip([&](const Vec2& p) { return p.y >= r.y_lo; },
         [&](const Vec2& a, const Vec2& b) { return lerp_y(a, b, r.y_lo); });
    if (poly.empty()) return 0;
    clip([&](const Vec2& p) { return p.y <= r.y_hi; },
         [&](const Vec2& a, const Vec2& b) { return lerp_y(a, b, r.y_hi); });
    if (poly.size() < 3) return 0;
    return std::abs(ring_signed_area(poly));
}

}  // namespace gecko
