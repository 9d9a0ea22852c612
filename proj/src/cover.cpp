#include "gecko/cover.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_set>

namespace gecko {

namespace {
constexpr size_t kMaxCoverCells = size_t{1} << 20;

double shoelace_m2(const EarthModel& m, const std::vector<Vec2>& ring) {
    // Shoelace in the (lon [rad], sin lat) cylindrical equal-area plane.
    double r = m.authalic_radius();
    double acc = 0;
    size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % n];
        double ax = a.x * M_PI / 180.0, bx = b.x * M_PI / 180.0;
        double ay = std::sin(a.y * M_PI / 180.0), by = std::sin(b.y * M_PI / 180.0);
        acc += ax * by - bx * ay;
    }
    return std::abs(acc) / 2.0 * r * r;
}
}  // namespace

std::vector<Vec2> PolygonFrustum::ring2() const {
    std::vector<Vec2> out;
    out.reserve(ring.size());
    for (const GeoPoint& p : ring) out.push_back({p.lon, p.lat});
    return out;
}

void validate_polygon(const EarthModel& m, const PolygonFrustum& s) {
    if (s.ring.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
    double lon_lo = 181, lon_hi = -181;
    for (const GeoPoint& p : s.ring) {
        if (p.lon < -180 || p.lon > 180) throw std::invalid_argument("vertex longitude out of range");
        if (p.lat < -90 || p.lat > 90) throw std::invalid_argument("vertex latitude out of range");
        lon_lo = std::min(lon_lo, p.lon);
        lon_hi = std::max(lon_hi, p.lon);
    }
    if (lon_hi - lon_lo > 180.0) {
        throw std::invalid_argument(
            "polygon spans more than 180 degrees of longitude; split it at the antimeridian");
    }
    if (!(s.alt_min < s.alt_max)) throw std::invalid_argument("altitude range inverted or empty");
    if (s.alt_min < m.min_altitude || s.alt_max > m.max_altitude() + 1.0) {
        throw std::invalid_argument("altitude range outside the model shell");
    }
    if (ring_self_intersects(s.ring2())) {
        throw std::invalid_argument("polygon ring is self-intersecting");
    }
}

double polygon_area(const EarthModel& m, const PolygonFrustum& s) {
    validate_polygon(m, s);
    // Degeneracy is judged in the degree plane where the edges are straight.
    if (ring_signed_area(s.ring2()) == 0.0) {
        throw std::invalid_argument("degenerate zero-area polygon");
    }
    return shoelace_m2(m, s.ring2());
}

int grid_depth(const EarthModel& m, const PolygonFrustum& s, RelativeGridSize f) {
    if (f.f < 0) throw std::invalid_argument("relative grid size must be non-negative");
    int max_depth = m.surface_height();
    double target = f.f * shoelace_m2(m, s.ring2());
    if (target <= 0) return max_depth;
    // Tolerance absorbs rounding when the polygon is exactly cell-aligned.
    target *= 1.0 + 1e-12;
    BitString ref = point_pair(m, s.ring.front()).surface;
    for (int d = 0; d <= max_depth; ++d) {
        if (cell_area(m, {ref.prefix(d), BitString()}) <= target) return d;
    }
    return max_depth;
}

namespace {
struct CellGrid {
    int nx, ny;  // bits per axis at this depth
    uint64_t cols, rows;

    Rect2 rect(uint64_t ix, uint64_t iy) const {
        Rect2 r;
        r.x_lo = static_cast<double>(ix) / static_cast<double>(cols) * 360.0 - 180.0;
        r.x_hi = static_cast<double>(ix + 1) / static_cast<double>(cols) * 360.0 - 180.0;
        r.y_lo = static_cast<double>(iy) / static_cast<double>(rows) * 180.0 - 90.0;
        r.y_hi = static_cast<double>(iy + 1) / static_cast<double>(rows) * 180.0 - 90.0;
        return r;
    }
};
}  // namespace

std::set<BitString> surface_cover(const EarthModel& m, const PolygonFrustum& s,
                                  RelativeGridSize f) {
    validate_polygon(m, s);
    std::vector<Vec2> ring = s.ring2();
    if (ring_signed_area(ring) == 0.0) {
        throw std::invalid_argument("degenerate zero-area polygon");
    }

    int d = grid_depth(m, s, f);
    if (d == 0) return {BitString()};

    CellGrid g;
    g.nx = (d + 1) / 2;
    g.ny = d / 2;
    g.cols = uint64_t{1} << g.nx;
    g.rows = uint64_t{1} << g.ny;

    DiscretePoint ref = discretize(m, s.ring.front());
    uint64_t ix0 = ref.x >> (m.lon_bits - g.nx);
    uint64_t iy0 = ref.y >> (m.lat_bits - g.ny);

    // BFS expands through every cell whose closed rectangle touches the
    // polygon (keeps the frontier connected across degenerate grid-aligned
    // edges); a cell joins the cover only when the overlap has positive area.
    auto key = [](uint64_t ix, uint64_t iy) { return ix << 32 | iy; };
    std::unordered_set<uint64_t> seen;
    std::deque<std::pair<uint64_t, uint64_t>> queue;
    std::set<BitString> cover;
    seen.insert(key(ix0, iy0));
    queue.push_back({ix0, iy0});

    while (!queue.empty()) {
        auto [ix, iy] = queue.front();
        queue.pop_front();
        Rect2 r = g.rect(ix, iy);
        if (!ring_intersects_rect(ring, r)) continue;
        double cell_deg2 = (r.x_hi - r.x_lo) * (r.y_hi - r.y_lo);
        if (ring_clip_rect_area(ring, r) > 1e-9 * cell_deg2) {
            cover.insert(interleave_bits(ix, iy, g.nx, g.ny));
            if (cover.size() > kMaxCoverCells) {
                throw std::runtime_error("surface cover exceeds the cell limit");
            }
        }
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                if (dx == 0 && dy == 0) continue;
                int64_t jx = static_cast<int64_t>(ix) + dx;
                int64_t jy = static_cast<int64_t>(iy) + dy;
                if (jx < 0 || jy < 0 || jx >= static_cast<int64_t>(g.cols) ||
                    jy >= static_cast<int64_t>(g.rows)) {
                    continue;
                }
                uint64_t k = key(static_cast<uint64_t>(jx), static_cast<uint64_t>(jy));
                if (seen.insert(k).second) {
                    queue.push_back({static_cast<uint64_t>(jx), static_cast<uint64_t>(jy)});
                }
            }
        }
    }

    // The reference vertex's own cell keeps the cover non-empty for slivers
    // thinner than the area threshold.
    if (cover.empty()) cover.insert(interleave_bits(ix0, iy0, g.nx, g.ny));

    // Merge sibling cells into their parent until no pair remains.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const BitString& c : cover) {
            if (c.empty()) continue;
            BitString sibling = c.parent().append(1 - c.last_bit());
            if (cover.count(sibling)) {
                BitString parent = c.parent();
                cover.erase(c);
                cover.erase(sibling);
                cover.insert(parent);
                changed = true;
                break;
            }
        }
    }
    return cover;
}

BitString altitude_range_string(const EarthModel& m, double alt_min, double alt_max) {
    if (!(alt_min < alt_max)) throw std::invalid_argument("altitude range inverted or empty");
    if (alt_min < m.min_altitude || alt_max > m.max_altitude() + 1.0) {
        throw std::out_of_range("altitude range outside the model shell");
    }
    uint64_t z_lo = static_cast<uint64_t>(std::floor(alt_min - m.min_altitude));
    // Highest meter cell containing points below alt_max.
    double upper = std::ceil(alt_max - m.min_altitude) - 1.0;
    uint64_t z_hi = static_cast<uint64_t>(std::max(upper, static_cast<double>(z_lo)));
    z_hi = std::min<uint64_t>(z_hi, m.max_alt());
    z_lo = std::min<uint64_t>(z_lo, m.max_alt());
    return common_prefix(BitString(z_lo, m.alt_bits), BitString(z_hi, m.alt_bits));
}

std::vector<BitStringPair> cover_volume(const EarthModel& m, const VolumeSpec& v,
                                        RelativeGridSize f) {
    if (v.frustums.empty()) throw std::invalid_argument("empty volume spec");
    std::set<BitStringPair> pairs;
    for (const PolygonFrustum& s : v.frustums) {
        BitString alt = altitude_range_string(m, s.alt_min, s.alt_max);
        for (const BitString& surf : surface_cover(m, s, f)) {
            pairs.insert({surf, alt});
        }
    }
    // Drop pairs whose volume is nested inside another pair's volume.
    std::vector<BitStringPair> out;
    for (const BitStringPair& b : pairs) {
        bool nested = false;
        for (const BitStringPair& a : pairs) {
            if (!(a == b) && pair_volume_contains(a, b)) {
                nested = true;
                break;
            }
        }
        if (!nested) out.push_back(b);
    }
    return out;
}

PolygonFrustum circle_frustum(const EarthModel& m, const GeoPoint& center,
                              double radius_m, std::optional<AltRange> alt) {
    if (!(radius_m > 0)) throw std::invalid_argument("radius must be positive");
    constexpr int kSides = 16;
    double circum = radius_m / std::cos(M_PI / kSides);
    double r = m.authalic_radius();
    double coslat = std::max(std::cos(center.lat * M_PI / 180.0), 1e-9);
    PolygonFrustum out;
    for (int k = 0; k < kSides; ++k) {
        double ang = 2.0 * M_PI * k / kSides;
        double east = circum * std::cos(ang);
        double north = circum * std::sin(ang);
        double lat = center.lat + north / r * 180.0 / M_PI;
        double lon = center.lon + east / (r * coslat) * 180.0 / M_PI;
        if (lon < -180.0 || lon > 180.0) {
            throw std::invalid_argument("query circle crosses the antimeridian; split the query");
        }
        lat = std::clamp(lat, -90.0, 90.0);
        out.ring.push_back({lon, lat, 0});
    }
    if (alt) {
        out.alt_min = alt->lo;
        out.alt_max = alt->hi;
    } else {
        out.alt_min = m.min_altitude;
        out.alt_max = m.max_altitude() + 1.0;
    }
    return out;
}

std::vector<BitStringPair> cover_circle(const EarthModel& m, const GeoPoint& center,
                                        double radius_m, std::optional<AltRange> alt,
                                        RelativeGridSize f) {
    VolumeSpec v;
    v.frustums.push_back(circle_frustum(m, center, radius_m, alt));
    return cover_volume(m, v, f);
}

bool intersects(const NodeFrustum& n, const PolygonFrustum& s) {
    if (n.alt_lo > s.alt_max || s.alt_min > n.alt_hi) return false;
    return ring_intersects_rect(s.ring2(), {n.lon_lo, n.lon_hi, n.lat_lo, n.lat_hi});
}

bool frustums_intersect(const PolygonFrustum& a, const PolygonFrustum& b) {
    if (a.alt_min > b.alt_max || b.alt_min > a.alt_max) return false;
    return rings_intersect(a.ring2(), b.ring2());
}

}  // namespace gecko
