#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gecko/cover.hpp"

using namespace gecko;

namespace {
const EarthModel kModel = EarthModel::wgs84();

BitString bs(const char* s) { return *BitString::parse(s); }

PolygonFrustum rect_frustum(double lon_lo, double lon_hi, double lat_lo, double lat_hi,
                            double alt_min, double alt_max) {
    PolygonFrustum s;
    s.ring = {{lon_lo, lat_lo, 0}, {lon_hi, lat_lo, 0}, {lon_hi, lat_hi, 0},
              {lon_lo, lat_hi, 0}};
    s.alt_min = alt_min;
    s.alt_max = alt_max;
    return s;
}

PolygonFrustum node_rect(const BitStringPair& n) {
    NodeFrustum v = node_volume(kModel, n);
    return rect_frustum(v.lon_lo, v.lon_hi, v.lat_lo, v.lat_hi, v.alt_lo, v.alt_hi);
}

// Independent sibling-merge used to cross-check the library's merging.
std::set<BitString> merge_once(std::set<BitString> cells) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const BitString& c : cells) {
            if (c.empty()) continue;
            BitString sib = c.parent().append(1 - c.last_bit());
            if (cells.count(sib)) {
                BitString parent = c.parent();
                cells.erase(c);
                cells.erase(sib);
                cells.insert(parent);
                changed = true;
                break;
            }
        }
    }
    return cells;
}

// Brute-force cover oracle: every depth-d cell overlapping the polygon in
// positive area, merged. No BFS, no reference point.
std::set<BitString> brute_force_cover(const PolygonFrustum& s, int depth) {
    std::set<BitString> cells;
    int nx = (depth + 1) / 2;
    int ny = depth / 2;
    uint64_t cols = uint64_t{1} << nx;
    uint64_t rows = uint64_t{1} << ny;
    auto ring = s.ring2();
    for (uint64_t ix = 0; ix < cols; ++ix) {
        for (uint64_t iy = 0; iy < rows; ++iy) {
            Rect2 r;
            r.x_lo = double(ix) / double(cols) * 360.0 - 180.0;
            r.x_hi = double(ix + 1) / double(cols) * 360.0 - 180.0;
            r.y_lo = double(iy) / double(rows) * 180.0 - 90.0;
            r.y_hi = double(iy + 1) / double(rows) * 180.0 - 90.0;
            double cell_deg2 = (r.x_hi - r.x_lo) * (r.y_hi - r.y_lo);
            if (ring_clip_rect_area(ring, r) > 1e-9 * cell_deg2) {
                cells.insert(interleave_bits(ix, iy, nx, ny));
            }
        }
    }
    return merge_once(std::move(cells));
}

std::vector<GeoPoint> sample_interior(const PolygonFrustum& s, int count, uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto ring = s.ring2();
    double xlo = 1e9, xhi = -1e9, ylo = 1e9, yhi = -1e9;
    for (auto& v : ring) {
        xlo = std::min(xlo, v.x);
        xhi = std::max(xhi, v.x);
        ylo = std::min(ylo, v.y);
        yhi = std::max(yhi, v.y);
    }
    std::uniform_real_distribution<double> ux(xlo, xhi), uy(ylo, yhi),
        uz(s.alt_min, s.alt_max);
    std::vector<GeoPoint> out;
    int guard = 0;
    while (static_cast<int>(out.size()) < count && ++guard < count * 1000) {
        Vec2 p{ux(rng), uy(rng)};
        if (point_in_ring(p, ring)) out.push_back({p.x, p.y, uz(rng)});
    }
    return out;
}

bool covered(const std::vector<BitStringPair>& cover, const GeoPoint& p) {
    for (const auto& pr : cover) {
        if (node_volume(kModel, pr).contains(p)) return true;
    }
    return false;
}

PolygonFrustum random_polygon(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ulon(-170, 170), ulat(-65, 65);
    std::uniform_real_distribution<double> uradius(50, 50000), ujit(0.6, 1.4);
    std::uniform_int_distribution<int> unverts(5, 11);
    std::uniform_real_distribution<double> ualt(-10000, 20000);
    double clat = ulat(rng), clon = ulon(rng);
    double radius = uradius(rng);
    int nv = unverts(rng);
    double r_earth = kModel.authalic_radius();
    double coslat = std::cos(clat * M_PI / 180.0);
    PolygonFrustum s;
    for (int i = 0; i < nv; ++i) {
        double ang = 2.0 * M_PI * i / nv;
        double rr = radius * ujit(rng);
        double lat = clat + rr * std::sin(ang) / r_earth * 180.0 / M_PI;
        double lon = clon + rr * std::cos(ang) / (r_earth * coslat) * 180.0 / M_PI;
        s.ring.push_back({lon, lat, 0});
    }
    double a = ualt(rng);
    double b = ualt(rng);
    s.alt_min = std::min(a, b);
    s.alt_max = std::max(a, b) + 1.0;
    return s;
}
}  // namespace

TEST_CASE("polygon area") {
    double r = kModel.authalic_radius();
    auto quarter = node_rect({bs("00"), {}});
    CHECK(polygon_area(kModel, quarter) == doctest::Approx(M_PI * r * r));

    auto degree_sq = rect_frustum(-0.5, 0.5, -0.5, 0.5, 0, 10);
    double expect = r * r * (M_PI / 180.0) *
                    (std::sin(0.5 * M_PI / 180) - std::sin(-0.5 * M_PI / 180));
    CHECK(polygon_area(kModel, degree_sq) == doctest::Approx(expect));
    CHECK(polygon_area(kModel, degree_sq) == doctest::Approx(1.236e10).epsilon(0.01));

    auto reversed = degree_sq;
    std::reverse(reversed.ring.begin(), reversed.ring.end());
    CHECK(polygon_area(kModel, reversed) == doctest::Approx(polygon_area(kModel, degree_sq)));

    PolygonFrustum degenerate;
    degenerate.ring = {{0, 0, 0}, {1, 1, 0}, {2, 2, 0}};
    degenerate.alt_min = 0;
    degenerate.alt_max = 1;
    CHECK_THROWS_AS(polygon_area(kModel, degenerate), std::invalid_argument);
}

TEST_CASE("polygon validation") {
    auto ok = rect_frustum(0, 1, 0, 1, 0, 10);
    CHECK_NOTHROW(validate_polygon(kModel, ok));

    auto crossing = rect_frustum(-179, 179, 0, 1, 0, 10);
    CHECK_THROWS_WITH_AS(validate_polygon(kModel, crossing),
                         doctest::Contains("antimeridian"), std::invalid_argument);

    PolygonFrustum bowtie;
    bowtie.ring = {{0, 0, 0}, {2, 2, 0}, {2, 0, 0}, {0, 2, 0}};
    bowtie.alt_min = 0;
    bowtie.alt_max = 1;
    CHECK_THROWS_AS(validate_polygon(kModel, bowtie), std::invalid_argument);

    auto inverted = rect_frustum(0, 1, 0, 1, 10, 0);
    CHECK_THROWS_AS(validate_polygon(kModel, inverted), std::invalid_argument);
}

TEST_CASE("grid depth") {
    auto quarter = node_rect({bs("00"), {}});
    // Exhaustive scan oracle: first depth whose reference cell fits the target
    // (up to rounding, since the quarter is exactly cell-aligned).
    double target = polygon_area(kModel, quarter) * (1.0 + 1e-12);
    BitString ref = point_pair(kModel, quarter.ring.front()).surface;
    int expected = 51;
    for (int d = 0; d <= 51; ++d) {
        if (cell_area(kModel, {ref.prefix(d), {}}) <= target) {
            expected = d;
            break;
        }
    }
    CHECK(expected == 2);
    CHECK(grid_depth(kModel, quarter, {1.0}) == 2);

    CHECK(grid_depth(kModel, quarter, {0.0}) == 51);

    PolygonFrustum sphere = rect_frustum(-180, 180, -90, 90, 0, 10);
    CHECK(grid_depth(kModel, sphere, {1.0}) == 0);
}

TEST_CASE("surface cover: aligned rectangle collapses to its node") {
    auto aligned = node_rect({bs("0110"), {}});
    auto cover = surface_cover(kModel, aligned, {1.0});
    REQUIRE(cover.size() == 1);
    CHECK(*cover.begin() == bs("0110"));

    // Oracle: all depth-6 cells with positive overlap, merged pairwise.
    CHECK(brute_force_cover(aligned, 6) == std::set<BitString>{bs("0110")});
}

TEST_CASE("surface cover: point-like polygon maps to one max-depth cell") {
    // A ~0.1 m triangle well inside one depth-51 cell.
    GeoPoint c{8.54182, 47.37691, 0};
    auto cell = point_pair(kModel, c);
    NodeFrustum v = node_volume(kModel, cell);
    double lon_mid = (v.lon_lo + v.lon_hi) / 2;
    double lat_mid = (v.lat_lo + v.lat_hi) / 2;
    double dl = (v.lon_hi - v.lon_lo) * 0.05;
    PolygonFrustum tiny;
    tiny.ring = {{lon_mid, lat_mid, 0},
                 {lon_mid + dl, lat_mid, 0},
                 {lon_mid, lat_mid + dl, 0}};
    tiny.alt_min = 0;
    tiny.alt_max = 3;
    auto cover = surface_cover(kModel, tiny, {1.0});
    REQUIRE(cover.size() == 1);
    CHECK(cover.begin()->size() == 51);
    CHECK(*cover.begin() == cell.surface);
}

TEST_CASE("surface cover: prime meridian polygon splits, never the root") {
    auto s = rect_frustum(-1, 1, 40, 42, 0, 10);
    auto cover = surface_cover(kModel, s, {1.0});
    CHECK(cover.size() >= 2);
    for (const BitString& c : cover) {
        CHECK(!c.empty());
    }
    bool west = false, east = false;
    for (const BitString& c : cover) {
        (c.bit(0) == 0 ? west : east) = true;
    }
    CHECK(west);
    CHECK(east);
}

TEST_CASE("surface cover matches brute force on random polygons") {
    std::mt19937_64 rng(2024);
    int checked = 0;
    while (checked < 25) {
        PolygonFrustum s = random_polygon(rng);
        try {
            validate_polygon(kModel, s);
        } catch (const std::invalid_argument&) {
            continue;
        }
        int d = grid_depth(kModel, s, {1.0});
        if (d > 16) continue;  // keep the exhaustive oracle tractable
        auto got = surface_cover(kModel, s, {1.0});
        auto want = brute_force_cover(s, d);
        if (want.empty()) continue;
        CHECK(got == want);
        ++checked;
    }
    CHECK(checked == 25);
}

TEST_CASE("altitude range strings") {
    EarthModel m = kModel;
    // One-meter range stays inside a single meter cell.
    auto full = altitude_range_string(m, 42, 43);
    CHECK(full.size() == 15);
    CHECK(full == BitString(11042, 15));

    CHECK(altitude_range_string(m, 5383, 5385) == BitString());

    CHECK(altitude_range_string(m, 0, 100) == bs("010101"));

    CHECK_THROWS_AS(altitude_range_string(m, 100, 100), std::invalid_argument);
    CHECK_THROWS_AS(altitude_range_string(m, 100, 50), std::invalid_argument);

    // Slab coverage: the covering node contains the requested range.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(-11000, 21767);
    for (int i = 0; i < 500; ++i) {
        double a = ua(rng), b = ua(rng);
        if (a > b) std::swap(a, b);
        b += 0.5;
        BitString alt = altitude_range_string(m, a, b);
        NodeFrustum v = node_volume(m, {BitString(), alt});
        CHECK(v.alt_lo <= a);
        CHECK(v.alt_hi >= b);
    }
}

TEST_CASE("cover_volume: node-aligned frustum covers with exactly that node") {
    auto v101 = node_rect({bs("10"), bs("1")});
    auto cover = cover_volume(kModel, {{v101}}, {1.0});
    REQUIRE(cover.size() == 1);
    CHECK(cover[0] == BitStringPair{bs("10"), bs("1")});

    // Geometric oracle: that node alone contains every sampled point.
    for (const GeoPoint& p : sample_interior(v101, 500, 99)) {
        CHECK(node_volume(kModel, cover[0]).contains(p));
    }
}

TEST_CASE("cover_volume: disjoint frustums contribute independent pairs") {
    auto a = rect_frustum(10, 10.001, 50, 50.001, 0, 10);
    auto b = rect_frustum(-60, -59.999, -20, -19.999, 100, 120);
    auto ca = cover_volume(kModel, {{a}}, {1.0});
    auto cb = cover_volume(kModel, {{b}}, {1.0});
    auto both = cover_volume(kModel, {{a, b}}, {1.0});
    CHECK(both.size() == ca.size() + cb.size());
}

TEST_CASE("cover_volume: coverage, disjointness and intersection properties") {
    std::mt19937_64 rng(31337);
    for (double f : {0.1, 1.0, 10.0}) {
        int done = 0;
        while (done < 8) {
            PolygonFrustum s = random_polygon(rng);
            try {
                validate_polygon(kModel, s);
            } catch (const std::invalid_argument&) {
                continue;
            }
            VolumeSpec v{{s}};
            auto cover = cover_volume(kModel, v, {f});
            REQUIRE(!cover.empty());

            for (const GeoPoint& p : sample_interior(s, 1500, rng())) {
                REQUIRE(covered(cover, p));
            }

            // Pairwise non-nested volumes.
            for (size_t i = 0; i < cover.size(); ++i) {
                for (size_t j = 0; j < cover.size(); ++j) {
                    if (i != j) CHECK(!pair_volume_contains(cover[i], cover[j]));
                }
            }

            // Every returned pair really intersects the volume.
            for (const auto& pr : cover) {
                CHECK(intersects(node_volume(kModel, pr), s));
            }
            ++done;
        }
    }
}

TEST_CASE("cover_volume: merged surface cover is a fixpoint") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 10; ++i) {
        PolygonFrustum s = random_polygon(rng);
        try {
            validate_polygon(kModel, s);
        } catch (const std::invalid_argument&) {
            continue;
        }
        auto cover = surface_cover(kModel, s, {0.1});
        CHECK(merge_once(cover) == cover);
        // Prefix-free.
        for (const BitString& a : cover) {
            for (const BitString& b : cover) {
                if (!(a == b)) CHECK(!a.is_prefix_of(b));
            }
        }
    }
}

TEST_CASE("cover_circle") {
    GeoPoint zurich{8.5417, 47.3769, 0};
    auto cover = cover_circle(kModel, zurich, 10.0, std::nullopt, {1.0});
    REQUIRE(!cover.empty());
    for (const auto& pr : cover) {
        CHECK(pr.altitude.empty());
    }
    CHECK(cover.size() <= 8);

    // Determinism.
    CHECK(cover == cover_circle(kModel, zurich, 10.0, std::nullopt, {1.0}));

    // Center exactly on the prime meridian split: both halves present, circle
    // still covered.
    GeoPoint on_split{0.0, 47.0, 0};
    auto split_cover = cover_circle(kModel, on_split, 10.0, std::nullopt, {1.0});
    bool west = false, east = false;
    for (const auto& pr : split_cover) {
        (pr.surface.bit(0) == 0 ? west : east) = true;
    }
    CHECK(west);
    CHECK(east);
    auto circle = circle_frustum(kModel, on_split, 10.0, std::nullopt);
    for (const GeoPoint& p : sample_interior(circle, 800, 4242)) {
        CHECK(covered(split_cover, p));
    }

    CHECK_THROWS_AS(cover_circle(kModel, zurich, 0.0, std::nullopt, {1.0}),
                    std::invalid_argument);
    GeoPoint near_am{179.99999, 10, 0};
    CHECK_THROWS_WITH_AS(cover_circle(kModel, near_am, 10.0, std::nullopt, {1.0}),
                         doctest::Contains("antimeridian"), std::invalid_argument);
}

TEST_CASE("intersects predicate") {
    NodeFrustum west = node_volume(kModel, {bs("0"), {}});
    auto inside = rect_frustum(-100, -99, 10, 11, 0, 10);
    CHECK(intersects(west, inside));

    NodeFrustum low = node_volume(kModel, {{}, bs("0")});
    auto high = rect_frustum(-100, -99, 10, 11, 6000, 7000);
    CHECK(!intersects(low, high));

    // Vertex exactly on the rectangle edge counts (closed boundary).
    auto touching = rect_frustum(0, 1, 10, 11, 0, 10);
    CHECK(intersects(west, touching));
}
