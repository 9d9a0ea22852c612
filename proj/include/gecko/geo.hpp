#pragma once

#include <set>
#include <vector>

#include "gecko/bitstring.hpp"

namespace gecko {

/// WGS84-derived discretization model. Longitude/latitude bit counts fix the
/// surface tree height, the altitude bit count fixes the altitude subtrees.
/// The reduced constructor gives small universes for exhaustive tests.
struct EarthModel {
    double semi_major = 6378137.0;     // equatorial radius [m]
    double semi_minor = 6356752.3142;  // polar radius [m]
    int lon_bits = 26;
    int lat_bits = 25;
    int alt_bits = 15;
    double min_altitude = -11000.0;  // D [m]

    static EarthModel wgs84() { return EarthModel{}; }
    static EarthModel reduced(int bx, int by, int bz);

    uint64_t max_lon() const { return (uint64_t{1} << lon_bits) - 1; }  // C_x
    uint64_t max_lat() const { return (uint64_t{1} << lat_bits) - 1; }  // C_y
    uint64_t max_alt() const { return (uint64_t{1} << alt_bits) - 1; }  // C_z
    double max_altitude() const {  // H
        return min_altitude + static_cast<double>(max_alt());
    }
    int surface_height() const { return lon_bits + lat_bits; }
    int altitude_height() const { return alt_bits; }

    /// Radius of the sphere with the same surface area as the ellipsoid.
    double authalic_radius() const;
};

struct GeoPoint {
    double lon = 0;  // degrees, [-180, 180]
    double lat = 0;  // degrees, [-90, 90]
    double alt = 0;  // meters, [D, H+1]

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct DiscretePoint {
    uint64_t x = 0;
    uint64_t y = 0;
    uint64_t z = 0;

    friend bool operator==(const DiscretePoint&, const DiscretePoint&) = default;
};

/// Axis-aligned lon/lat/alt box covered by an SMT node. Half-open in every
/// dimension; the discretization clamps the global maxima into the last cell.
struct NodeFrustum {
    double lon_lo = 0, lon_hi = 0;
    double lat_lo = 0, lat_hi = 0;
    double alt_lo = 0, alt_hi = 0;

    bool contains(const GeoPoint& p) const {
        return p.lon >= lon_lo && p.lon < lon_hi && p.lat >= lat_lo && p.lat < lat_hi &&
               p.alt >= alt_lo && p.alt < alt_hi;
    }
};

/// Maps a point to integer grid coordinates, clamping the closed upper bounds
/// (lon=180, lat=90, alt=H+1) into the maximum cell.
/// Throws std::out_of_range naming the offending dimension.
DiscretePoint discretize(const EarthModel& m, const GeoPoint& p);

/// Interleaves the discretized coordinates into the node address of the
/// deepest cell containing the point.
BitStringPair encode_point(const EarthModel& m, const DiscretePoint& d);

inline BitStringPair point_pair(const EarthModel& m, const GeoPoint& p) {
    return encode_point(m, discretize(m, p));
}

bool pair_valid(const EarthModel& m, const BitStringPair& n);

/// Children per the tree structure: surface nodes with empty altitude string
/// have two surface children and two altitude children; altitude nodes only
/// split further in altitude; full-depth altitude strings are leaves.
std::vector<BitStringPair> node_children(const EarthModel& m, const BitStringPair& n);

/// Inverse of node_children. Throws std::invalid_argument for the root.
BitStringPair node_parent(const BitStringPair& n);

NodeFrustum node_volume(const EarthModel& m, const BitStringPair& n);

/// Surface area of the node's lon/lat rectangle on the authalic sphere [m^2].
double cell_area(const EarthModel& m, const BitStringPair& n);

/// Area of the lon/lat rectangle [degrees] on the authalic sphere [m^2].
double rect_area(const EarthModel& m, double lon_lo, double lon_hi, double lat_lo,
                 double lat_hi);

}  // namespace gecko
