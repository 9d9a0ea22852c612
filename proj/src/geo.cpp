#include "gecko/geo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gecko {

EarthModel EarthModel::reduced(int bx, int by, int bz) {
    if (bx != by + 1 || bx < 1 || bz < 1 || bx + by > 51 || bz > 15) {
        throw std::invalid_argument("reduced model requires bx == by + 1 within bounds");
    }
    EarthModel m;
    m.lon_bits = bx;
    m.lat_bits = by;
    m.alt_bits = bz;
    return m;
}

double EarthModel::authalic_radius() const {
    double a = semi_major;
    double b = semi_minor;
    double e = std::sqrt(1.0 - (b * b) / (a * a));
    // Surface area of the oblate ellipsoid: 2*pi*a^2 + pi*b^2/e * ln((1+e)/(1-e)).
    double area = 2.0 * M_PI * a * a + M_PI * b * b / e * std::log((1.0 + e) / (1.0 - e));
    return std::sqrt(area / (4.0 * M_PI));
}

DiscretePoint discretize(const EarthModel& m, const GeoPoint& p) {
    if (!(p.lon >= -180.0 && p.lon <= 180.0)) {
        throw std::out_of_range("longitude out of range [-180,180]: " + std::to_string(p.lon));
    }
    if (!(p.lat >= -90.0 && p.lat <= 90.0)) {
        throw std::out_of_range("latitude out of range [-90,90]: " + std::to_string(p.lat));
    }
    double alt_max = m.max_altitude() + 1.0;
    if (!(p.alt >= m.min_altitude && p.alt <= alt_max)) {
        throw std::out_of_range("altitude out of range [" + std::to_string(m.min_altitude) +
                                "," + std::to_string(alt_max) + "]: " + std::to_string(p.alt));
    }

    DiscretePoint d;
    if (p.lon == 180.0) {
        d.x = m.max_lon();
    } else {
        d.x = static_cast<uint64_t>(
            std::floor((p.lon + 180.0) / 360.0 * std::ldexp(1.0, m.lon_bits)));
    }
    if (p.lat == 90.0) {
        d.y = m.max_lat();
    } else {
        d.y = static_cast<uint64_t>(
            std::floor((p.lat + 90.0) / 180.0 * std::ldexp(1.0, m.lat_bits)));
    }
    if (p.alt == alt_max) {
        d.z = m.max_alt();
    } else {
        d.z = static_cast<uint64_t>(std::floor(p.alt - m.min_altitude));
    }
    return d;
}

BitStringPair encode_point(const EarthModel& m, const DiscretePoint& d) {
    BitStringPair out;
    out.surface = interleave_bits(d.x, d.y, m.lon_bits, m.lat_bits);
    out.altitude = BitString(d.z, m.alt_bits);
    return out;
}

bool pair_valid(const EarthModel& m, const BitStringPair& n) {
    return n.surface.size() <= m.surface_height() && n.altitude.size() <= m.alt_bits;
}

std::vector<BitStringPair> node_children(const EarthModel& m, const BitStringPair& n) {
    if (!pair_valid(m, n)) throw std::invalid_argument("invalid node " + n.str());
    std::vector<BitStringPair> out;
    if (n.altitude.size() == m.alt_bits) return out;  // leaf
    if (n.altitude.empty() && n.surface.size() < m.surface_height()) {
        out.push_back({n.surface.append(0), n.altitude});
        out.push_back({n.surface.append(1), n.altitude});
    }
    out.push_back({n.surface, n.altitude.append(0)});
    out.push_back({n.surface, n.altitude.append(1)});
    return out;
}

BitStringPair node_parent(const BitStringPair& n) {
    if (n.is_root()) throw std::invalid_argument("root has no parent");
    if (!n.altitude.empty()) return {n.surface, n.altitude.parent()};
    return {n.surface.parent(), n.altitude};
}

NodeFrustum node_volume(const EarthModel& m, const BitStringPair& n) {
    BitString xs, ys;
    deinterleave_bits(n.surface, xs, ys);
    double sx = std::ldexp(1.0, m.lon_bits);
    double sy = std::ldexp(1.0, m.lat_bits);
    NodeFrustum f;
    f.lon_lo = static_cast<double>(xs.padded_floor(m.lon_bits)) / sx * 360.0 - 180.0;
    f.lon_hi = static_cast<double>(xs.padded_ceil(m.lon_bits)) / sx * 360.0 - 180.0;
    f.lat_lo = static_cast<double>(ys.padded_floor(m.lat_bits)) / sy * 180.0 - 90.0;
    f.lat_hi = static_cast<double>(ys.padded_ceil(m.lat_bits)) / sy * 180.0 - 90.0;
    f.alt_lo = m.min_altitude + static_cast<double>(n.altitude.padded_floor(m.alt_bits));
    f.alt_hi = m.min_altitude + static_cast<double>(n.altitude.padded_ceil(m.alt_bits));
    return f;
}

double rect_area(const EarthModel& m, double lon_lo, double lon_hi, double lat_lo,
                 double lat_hi) {
    double r = m.authalic_radius();
    double dl = (lon_hi - lon_lo) * M_PI / 180.0;
    double ds = std::sin(lat_hi * M_PI / 180.0) - std::sin(lat_lo * M_PI / 180.0);
    return r * r * dl * ds;
}

double cell_area(const EarthModel& m, const BitStringPair& n) {
    NodeFrustum f = node_volume(m, n);
    return rect_area(m, f.lon_lo, f.lon_hi, f.lat_lo, f.lat_hi);
}

}  // namespace gecko
