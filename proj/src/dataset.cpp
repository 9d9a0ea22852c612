#include "gecko/dataset.hpp"

#include <cmath>
#include <sstream>

namespace gecko {

void DensityMap::validate() const {
    if (lon_cells < 1 || lat_cells < 1) throw std::invalid_argument("empty density grid");
    if (!(lon_min < lon_max && lat_min < lat_max)) {
        throw std::invalid_argument("degenerate density extent");
    }
    if (weights.size() != static_cast<size_t>(lon_cells) * lat_cells) {
        throw std::invalid_argument("density weights size mismatch");
    }
    double total = 0;
    for (double w : weights) {
        if (w < 0) throw std::invalid_argument("negative density weight");
        total += w;
    }
    if (total <= 0) throw std::invalid_argument("all density weights are zero");
}

DensityMap DensityMap::europe() {
    DensityMap m;
    m.lon_cells = 40;
    m.lat_cells = 25;
    m.lon_min = -10;
    m.lon_max = 30;
    m.lat_min = 35;
    m.lat_max = 60;
    m.weights.assign(static_cast<size_t>(m.lon_cells) * m.lat_cells, 0.1);
    // A handful of dense metropolitan spots.
    struct Spot {
        double lon, lat, weight;
    };
    for (const Spot& s : {Spot{8.54, 47.38, 40},   // Zurich
                          Spot{2.35, 48.85, 60},   // Paris
                          Spot{-0.13, 51.51, 60},  // London
                          Spot{13.40, 52.52, 45},  // Berlin
                          Spot{12.50, 41.90, 40},  // Rome
                          Spot{-3.70, 40.42, 35},  // Madrid
                          Spot{21.01, 52.23, 30},  // Warsaw
                          Spot{4.90, 52.37, 35}}) {  // Amsterdam
        int ix = static_cast<int>((s.lon - m.lon_min) / (m.lon_max - m.lon_min) * m.lon_cells);
        int iy = static_cast<int>((s.lat - m.lat_min) / (m.lat_max - m.lat_min) * m.lat_cells);
        m.at(ix, iy) += s.weight;
    }
    return m;
}

DensityMap DensityMap::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    DensityMap m;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (!header) {
            if (fields.size() != 6) throw std::invalid_argument("density CSV header needs 6 fields");
            m.lon_cells = std::stoi(fields[0]);
            m.lat_cells = std::stoi(fields[1]);
            m.lon_min = std::stod(fields[2]);
            m.lat_min = std::stod(fields[3]);
            m.lon_max = std::stod(fields[4]);
            m.lat_max = std::stod(fields[5]);
            if (m.lon_cells < 1 || m.lat_cells < 1) {
                throw std::invalid_argument("density CSV grid dimensions invalid");
            }
            m.weights.assign(static_cast<size_t>(m.lon_cells) * m.lat_cells, 0.0);
            header = true;
            continue;
        }
        if (fields.size() != 3) throw std::invalid_argument("density CSV row needs ix,iy,weight");
        int ix = std::stoi(fields[0]);
        int iy = std::stoi(fields[1]);
        if (ix < 0 || ix >= m.lon_cells || iy < 0 || iy >= m.lat_cells) {
            throw std::invalid_argument("density CSV cell out of range");
        }
        m.at(ix, iy) = std::stod(fields[2]);
    }
    if (!header) throw std::invalid_argument("density CSV is empty");
    m.validate();
    return m;
}

std::string DensityMap::to_csv() const {
    std::ostringstream out;
    out << lon_cells << "," << lat_cells << "," << lon_min << "," << lat_min << ","
        << lon_max << "," << lat_max << "\n";
    for (int iy = 0; iy < lat_cells; ++iy) {
        for (int ix = 0; ix < lon_cells; ++ix) {
            if (at(ix, iy) > 0) out << ix << "," << iy << "," << at(ix, iy) << "\n";
        }
    }
    return out.str();
}

uint64_t Rng::next() {
    // splitmix64
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

namespace {
SigningKey derived_key(uint64_t seed, const char* role) {
    Bytes material;
    put_var_string(material, role);
    put_u64(material, seed);
    Hash32 h = sha256(material);
    std::array<uint8_t, 32> raw;
    std::copy(h.begin(), h.end(), raw.begin());
    return SigningKey::from_seed(raw);
}
}  // namespace

Dataset generate_dataset(const DatasetParams& params, const DensityMap& density) {
    if (params.count < 1) throw std::invalid_argument("dataset count must be at least 1");
    density.validate();
    EarthModel model = EarthModel::wgs84();

    Dataset out{{}, derived_key(params.seed, "ca"), derived_key(params.seed, "subject")};
    out.certs.reserve(params.count);

    std::vector<double> cumulative(density.weights.size());
    double acc = 0;
    for (size_t i = 0; i < density.weights.size(); ++i) {
        acc += density.weights[i];
        cumulative[i] = acc;
    }

    Rng rng(params.seed);
    double r_earth = model.authalic_radius();
    double cell_lon = (density.lon_max - density.lon_min) / density.lon_cells;
    double cell_lat = (density.lat_max - density.lat_min) / density.lat_cells;

    for (size_t i = 0; i < params.count; ++i) {
        double pick = rng.uniform() * acc;
        size_t cell = static_cast<size_t>(
            std::lower_bound(cumulative.begin(), cumulative.end(), pick) -
            cumulative.begin());
        if (cell >= cumulative.size()) cell = cumulative.size() - 1;
        int ix = static_cast<int>(cell % density.lon_cells);
        int iy = static_cast<int>(cell / density.lon_cells);
        double lon = density.lon_min + (ix + rng.uniform()) * cell_lon;
        double lat = density.lat_min + (iy + rng.uniform()) * cell_lat;
        double base = rng.uniform(params.alt_base_min, params.alt_base_max);

        double half = params.cert_size_m / 2.0;
        double dlat = half / r_earth * 180.0 / M_PI;
        double dlon = half / (r_earth * std::max(std::cos(lat * M_PI / 180.0), 1e-9)) *
                      180.0 / M_PI;

        GeoCert c;
        c.subject_uri = "gecko://site-" + std::to_string(i) + ".example";
        c.issuer_id = params.issuer_id;
        c.serial = i;
        c.volume.frustums = {PolygonFrustum{{{lon - dlon, lat - dlat, 0},
                                             {lon + dlon, lat - dlat, 0},
                                             {lon + dlon, lat + dlat, 0},
                                             {lon - dlon, lat + dlat, 0}},
                                            base,
                                            base + params.cert_height_m}};
        c.attributes = {{"center_lat", std::to_string(lat)},
                        {"center_lon", std::to_string(lon)},
                        {"intended_use", "benchmark"}};
        c.loc_verification = LocVerification::wireless;
        c.not_before = 1700000000;
        c.not_after = 1900000000;
        c.public_key.assign(out.subject_key.public_key().begin(),
                            out.subject_key.public_key().end());
        sign_cert(c, out.ca_key);
        if (canonical_encode(c).size() > params.payload_cap_bytes) {
            throw std::runtime_error("generated payload exceeds the cap");
        }
        out.certs.push_back(std::move(c));
    }
    return out;
}

std::vector<GeoPoint> query_points(const Dataset& dataset, uint64_t seed) {
    std::vector<GeoPoint> points;
    points.reserve(dataset.certs.size());
    for (const GeoCert& c : dataset.certs) {
        const auto& ring = c.volume.frustums.front().ring;
        double lon = 0, lat = 0;
        for (const GeoPoint& v : ring) {
            lon += v.lon;
            lat += v.lat;
        }
        points.push_back({lon / ring.size(), lat / ring.size(), 0});
    }
    Rng rng(seed ^ 0xdeadbeefull);
    for (size_t i = points.size(); i > 1; --i) {
        size_t j = rng.next() % i;
        std::swap(points[i - 1], points[j]);
    }
    return points;
}

Bytes dataset_to_bytes(const Dataset& dataset) {
    Bytes out;
    put_var_string(out, "gecko-dataset-v1");
    put_bytes(out, dataset.ca_key.seed().data(), 32);
    put_bytes(out, dataset.subject_key.seed().data(), 32);
    put_u32(out, static_cast<uint32_t>(dataset.certs.size()));
    for (const GeoCert& c : dataset.certs) put_var_bytes(out, canonical_encode(c));
    return out;
}

Dataset dataset_from_bytes(const Bytes& b) {
    ByteReader r(b);
    if (r.var_string() != "gecko-dataset-v1") throw DecodeError("not a dataset file");
    std::array<uint8_t, 32> ca_seed;
    Bytes raw = r.raw(32);
    std::copy(raw.begin(), raw.end(), ca_seed.begin());
    std::array<uint8_t, 32> subject_seed;
    raw = r.raw(32);
    std::copy(raw.begin(), raw.end(), subject_seed.begin());
    Dataset out{{}, SigningKey::from_seed(ca_seed), SigningKey::from_seed(subject_seed)};
    uint32_t n = r.u32();
    out.certs.reserve(n);
    for (uint32_t i = 0; i < n; ++i) out.certs.push_back(canonical_decode(r.var_bytes()));
    if (!r.done()) throw DecodeError("trailing bytes after dataset");
    return out;
}

}  // namespace gecko
