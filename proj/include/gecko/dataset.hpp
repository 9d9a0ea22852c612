#pragma once

#include "gecko/geocert.hpp"

namespace gecko {

/// Coarse lon/lat grid of relative certificate densities. Stands in for the
/// map-derived website density distribution; a CSV hook accepts externally
/// derived grids.
struct DensityMap {
    int lon_cells = 0;
    int lat_cells = 0;
    double lon_min = 0, lat_min = 0, lon_max = 0, lat_max = 0;
    std::vector<double> weights;  // row-major, index = iy * lon_cells + ix

    double& at(int ix, int iy) { return weights[static_cast<size_t>(iy) * lon_cells + ix]; }
    double at(int ix, int iy) const {
        return weights[static_cast<size_t>(iy) * lon_cells + ix];
    }

    void validate() const;

    /// Low-resolution synthetic density over Europe with a few dense spots.
    static DensityMap europe();

    /// CSV: header "lon_cells,lat_cells,lon_min,lat_min,lon_max,lat_max",
    /// then one "ix,iy,weight" row per non-zero cell.
    static DensityMap from_csv(const std::string& text);
    std::string to_csv() const;
};

/// Deterministic splitmix64 stream; identical output on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}
    uint64_t next();
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    uint64_t state_;
};

struct DatasetParams {
    uint64_t seed = 1;
    size_t count = 1000;
    double cert_size_m = 10.0;    // square footprint edge
    double cert_height_m = 3.0;   // altitude extent
    double alt_base_min = 0.0;    // uniform random base altitude range
    double alt_base_max = 1000.0;
    size_t payload_cap_bytes = 3328;  // 3.25 KiB
    std::string issuer_id = "bench-ca";
};

struct Dataset {
    std::vector<GeoCert> certs;  // signed, without SCTs
    SigningKey ca_key = SigningKey::from_seed({});
    SigningKey subject_key = SigningKey::from_seed({});
};

/// Deterministic synthetic corpus: one cert per sampled location, a
/// cert_size_m square at a uniformly random base altitude. Byte-identical
/// for a fixed seed and parameters.
Dataset generate_dataset(const DatasetParams& params, const DensityMap& density);

/// One query point per certificate (its footprint center), shuffled.
std::vector<GeoPoint> query_points(const Dataset& dataset, uint64_t seed);

Bytes dataset_to_bytes(const Dataset& dataset);
Dataset dataset_from_bytes(const Bytes& b);

}  // namespace gecko
