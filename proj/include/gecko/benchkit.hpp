#pragma once

#include "gecko/client.hpp"
#include "gecko/dataset.hpp"

namespace gecko {

/// Log + map server pair wired in-process, with the corpus submitted and
/// ingested. The starting point for every benchmark run.
struct BenchRig {
    std::shared_ptr<LogServerCore> log;
    std::shared_ptr<MapServerCore> server;
    Dataset dataset;
    std::vector<GeoCert> submitted;  // as logged: SCT embedded, re-signed
    std::vector<GeoPoint> queries;

    ClientConfig client_config() const;
};

struct BenchParams {
    DatasetParams dataset;
    double f_ingest = 0.1;
    double f_query = 1.0;
    double query_radius_m = 10.0;
    size_t ingest_batch = 5000;  // submissions per ingest cycle while loading
};

/// Builds the rig and ingests the full corpus.
BenchRig build_rig(const BenchParams& params, const DensityMap& density);

/// Embeds the log's SCT, signs with the corpus CA, submits. Returns the
/// certificate as logged.
GeoCert submit_cert(LogServerCore& log, const SigningKey& ca_key, GeoCert cert);

struct IngestRow {
    size_t batch_size = 0;
    size_t certs = 0;
    double wall_seconds = 0;
    double per_cert_ms = 0;
};

/// Mean per-certificate ingestion time for each batch size, on a fresh
/// server per batch size.
std::vector<IngestRow> bench_ingest(const BenchParams& params, const DensityMap& density,
                                    const std::vector<size_t>& batch_sizes,
                                    size_t certs_per_point);

struct ThroughputRow {
    int workers = 0;
    size_t queries = 0;
    double wall_seconds = 0;
    double qps = 0;
    size_t failures = 0;
};

/// Queries per second against the serving table with full client-side proof
/// verification on every response.
std::vector<ThroughputRow> bench_throughput(const BenchRig& rig, const BenchParams& params,
                                            const std::vector<int>& worker_counts,
                                            size_t queries_per_run);

struct LatencySample {
    double bitstring_us = 0;
    double query_us = 0;
    double verify_us = 0;
    double total_us = 0;
    size_t request_bytes = 0;
    size_t response_bytes = 0;
};

std::vector<LatencySample> bench_latency(const BenchRig& rig, const BenchParams& params,
                                         size_t queries);

/// Histogram of material data nodes (nodes holding certificates) by total
/// tree depth.
std::map<int, size_t> depth_histogram(const MapServerCore& server);

// CSV emitters. Every file starts with '#' metadata lines followed by a
// header row; the schema is stable across runs.
std::string ingest_csv(const std::vector<IngestRow>& rows, const std::string& meta);
std::string throughput_csv(const std::vector<ThroughputRow>& rows, const std::string& meta);
std::string latency_cdf_csv(const std::vector<LatencySample>& samples,
                            const std::string& meta);
std::string size_cdf_csv(const std::vector<LatencySample>& samples, const std::string& meta);
std::string depth_histogram_csv(const std::map<int, size_t>& hist, const std::string& meta);

std::string bench_meta(const BenchParams& params, size_t corpus);

/// Quantile over a sorted copy of the values (q in [0,1]).
double quantile(std::vector<double> values, double q);

/// Minimal SVG line chart from CSV columns (x, y per series).
std::string plot_csv_to_svg(const std::string& csv_text, const std::string& x_column,
                            const std::vector<std::string>& y_columns, bool log_y,
                            const std::string& title);

}  // namespace gecko
