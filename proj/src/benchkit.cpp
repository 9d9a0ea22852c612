#include "gecko/benchkit.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

namespace gecko {

namespace {
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

uint64_t fixed_time() { return 1750000000; }
}  // namespace

GeoCert submit_cert(LogServerCore& log, const SigningKey& ca_key, GeoCert cert) {
    cert.scts = {log.request_sct(precert_hash(cert))};
    sign_cert(cert, ca_key);
    log.submit_cert(canonical_encode(cert));
    return cert;
}

ClientConfig BenchRig::client_config() const {
    ClientConfig cfg;
    MapServerRef ref;
    ref.address = "inproc:bench";
    ref.public_key = server->public_key();
    ref.api = make_inproc_map_api(server);
    cfg.servers.push_back(std::move(ref));
    cfg.quorum_m = 1;
    cfg.trusted_logs[log->id()] = log->public_key();
    cfg.sct_quorum_n = 1;
    cfg.ca_keys[dataset.certs.empty() ? "bench-ca" : dataset.certs.front().issuer_id] =
        dataset.ca_key.public_key();
    return cfg;
}

BenchRig build_rig(const BenchParams& params, const DensityMap& density) {
    BenchRig rig;
    Dataset dataset = generate_dataset(params.dataset, density);

    SigningKey log_key = SigningKey::from_seed(sha256("bench-log-key"));
    rig.log = std::make_shared<LogServerCore>("bench-log", log_key, 3600, fixed_time);

    ServerConfig cfg;
    cfg.signing_key_hex = SigningKey::from_seed(sha256("bench-map-key")).seed_hex();
    cfg.f_ingest = params.f_ingest;
    cfg.source_logs.push_back({"bench-log", "inproc:bench-log", rig.log->public_key()});
    rig.server = std::make_shared<MapServerCore>(
        cfg, std::vector<std::shared_ptr<LogApi>>{make_inproc_log_api(rig.log)}, fixed_time);

    rig.submitted.reserve(dataset.certs.size());
    for (size_t i = 0; i < dataset.certs.size(); ++i) {
        rig.submitted.push_back(submit_cert(*rig.log, dataset.ca_key, dataset.certs[i]));
        if ((i + 1) % params.ingest_batch == 0) rig.server->ingest_cycle();
    }
    rig.server->ingest_cycle();

    rig.queries = query_points(dataset, params.dataset.seed);
    rig.dataset = std::move(dataset);
    return rig;
}

std::vector<IngestRow> bench_ingest(const BenchParams& params, const DensityMap& density,
                                    const std::vector<size_t>& batch_sizes,
                                    size_t certs_per_point) {
    std::vector<IngestRow> rows;
    for (size_t batch : batch_sizes) {
        DatasetParams dp = params.dataset;
        dp.count = certs_per_point;
        Dataset dataset = generate_dataset(dp, density);

        SigningKey log_key = SigningKey::from_seed(sha256("bench-log-key"));
        auto log = std::make_shared<LogServerCore>("bench-log", log_key, 3600, fixed_time);
        ServerConfig cfg;
        cfg.signing_key_hex = SigningKey::from_seed(sha256("bench-map-key")).seed_hex();
        cfg.f_ingest = params.f_ingest;
        cfg.source_logs.push_back({"bench-log", "inproc:bench-log", log->public_key()});
        MapServerCore server(cfg, {make_inproc_log_api(log)}, fixed_time);

        IngestRow row;
        row.batch_size = batch;
        auto start = Clock::now();
        size_t submitted = 0;
        for (const GeoCert& cert : dataset.certs) {
            submit_cert(*log, dataset.ca_key, cert);
            if (++submitted % batch == 0) server.ingest_cycle();
        }
        if (submitted % batch != 0) server.ingest_cycle();
        row.certs = submitted;
        row.wall_seconds = seconds_since(start);
        row.per_cert_ms = row.wall_seconds * 1000.0 / static_cast<double>(submitted);
        rows.push_back(row);
    }
    return rows;
}

std::vector<ThroughputRow> bench_throughput(const BenchRig& rig, const BenchParams& params,
                                            const std::vector<int>& worker_counts,
                                            size_t queries_per_run) {
    const EarthModel model = rig.server->model();
    // Precompute the request covers; the server-side work is what this run
    // measures, each response still fully verified.
    size_t n = std::min(queries_per_run, rig.queries.size());
    std::vector<QueryRequest> requests;
    requests.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        QueryRequest req;
        req.pairs = cover_circle(model, rig.queries[i], params.query_radius_m, std::nullopt,
                                 {params.f_query});
        std::sort(req.pairs.begin(), req.pairs.end());
        requests.push_back(std::move(req));
    }
    PublicKey server_key = rig.server->public_key();

    std::vector<ThroughputRow> rows;
    for (int workers : worker_counts) {
        std::atomic<size_t> next{0};
        std::atomic<size_t> failures{0};
        auto start = Clock::now();
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    size_t i = next.fetch_add(1);
                    if (i >= requests.size()) break;
                    QueryResponse resp = rig.server->handle_query(requests[i]);
                    bool ok = resp.proof.smh.verify(server_key);
                    auto outcome =
                        verify_proof(model, resp.proof, resp.proof.smh.smt_root);
                    if (!ok || !outcome.ok) failures.fetch_add(1);
                }
            });
        }
        for (auto& t : pool) t.join();
        ThroughputRow row;
        row.workers = workers;
        row.queries = requests.size();
        row.wall_seconds = seconds_since(start);
        row.qps = static_cast<double>(requests.size()) / row.wall_seconds;
        row.failures = failures.load();
        rows.push_back(row);
    }
    return rows;
}

std::vector<LatencySample> bench_latency(const BenchRig& rig, const BenchParams& params,
                                         size_t queries) {
    const EarthModel model = rig.server->model();
    PublicKey server_key = rig.server->public_key();
    size_t n = std::min(queries, rig.queries.size());
    std::vector<LatencySample> samples;
    samples.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        LatencySample s;
        auto t0 = Clock::now();
        QueryRequest req;
        req.pairs = cover_circle(model, rig.queries[i], params.query_radius_m, std::nullopt,
                                 {params.f_query});
        std::sort(req.pairs.begin(), req.pairs.end());
        auto t1 = Clock::now();
        QueryResponse resp = rig.server->handle_query(req);
        auto t2 = Clock::now();
        bool ok = resp.proof.smh.verify(server_key);
        auto outcome = verify_proof(model, resp.proof, resp.proof.smh.smt_root);
        for (const Bytes& body : resp.certificates) {
            ok = ok && outcome.certs.count(sha256(body)) > 0;
        }
        auto t3 = Clock::now();
        if (!ok || !outcome.ok) {
            throw std::runtime_error("benchmark response failed verification");
        }
        s.bitstring_us = std::chrono::duration<double, std::micro>(t1 - t0).count();
        s.query_us = std::chrono::duration<double, std::micro>(t2 - t1).count();
        s.verify_us = std::chrono::duration<double, std::micro>(t3 - t2).count();
        s.total_us = std::chrono::duration<double, std::micro>(t3 - t0).count();
        s.request_bytes = req.canonical_bytes().size();
        s.response_bytes = response_canonical_size(resp);
        samples.push_back(s);
    }
    return samples;
}

std::map<int, size_t> depth_histogram(const MapServerCore& server) {
    std::map<int, size_t> hist;
    server.for_each_serving_node([&](const SmtNode& node) {
        if (!node.cert_hashes.empty()) {
            hist[node.pair.surface.size() + node.pair.altitude.size()] += 1;
        }
    });
    return hist;
}

std::string ingest_csv(const std::vector<IngestRow>& rows, const std::string& meta) {
    std::ostringstream out;
    out << meta;
    out << "batch_size,certs,wall_seconds,per_cert_ms\n";
    for (const IngestRow& r : rows) {
        out << r.batch_size << "," << r.certs << "," << r.wall_seconds << ","
            << r.per_cert_ms << "\n";
    }
    return out.str();
}

std::string throughput_csv(const std::vector<ThroughputRow>& rows, const std::string& meta) {
    std::ostringstream out;
    out << meta;
    out << "workers,queries,wall_seconds,qps,failures\n";
    for (const ThroughputRow& r : rows) {
        out << r.workers << "," << r.queries << "," << r.wall_seconds << "," << r.qps << ","
            << r.failures << "\n";
    }
    return out.str();
}

std::string latency_cdf_csv(const std::vector<LatencySample>& samples,
                            const std::string& meta) {
    std::ostringstream out;
    out << meta;
    out << "metric,value_us,fraction\n";
    auto emit = [&](const char* metric, auto pick) {
        std::vector<double> values;
        values.reserve(samples.size());
        for (const LatencySample& s : samples) values.push_back(pick(s));
        std::sort(values.begin(), values.end());
        for (size_t i = 0; i < values.size(); ++i) {
            out << metric << "," << values[i] << ","
                << (static_cast<double>(i + 1) / static_cast<double>(values.size())) << "\n";
        }
    };
    emit("bitstring", [](const LatencySample& s) { return s.bitstring_us; });
    emit("query", [](const LatencySample& s) { return s.query_us; });
    emit("verify", [](const LatencySample& s) { return s.verify_us; });
    emit("total", [](const LatencySample& s) { return s.total_us; });
    return out.str();
}

std::string size_cdf_csv(const std::vector<LatencySample>& samples, const std::string& meta) {
    std::ostringstream out;
    out << meta;
    out << "kind,bytes,fraction\n";
    auto emit = [&](const char* kind, auto pick) {
        std::vector<double> values;
        values.reserve(samples.size());
        for (const LatencySample& s : samples) values.push_back(pick(s));
        std::sort(values.begin(), values.end());
        for (size_t i = 0; i < values.size(); ++i) {
            out << kind << "," << values[i] << ","
                << (static_cast<double>(i + 1) / static_cast<double>(values.size())) << "\n";
        }
    };
    emit("request", [](const LatencySample& s) { return static_cast<double>(s.request_bytes); });
    emit("response",
         [](const LatencySample& s) { return static_cast<double>(s.response_bytes); });
    return out.str();
}

std::string depth_histogram_csv(const std::map<int, size_t>& hist, const std::string& meta) {
    std::ostringstream out;
    out << meta;
    out << "depth,data_nodes\n";
    for (const auto& [depth, count] : hist) out << depth << "," << count << "\n";
    return out.str();
}

std::string bench_meta(const BenchParams& params, size_t corpus) {
    std::ostringstream out;
    out << "# seed=" << params.dataset.seed << " corpus=" << corpus
        << " f_ingest=" << params.f_ingest << " f_query=" << params.f_query
        << " radius_m=" << params.query_radius_m
        << " hw_threads=" << std::thread::hardware_concurrency() << "\n";
    return out.str();
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    double idx = q * static_cast<double>(values.size() - 1);
    size_t lo = static_cast<size_t>(idx);
    size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = idx - static_cast<double>(lo);
    return values[lo] * (1 - frac) + values[hi] * frac;
}

std::string plot_csv_to_svg(const std::string& csv_text, const std::string& x_column,
                            const std::vector<std::string>& y_columns, bool log_y,
                            const std::string& title) {
    std::istringstream in(csv_text);
    std::string line;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (header.empty()) {
            header = fields;
            continue;
        }
        std::vector<double> vals;
        bool numeric = true;
        for (const std::string& f : fields) {
            try {
                vals.push_back(std::stod(f));
            } catch (...) {
                numeric = false;
                break;
            }
        }
        if (numeric && vals.size() == header.size()) rows.push_back(std::move(vals));
    }
    auto column_index = [&](const std::string& name) {
        for (size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        throw std::invalid_argument("no CSV column named " + name);
    };
    int xi = column_index(x_column);

    const double width = 720, height = 420, margin = 60;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    std::vector<int> yidx;
    for (const std::string& yc : y_columns) yidx.push_back(column_index(yc));
    for (const auto& row : rows) {
        xmin = std::min(xmin, row[xi]);
        xmax = std::max(xmax, row[xi]);
        for (int yi : yidx) {
            double v = row[yi];
            if (log_y && v <= 0) continue;
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (rows.empty() || xmin > xmax || ymin > ymax) {
        throw std::invalid_argument("no plottable data");
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto ty = [&](double v) {
        double t = log_y ? (std::log10(v) - std::log10(ymin)) /
                               (std::log10(ymax) - std::log10(ymin))
                         : (v - ymin) / (ymax - ymin);
        return height - margin - t * (height - 2 * margin);
    };
    auto tx = [&](double v) {
        return margin + (v - xmin) / (xmax - xmin) * (width - 2 * margin);
    };

    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
        << height << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-size='16'>"
        << title << "</text>\n";
    svg << "<line x1='" << margin << "' y1='" << height - margin << "' x2='" << width - margin
        << "' y2='" << height - margin << "' stroke='black'/>\n";
    svg << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
        << height - margin << "' stroke='black'/>\n";
    svg << "<text x='" << width / 2 << "' y='" << height - 16
        << "' text-anchor='middle' font-size='12'>" << x_column << "</text>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        double xv = xmin + (xmax - xmin) * tick / 4;
        svg << "<text x='" << tx(xv) << "' y='" << height - margin + 18
            << "' text-anchor='middle' font-size='10'>" << xv << "</text>\n";
        double yv = log_y ? std::pow(10.0, std::log10(ymin) +
                                               (std::log10(ymax) - std::log10(ymin)) * tick / 4)
                          : ymin + (ymax - ymin) * tick / 4;
        svg << "<text x='" << margin - 6 << "' y='" << ty(yv) + 4
            << "' text-anchor='end' font-size='10'>" << yv << "</text>\n";
    }
    for (size_t s = 0; s < yidx.size(); ++s) {
        std::ostringstream pts;
        for (const auto& row : rows) {
            double v = row[yidx[s]];
            if (log_y && v <= 0) continue;
            pts << tx(row[xi]) << "," << ty(v) << " ";
        }
        svg << "<polyline fill='none' stroke='" << colors[s % 5] << "' stroke-width='1.5' points='"
            << pts.str() << "'/>\n";
        svg << "<text x='" << width - margin + 4 << "' y='" << margin + 16 * s
            << "' font-size='11' fill='" << colors[s % 5] << "'>" << y_columns[s]
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace gecko
