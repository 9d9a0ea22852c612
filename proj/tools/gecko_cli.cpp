// gecko: geographic verifiable-map toolkit.
//
// Server verbs run the log and map services; client verbs query and validate;
// bench verbs reproduce the evaluation measurements on synthetic corpora.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "gecko/benchkit.hpp"
#include "gecko/client.hpp"
#include "gecko/transport.hpp"

using namespace gecko;

namespace {
std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string dirname_of(const std::string& path) {
    auto pos = path.find_last_of('/');
    return pos == std::string::npos ? "." : path.substr(0, pos);
}

std::pair<std::string, int> split_listen(const std::string& listen) {
    auto pos = listen.find_last_of(':');
    if (pos == std::string::npos) return {listen, 8787};
    return {listen.substr(0, pos), std::stoi(listen.substr(pos + 1))};
}

std::vector<size_t> parse_size_list(const std::string& csv) {
    std::vector<size_t> out;
    std::istringstream in(csv);
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(std::stoull(field));
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::istringstream in(csv);
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(std::stoi(field));
    return out;
}

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop.store(true); }

int cmd_keygen(const std::string& out_path) {
    SigningKey key = SigningKey::generate();
    std::string text = "{\"signing_key\": \"" + key.seed_hex() + "\", \"public_key\": \"" +
                       public_key_hex(key.public_key()) + "\"}\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
        std::cout << "{\"public_key\": \"" << public_key_hex(key.public_key()) << "\"}\n";
    }
    return 0;
}

int cmd_log_server(const std::string& config_path) {
    auto doc = nlohmann::json::parse(read_file(config_path));
    std::string log_id = doc.at("log_id").get<std::string>();
    auto key = SigningKey::from_seed_hex(doc.at("signing_key").get<std::string>());
    if (!key) throw std::runtime_error("bad signing_key in config");
    uint64_t mmd = doc.value("mmd_seconds", uint64_t{3600});
    std::string listen = doc.value("listen", std::string{"127.0.0.1:8788"});

    auto core = std::make_shared<LogServerCore>(log_id, *key, mmd);
    std::map<std::string, PublicKey> ca_keys;
    for (const auto& [ca, pk] : doc.value("ca_keys", nlohmann::json::object()).items()) {
        auto parsed = public_key_from_hex(pk.get<std::string>());
        if (!parsed) throw std::runtime_error("bad CA key for " + ca);
        ca_keys[ca] = *parsed;
    }
    if (!ca_keys.empty()) core->set_ca_keys(std::move(ca_keys));

    auto [host, port] = split_listen(listen);
    auto handle = serve_log_http(core, host, port);
    std::cout << "{\"log_id\": \"" << log_id << "\", \"listening\": \"" << host << ":"
              << handle->port() << "\", \"public_key\": \""
              << public_key_hex(core->public_key()) << "\"}" << std::endl;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(200));
    return 0;
}

int cmd_map_server(const std::string& config_path) {
    ServerConfig cfg = server_config_from_json(read_file(config_path));
    apply_env_overrides(cfg);
    std::vector<std::shared_ptr<LogApi>> sources;
    for (const SourceLogRef& ref : cfg.source_logs) {
        if (ref.address.rfind("http", 0) != 0) {
            throw std::runtime_error("map-server requires http source log addresses, got " +
                                     ref.address);
        }
        sources.push_back(make_http_log_api(ref.address));
    }
    auto core = std::make_shared<MapServerCore>(cfg, std::move(sources));
    auto [host, port] = split_listen(cfg.listen);
    auto handle = serve_map_http(core, host, port, cfg.workers);
    std::cout << "{\"listening\": \"" << host << ":" << handle->port()
              << "\", \"public_key\": \"" << public_key_hex(core->public_key()) << "\"}"
              << std::endl;

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop.load()) {
        IngestReport rep = core->ingest_cycle();
        std::cout << "{\"ingest\": {\"certs\": " << rep.new_certs
                  << ", \"revocations\": " << rep.new_revocations
                  << ", \"rejected\": " << rep.rejected << ", \"smt_root\": \""
                  << rep.smt_root.hex() << "\", \"seconds\": " << rep.wall_seconds << "}}"
                  << std::endl;
        for (uint64_t slept = 0; slept < cfg.ingest_interval_s * 10 && !g_stop.load();
             ++slept) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
    }
    return 0;
}

ClientConfig load_client(const std::string& config_path) {
    return client_config_from_json(read_file(config_path), dirname_of(config_path));
}

int cmd_query(const std::string& config_path, double lat, double lon, double radius,
              double alt_min, double alt_max, bool has_alt, const std::string& out_path) {
    ClientConfig cfg = load_client(config_path);
    std::optional<AltRange> alt;
    if (has_alt) alt = AltRange{alt_min, alt_max};
    QueryRequest req = build_query(cfg, {lon, lat, 0}, radius, alt);

    // Save the first raw response for offline re-verification before the
    // verified union is computed.
    if (!out_path.empty()) {
        if (cfg.servers.empty() || !cfg.servers[0].api) {
            throw std::runtime_error("no reachable map server for --out");
        }
        QueryResponse raw = cfg.servers[0].api->query(req);
        write_file(out_path, query_response_to_json(raw));
    }

    VerifiedResult res = fetch_verified(cfg, req);
    nlohmann::json certs = nlohmann::json::array();
    for (const GeoCert& c : res.certs) {
        certs.push_back({{"hash", cert_hash(c).hex()},
                         {"subject", c.subject_uri},
                         {"issuer", c.issuer_id},
                         {"loc_verification", to_string(c.loc_verification)}});
    }
    nlohmann::json out{{"request_bytes", req.canonical_bytes().size()},
                       {"pairs", req.pairs.size()},
                       {"verified_servers", res.verified_servers},
                       {"certs", std::move(certs)}};
    std::cout << out.dump(2) << std::endl;
    return 0;
}

int cmd_check(const std::string& config_path, const std::string& object, double lat,
              double lon, double radius, double alt_min, double alt_max, bool has_alt) {
    ClientConfig cfg = load_client(config_path);
    std::optional<AltRange> alt;
    if (has_alt) alt = AltRange{alt_min, alt_max};
    try {
        CheckOutcome out = check(cfg, object, {lon, lat, 0}, radius, alt);
        std::cout << evidence_json_lines(out);
        switch (out.validation.decision) {
            case Decision::accept: return 0;
            case Decision::reject: return 2;
            case Decision::conflict: return 3;
        }
        return 4;
    } catch (const FetchError& e) {
        std::cout << "{\"type\":\"error\",\"kind\":\"infrastructure\",\"what\":\""
                  << e.what() << "\"}" << std::endl;
        return 4;
    }
}

int cmd_verify_proof(const std::string& response_path, const std::string& server_key_hex,
                     const std::string& root_hex) {
    QueryResponse resp = query_response_from_json(read_file(response_path));
    auto pk = public_key_from_hex(server_key_hex);
    if (!pk) throw std::runtime_error("bad --server-key");
    bool sig_ok = resp.proof.smh.verify(*pk);
    Hash32 root = resp.proof.smh.smt_root;
    if (!root_hex.empty()) {
        auto parsed = Hash32::from_hex(root_hex);
        if (!parsed) throw std::runtime_error("bad --root");
        root = *parsed;
    }
    VerifyOutcome outcome = verify_proof(EarthModel::wgs84(), resp.proof, root);
    bool bodies_ok = true;
    for (const Bytes& b : resp.certificates) {
        if (!outcome.certs.count(sha256(b))) bodies_ok = false;
    }
    nlohmann::json out{{"smh_signature", sig_ok},
                       {"proof", outcome.ok},
                       {"bodies_match", bodies_ok},
                       {"cert_hashes", outcome.certs.size()}};
    if (!outcome.ok) out["error"] = outcome.error;
    std::cout << out.dump(2) << std::endl;
    return sig_ok && outcome.ok && bodies_ok ? 0 : 1;
}

int cmd_trust_lint(const std::string& path) {
    try {
        auto entries = parse_trust_preference(EarthModel::wgs84(), read_file(path));
        std::cout << "{\"ok\": true, \"entries\": " << entries.size() << "}" << std::endl;
        return 0;
    } catch (const std::exception& e) {
        std::cout << "{\"ok\": false, \"error\": \"" << e.what() << "\"}" << std::endl;
        return 1;
    }
}

DensityMap load_density(const std::string& path) {
    if (path.empty()) return DensityMap::europe();
    return DensityMap::from_csv(read_file(path));
}

int cmd_seed_log(const std::string& dataset_path, const std::string& log_url) {
    std::string raw = read_file(dataset_path);
    Dataset d = dataset_from_bytes(Bytes(raw.begin(), raw.end()));
    auto api = make_http_log_api(log_url);
    size_t submitted = 0;
    for (GeoCert cert : d.certs) {
        cert.scts = {api->request_sct(precert_hash(cert))};
        sign_cert(cert, d.ca_key);
        api->submit_cert(canonical_encode(cert));
        ++submitted;
    }
    std::cout << "{\"submitted\": " << submitted << "}" << std::endl;
    return 0;
}

int cmd_gen_dataset(uint64_t seed, size_t count, const std::string& density_path,
                    const std::string& out_path) {
    DatasetParams params;
    params.seed = seed;
    params.count = count;
    Dataset d = generate_dataset(params, load_density(density_path));
    Bytes b = dataset_to_bytes(d);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    std::cout << "{\"certs\": " << d.certs.size() << ", \"bytes\": " << b.size()
              << ", \"out\": \"" << out_path << "\"}" << std::endl;
    return 0;
}

BenchParams bench_params(uint64_t seed, size_t count) {
    BenchParams p;
    p.dataset.seed = seed;
    p.dataset.count = count;
    return p;
}

int cmd_bench_ingest(uint64_t seed, size_t count, const std::string& batches,
                     const std::string& density_path, const std::string& out_path) {
    BenchParams params = bench_params(seed, count);
    auto rows = bench_ingest(params, load_density(density_path), parse_size_list(batches),
                             count);
    std::string csv = ingest_csv(rows, bench_meta(params, count));
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
    }
    return 0;
}

int cmd_bench_qps(uint64_t seed, size_t count, const std::string& workers, size_t queries,
                  const std::string& density_path, const std::string& out_path) {
    BenchParams params = bench_params(seed, count);
    BenchRig rig = build_rig(params, load_density(density_path));
    auto rows = bench_throughput(rig, params, parse_int_list(workers), queries);
    std::string csv = throughput_csv(rows, bench_meta(params, rig.dataset.certs.size()));
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
    }
    return 0;
}

int cmd_bench_latency(uint64_t seed, size_t count, size_t queries,
                      const std::string& density_path, const std::string& out_path,
                      const std::string& sizes_path, const std::string& depth_path) {
    BenchParams params = bench_params(seed, count);
    BenchRig rig = build_rig(params, load_density(density_path));
    auto samples = bench_latency(rig, params, queries);
    std::string meta = bench_meta(params, rig.dataset.certs.size());
    write_file(out_path, latency_cdf_csv(samples, meta));
    if (!sizes_path.empty()) write_file(sizes_path, size_cdf_csv(samples, meta));
    if (!depth_path.empty()) {
        write_file(depth_path, depth_histogram_csv(depth_histogram(*rig.server), meta));
    }
    std::vector<double> totals;
    for (const auto& s : samples) totals.push_back(s.total_us);
    std::cout << "{\"queries\": " << samples.size()
              << ", \"p95_total_us\": " << quantile(totals, 0.95) << "}" << std::endl;
    return 0;
}

int cmd_plot(const std::string& in_path, const std::string& out_path, const std::string& x,
             const std::string& ys, bool logy, const std::string& title) {
    std::vector<std::string> y_cols;
    std::istringstream in(ys);
    std::string field;
    while (std::getline(in, field, ',')) y_cols.push_back(field);
    std::string svg = plot_csv_to_svg(read_file(in_path), x, y_cols, logy,
                                      title.empty() ? in_path : title);
    write_file(out_path, svg);
    std::cout << "{\"out\": \"" << out_path << "\"}" << std::endl;
    return 0;
}
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GECKO geographic verifiable map"};
    app.require_subcommand(1);

    std::string config, out, object, response, server_key, root_hex, density, batches,
        workers, plot_in, plot_x, plot_y, plot_title;
    double lat = 0, lon = 0, radius = 10, alt_min = 0, alt_max = 0;
    uint64_t seed = 1;
    size_t count = 1000, queries = 1000;
    bool logy = false;

    auto* keygen = app.add_subcommand("keygen", "generate an Ed25519 signing key");
    keygen->add_option("--out", out, "write the key JSON here instead of stdout");

    auto* logsrv = app.add_subcommand("log-server", "run the append-only GeoCert log");
    logsrv->add_option("--config", config, "log server config JSON")->required();

    auto* mapsrv = app.add_subcommand("map-server", "run the geographic map server");
    mapsrv->add_option("--config", config, "map server config JSON")->required();

    auto* query = app.add_subcommand("query", "fetch verified certificates for a circle");
    query->add_option("--config", config)->required();
    query->add_option("--lat", lat)->required();
    query->add_option("--lon", lon)->required();
    query->add_option("--radius", radius)->capture_default_str();
    auto* q_alt_min = query->add_option("--alt-min", alt_min);
    auto* q_alt_max = query->add_option("--alt-max", alt_max)->needs(q_alt_min);
    query->add_option("--out", out, "save the first raw response JSON");

    auto* check_cmd = app.add_subcommand("check", "validate an object at a location");
    check_cmd->add_option("--config", config)->required();
    check_cmd->add_option("--object", object, "gecko or domain URI")->required();
    check_cmd->add_option("--lat", lat)->required();
    check_cmd->add_option("--lon", lon)->required();
    check_cmd->add_option("--radius", radius)->capture_default_str();
    auto* c_alt_min = check_cmd->add_option("--alt-min", alt_min);
    auto* c_alt_max = check_cmd->add_option("--alt-max", alt_max)->needs(c_alt_min);

    auto* verify = app.add_subcommand("verify-proof", "re-verify a saved response offline");
    verify->add_option("--response", response, "saved response JSON")->required();
    verify->add_option("--server-key", server_key, "map server public key hex")->required();
    verify->add_option("--root", root_hex, "expected SMT root (defaults to the SMH's)");

    auto* trust = app.add_subcommand("trust", "lint a trust preference file");
    trust->add_option("--lint", config, "trust preference JSON")->required();

    auto* gen = app.add_subcommand("gen-dataset", "generate a synthetic corpus");
    auto* gen_seed = gen->add_option("--seed", seed)->capture_default_str();
    auto* gen_count = gen->add_option("--count", count)->capture_default_str();
    auto* gen_density = gen->add_option("--density", density, "density CSV (default: synthetic Europe)");
    gen->add_option("--out", out)->required();
    std::string bench_config;
    gen->add_option("--config", bench_config, "JSON defaults for seed/count/density");

    std::string dataset_path, log_url;
    auto* seedlog = app.add_subcommand("seed-log", "submit a generated corpus to a log");
    seedlog->add_option("--dataset", dataset_path)->required();
    seedlog->add_option("--log", log_url, "log server base URL")->required();

    auto* bench = app.add_subcommand("bench", "evaluation harness");
    bench->require_subcommand(1);
    auto* b_ingest = bench->add_subcommand("ingest", "per-cert ingest time by batch size");
    auto* bi_seed = b_ingest->add_option("--seed", seed)->capture_default_str();
    auto* bi_count = b_ingest->add_option("--count", count, "certs per batch-size point")->capture_default_str();
    auto* bi_batches = b_ingest->add_option("--batches", batches)->default_val("1,10,100,1000");
    auto* bi_density = b_ingest->add_option("--density", density);
    b_ingest->add_option("--out", out);
    b_ingest->add_option("--config", bench_config, "JSON defaults");

    auto* b_qps = bench->add_subcommand("qps", "query throughput by worker count");
    auto* bq_seed = b_qps->add_option("--seed", seed)->capture_default_str();
    auto* bq_count = b_qps->add_option("--count", count, "corpus size")->capture_default_str();
    auto* bq_workers = b_qps->add_option("--workers", workers)->default_val("1,2,4,8");
    auto* bq_queries = b_qps->add_option("--queries", queries)->capture_default_str();
    auto* bq_density = b_qps->add_option("--density", density);
    b_qps->add_option("--out", out);
    b_qps->add_option("--config", bench_config, "JSON defaults");

    auto* b_lat = bench->add_subcommand("latency", "latency and size CDFs");
    auto* bl_seed = b_lat->add_option("--seed", seed)->capture_default_str();
    auto* bl_count = b_lat->add_option("--count", count, "corpus size")->capture_default_str();
    auto* bl_queries = b_lat->add_option("--queries", queries)->capture_default_str();
    auto* bl_density = b_lat->add_option("--density", density);
    b_lat->add_option("--out", out)->required();
    std::string sizes_out, depth_out;
    b_lat->add_option("--sizes-out", sizes_out);
    b_lat->add_option("--depth-out", depth_out);
    b_lat->add_option("--config", bench_config, "JSON defaults");

    auto* plot = app.add_subcommand("plot", "render a CSV as an SVG line chart");
    plot->add_option("--in", plot_in)->required();
    plot->add_option("--out", out)->required();
    auto* plot_x_opt = plot->add_option("--x", plot_x);
    auto* plot_y_opt = plot->add_option("--y", plot_y, "comma-separated y columns");
    plot->add_flag("--logy", logy);
    auto* plot_title_opt = plot->add_option("--title", plot_title);
    plot->add_option("--seed", seed, "unused; uniform interface with bench verbs");
    plot->add_option("--config", bench_config, "JSON defaults for x/y/logy/title");

    CLI11_PARSE(app, argc, argv);

    // --config supplies defaults; explicit flags win.
    if (!bench_config.empty()) {
        try {
            auto doc = nlohmann::json::parse(read_file(bench_config));
            auto fill = [&](CLI::Option* opt, auto& target, const char* key) {
                using T = std::decay_t<decltype(target)>;
                if (opt && opt->count() == 0 && doc.contains(key)) {
                    target = doc.at(key).get<T>();
                }
            };
            fill(gen_seed, seed, "seed");
            fill(gen_count, count, "count");
            fill(gen_density, density, "density");
            fill(bi_seed, seed, "seed");
            fill(bi_count, count, "count");
            fill(bi_batches, batches, "batches");
            fill(bi_density, density, "density");
            fill(bq_seed, seed, "seed");
            fill(bq_count, count, "count");
            fill(bq_workers, workers, "workers");
            fill(bq_queries, queries, "queries");
            fill(bq_density, density, "density");
            fill(bl_seed, seed, "seed");
            fill(bl_count, count, "count");
            fill(bl_queries, queries, "queries");
            fill(bl_density, density, "density");
            fill(plot_x_opt, plot_x, "x");
            fill(plot_y_opt, plot_y, "y");
            fill(plot_title_opt, plot_title, "title");
            if (!logy && doc.contains("logy")) logy = doc.at("logy").get<bool>();
        } catch (const std::exception& e) {
            std::cerr << "error: bad --config: " << e.what() << std::endl;
            return 4;
        }
    }
    if (*plot && (plot_x.empty() || plot_y.empty())) {
        std::cerr << "error: plot needs --x and --y (flags or config)" << std::endl;
        return 4;
    }

    try {
        if (*keygen) return cmd_keygen(out);
        if (*logsrv) return cmd_log_server(config);
        if (*mapsrv) return cmd_map_server(config);
        if (*query) {
            return cmd_query(config, lat, lon, radius, alt_min, alt_max,
                             q_alt_max->count() > 0, out);
        }
        if (*check_cmd) {
            return cmd_check(config, object, lat, lon, radius, alt_min, alt_max,
                             c_alt_max->count() > 0);
        }
        if (*verify) return cmd_verify_proof(response, server_key, root_hex);
        if (*trust) return cmd_trust_lint(config);
        if (*gen) return cmd_gen_dataset(seed, count, density, out);
        if (*seedlog) return cmd_seed_log(dataset_path, log_url);
        if (*b_ingest) return cmd_bench_ingest(seed, count, batches, density, out);
        if (*b_qps) return cmd_bench_qps(seed, count, workers, queries, density, out);
        if (*b_lat) {
            return cmd_bench_latency(seed, count, queries, density, out, sizes_out,
                                     depth_out);
        }
        if (*plot) return cmd_plot(plot_in, out, plot_x, plot_y, logy, plot_title);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 4;
    }
    return 1;
}
