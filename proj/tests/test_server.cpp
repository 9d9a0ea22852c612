#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "gecko/benchkit.hpp"
#include "gecko/transport.hpp"

using namespace gecko;

namespace {
SigningKey key_of(uint8_t fill) {
    std::array<uint8_t, 32> seed;
    seed.fill(fill);
    return SigningKey::from_seed(seed);
}

struct Fixture {
    uint64_t now = 1750000000;
    SigningKey log_key = key_of(1);
    SigningKey ca_key = key_of(2);
    SigningKey subject_key = key_of(3);
    std::shared_ptr<LogServerCore> log;
    std::shared_ptr<MapServerCore> server;

    Fixture() {
        log = std::make_shared<LogServerCore>("log-1", log_key, 3600,
                                              [this] { return now; });
        ServerConfig cfg;
        cfg.signing_key_hex = key_of(9).seed_hex();
        cfg.f_ingest = 0.1;
        cfg.source_logs.push_back({"log-1", "inproc:log-1", log->public_key()});
        server = std::make_shared<MapServerCore>(
            cfg, std::vector<std::shared_ptr<LogApi>>{make_inproc_log_api(log)},
            [this] { return now; });
    }

    GeoCert make_cert(uint64_t serial, double lon, double lat, double alt_base,
                      const std::string& subject = "") {
        GeoCert c;
        c.subject_uri =
            subject.empty() ? "gecko://site-" + std::to_string(serial) + ".example" : subject;
        c.issuer_id = "test-ca";
        c.serial = serial;
        double d = 0.00008;  // roughly a 10 m footprint
        c.volume.frustums = {PolygonFrustum{{{lon - d, lat - d, 0},
                                             {lon + d, lat - d, 0},
                                             {lon + d, lat + d, 0},
                                             {lon - d, lat + d, 0}},
                                            alt_base,
                                            alt_base + 3}};
        c.loc_verification = LocVerification::in_person;
        c.not_before = 1700000000;
        c.not_after = 1900000000;
        c.public_key.assign(subject_key.public_key().begin(),
                            subject_key.public_key().end());
        return c;
    }

    Hash32 submit(GeoCert cert) {
        cert.scts = {log->request_sct(precert_hash(cert))};
        sign_cert(cert, ca_key);
        Bytes canonical = canonical_encode(cert);
        log->submit_cert(canonical);
        return sha256(canonical);
    }

    QueryRequest query_at(double lon, double lat) const {
        QueryRequest req;
        req.pairs = cover_circle(server->model(), {lon, lat, 0}, 10.0, std::nullopt, {1.0});
        std::sort(req.pairs.begin(), req.pairs.end());
        return req;
    }
};
}  // namespace

TEST_CASE("server config parsing, validation and env overrides") {
    ServerConfig cfg;
    cfg.signing_key_hex = key_of(5).seed_hex();
    cfg.source_logs.push_back({"log-1", "http://127.0.0.1:9", key_of(6).public_key()});
    cfg.ca_keys["test-ca"] = key_of(7).public_key();
    std::string text = server_config_to_json(cfg);
    ServerConfig back = server_config_from_json(text);
    CHECK(back.listen == cfg.listen);
    CHECK(back.f_ingest == cfg.f_ingest);
    REQUIRE(back.source_logs.size() == 1);
    CHECK(back.source_logs[0].log_id == "log-1");
    CHECK(back.source_logs[0].public_key == cfg.source_logs[0].public_key);
    CHECK(back.ca_keys.at("test-ca") == cfg.ca_keys.at("test-ca"));

    setenv("GECKO_LISTEN", "0.0.0.0:9999", 1);
    setenv("GECKO_STORAGE", "/tmp/gecko-test-storage", 1);
    apply_env_overrides(back);
    CHECK(back.listen == "0.0.0.0:9999");
    CHECK(back.storage_path == "/tmp/gecko-test-storage");
    unsetenv("GECKO_LISTEN");
    unsetenv("GECKO_STORAGE");

    ServerConfig bad;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // no sources
    bad.source_logs.push_back({"log-1", "", key_of(6).public_key()});
    bad.f_ingest = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("query request canonical form") {
    Fixture fx;
    QueryRequest req = fx.query_at(8.5417, 47.3769);
    Bytes b = req.canonical_bytes();
    CHECK(b.size() == 1 + 11 * req.pairs.size());
    QueryRequest back = QueryRequest::from_canonical(b);
    CHECK(back.pairs == req.pairs);
}

TEST_CASE("ingest cycle: empty, single cert, liveness") {
    Fixture fx;
    Hash32 empty_root = fx.server->latest_smh().smt_root;
    CHECK(empty_root == default_hash());

    // Zero new entries: fresh SMH, unchanged root, advanced timestamp.
    fx.now += 10;
    IngestReport rep0 = fx.server->ingest_cycle();
    CHECK(rep0.new_certs == 0);
    CHECK(fx.server->latest_smh().smt_root == empty_root);
    CHECK(fx.server->latest_smh().timestamp == fx.now);
    CHECK(fx.server->latest_smh().sources.size() == 1);

    // One certificate becomes queryable after one cycle (liveness).
    GeoCert cert = fx.make_cert(1, 8.5417, 47.3769, 420);
    Hash32 h = fx.submit(cert);
    fx.now += 10;
    IngestReport rep1 = fx.server->ingest_cycle();
    CHECK(rep1.new_certs == 1);
    CHECK(!(fx.server->latest_smh().smt_root == empty_root));

    QueryResponse resp = fx.server->handle_query(fx.query_at(8.5417, 47.3769));
    auto outcome =
        verify_proof(fx.server->model(), resp.proof, resp.proof.smh.smt_root);
    REQUIRE(outcome.ok);
    CHECK(outcome.certs.count(h));
    REQUIRE(resp.certificates.size() == 1);
    CHECK(sha256(resp.certificates[0]) == h);

    // Absence in an empty region.
    QueryResponse far = fx.server->handle_query(fx.query_at(-70.0, -30.0));
    auto far_outcome =
        verify_proof(fx.server->model(), far.proof, far.proof.smh.smt_root);
    REQUIRE(far_outcome.ok);
    CHECK(far_outcome.certs.empty());
    CHECK(far.certificates.empty());
}

TEST_CASE("query validation errors") {
    Fixture fx;
    CHECK_THROWS_AS(fx.server->handle_query({}), QueryError);

    QueryRequest big;
    for (uint64_t i = 0; i < 65; ++i) {
        big.pairs.push_back({BitString(i, 30), BitString()});
    }
    CHECK_THROWS_AS(fx.server->handle_query(big), QueryError);

    QueryRequest nested;
    nested.pairs.push_back({*BitString::parse("01"), BitString()});
    nested.pairs.push_back({*BitString::parse("011"), BitString()});
    CHECK_THROWS_AS(fx.server->handle_query(nested), QueryError);

    QueryRequest invalid;
    invalid.pairs.push_back({BitString(0, 52), BitString()});
    CHECK_THROWS_AS(fx.server->handle_query(invalid), QueryError);
}

TEST_CASE("SCT-less and tampered submissions never reach the tree") {
    Fixture fx;
    GeoCert no_sct = fx.make_cert(1, 8.5, 47.3, 100);
    sign_cert(no_sct, fx.ca_key);
    fx.log->submit_cert(canonical_encode(no_sct));  // the stub logs it
    IngestReport rep = fx.server->ingest_cycle();
    CHECK(rep.new_certs == 0);
    CHECK(rep.rejected == 1);  // no valid SCT from a configured source
}

TEST_CASE("revocation removes the certificate and is served") {
    Fixture fx;
    GeoCert cert = fx.make_cert(1, 8.5417, 47.3769, 420);
    Hash32 h = fx.submit(cert);
    fx.server->ingest_cycle();
    Hash32 root_with = fx.server->latest_smh().smt_root;

    RevocationRecord rec;
    rec.cert_hash = h;
    rec.revoked_at = fx.now;
    rec.issuer_id = "test-ca";
    rec.sign(fx.ca_key);
    fx.log->submit_revocation(rec);
    IngestReport rep = fx.server->ingest_cycle();
    CHECK(rep.new_revocations == 1);
    CHECK(!(fx.server->latest_smh().smt_root == root_with));
    CHECK(fx.server->latest_smh().smt_root == default_hash());  // tree emptied

    QueryResponse resp = fx.server->handle_query(fx.query_at(8.5417, 47.3769));
    auto outcome = verify_proof(fx.server->model(), resp.proof, resp.proof.smh.smt_root);
    REQUIRE(outcome.ok);
    CHECK(outcome.certs.empty());
    REQUIRE(resp.revocations.size() == 1);
    CHECK(resp.revocations[0] == rec);
}

TEST_CASE("smh history, consistency endpoints, replay fidelity") {
    Fixture fx;
    for (uint64_t i = 0; i < 6; ++i) {
        fx.submit(fx.make_cert(i, 8.5 + 0.001 * static_cast<double>(i), 47.3, 100));
        fx.now += 5;
        fx.server->ingest_cycle();
    }
    size_t n = fx.server->smh_count();
    CHECK(n >= 7);  // boot head plus one per cycle

    // Every SMH is a consistency-tree leaf; proofs verify between versions.
    for (size_t a = 1; a <= n; ++a) {
        for (size_t b = a; b <= n; b += 2) {
            auto bundle = fx.server->consistency(a, b);
            CHECK(verify_consistency(bundle.root_from, a, bundle.root_to, b, bundle.proof));
        }
    }
    auto head = fx.server->consistency_head();
    CHECK(head.verify(fx.server->public_key()));
    CHECK(head.size == n);

    // Auditor property: replaying the cited prefixes reproduces the root.
    SignedMapHead smh = fx.server->latest_smh();
    Hash32 replayed = replay_smh_root(fx.server->model(), smh,
                                      {make_inproc_log_api(fx.log)}, 0.1);
    CHECK(replayed == smh.smt_root);

    // A head claiming the same sources with a different root is misbehavior.
    SignedMapHead forged = smh;
    forged.smt_root[0] ^= 1;
    CHECK(!(replay_smh_root(fx.server->model(), forged, {make_inproc_log_api(fx.log)},
                            0.1) == forged.smt_root));

    // get_cert returns byte-exact bodies.
    QueryResponse resp = fx.server->handle_query(fx.query_at(8.5, 47.3));
    REQUIRE(!resp.certificates.empty());
    Hash32 h = sha256(resp.certificates[0]);
    auto body = fx.server->get_cert(h);
    REQUIRE(body.has_value());
    CHECK(*body == resp.certificates[0]);
    Hash32 unknown;
    unknown.fill(0xee);
    CHECK(!fx.server->get_cert(unknown).has_value());
}

TEST_CASE("serving table immutability under concurrent ingest") {
    Fixture fx;
    for (uint64_t i = 0; i < 40; ++i) {
        fx.submit(fx.make_cert(i, 8.5 + 0.0005 * static_cast<double>(i), 47.3, 50));
    }
    fx.server->ingest_cycle();

    std::atomic<bool> stop{false};
    std::atomic<size_t> failures{0};
    std::atomic<size_t> queries{0};
    std::thread reader([&] {
        QueryRequest req = fx.query_at(8.505, 47.3);
        while (!stop.load()) {
            QueryResponse resp = fx.server->handle_query(req);
            // Each response must be self-consistent against its own head.
            auto outcome =
                verify_proof(fx.server->model(), resp.proof, resp.proof.smh.smt_root);
            if (!outcome.ok || !resp.proof.smh.verify(fx.server->public_key())) {
                failures.fetch_add(1);
            }
            queries.fetch_add(1);
        }
    });
    for (uint64_t i = 40; i < 60; ++i) {
        fx.submit(fx.make_cert(i, 8.5 + 0.0005 * static_cast<double>(i), 47.3, 50));
        fx.server->ingest_cycle();
    }
    stop.store(true);
    reader.join();
    CHECK(failures.load() == 0);
    CHECK(queries.load() > 0);
}

TEST_CASE("storage path persists entries across restarts") {
    std::string dir = "/tmp/gecko-test-persist";
    std::filesystem::remove_all(dir);
    Hash32 root_before;
    SigningKey server_key = key_of(9);
    {
        Fixture fx;
        ServerConfig cfg = fx.server->config();
        cfg.storage_path = dir;
        auto server = std::make_shared<MapServerCore>(
            cfg, std::vector<std::shared_ptr<LogApi>>{make_inproc_log_api(fx.log)},
            [&fx] { return fx.now; });
        fx.submit(fx.make_cert(1, 8.5417, 47.3769, 420));
        server->ingest_cycle();
        root_before = server->latest_smh().smt_root;
    }
    {
        Fixture fx;  // fresh empty log; state must come from storage
        ServerConfig cfg = fx.server->config();
        cfg.storage_path = dir;
        auto server = std::make_shared<MapServerCore>(
            cfg, std::vector<std::shared_ptr<LogApi>>{make_inproc_log_api(fx.log)},
            [&fx] { return fx.now; });
        CHECK(server->latest_smh().smt_root == root_before);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("HTTP endpoints round-trip the wire formats") {
    Fixture fx;
    Hash32 h = fx.submit(fx.make_cert(1, 8.5417, 47.3769, 420));
    fx.server->ingest_cycle();

    auto log_http = serve_log_http(fx.log, "127.0.0.1", 0);
    auto map_http = serve_map_http(fx.server, "127.0.0.1", 0);
    auto log_api = make_http_log_api("http://127.0.0.1:" + std::to_string(log_http->port()));
    auto map_api = make_http_map_api("http://127.0.0.1:" + std::to_string(map_http->port()));

    CHECK(log_api->log_id() == "log-1");
    STH sth = log_api->get_sth();
    CHECK(sth.verify(fx.log->public_key()));
    CHECK(sth.tree_size == 1);
    auto entries = log_api->get_entries(0, 1);
    REQUIRE(entries.size() == 1);
    CHECK(sha256(entries[0].payload) == h);
    auto incl = log_api->get_inclusion(0, 1);
    CHECK(verify_inclusion(log_leaf_hash(entries[0].leaf_bytes()), 0, 1, incl, sth.root));

    // Submit over HTTP.
    GeoCert cert2 = fx.make_cert(2, 8.54, 47.37, 100);
    cert2.scts = {fx.log->request_sct(precert_hash(cert2))};
    sign_cert(cert2, fx.ca_key);
    SCT sct = log_api->submit_cert(canonical_encode(cert2));
    CHECK(sct.verify(fx.log->public_key()));
    CHECK(log_api->get_consistency(1, 2).size() >= 1);

    SignedMapHead smh = map_api->get_smh();
    CHECK(smh.verify(fx.server->public_key()));
    CHECK(smh == fx.server->latest_smh());
    CHECK(map_api->get_smh_at(0).smt_root == default_hash());

    QueryRequest req = fx.query_at(8.5417, 47.3769);
    QueryResponse resp = map_api->query(req);
    auto outcome = verify_proof(fx.server->model(), resp.proof, resp.proof.smh.smt_root);
    REQUIRE(outcome.ok);
    CHECK(outcome.certs.count(h));

    auto bundle = map_api->get_consistency(1, fx.server->smh_count());
    CHECK(verify_consistency(bundle.root_from, bundle.from, bundle.root_to, bundle.to,
                             bundle.proof));
    CHECK(map_api->get_consistency_head().verify(fx.server->public_key()));

    auto body = map_api->get_cert(h);
    REQUIRE(body.has_value());
    CHECK(sha256(*body) == h);
    Hash32 unknown;
    unknown.fill(0xcc);
    CHECK(!map_api->get_cert(unknown).has_value());

    // JSON round-trips.
    CHECK(sth_from_json(sth_to_json(sth)) == sth);
    CHECK(smh_from_json(smh_to_json(smh)) == smh);
    std::string resp_json = query_response_to_json(resp);
    QueryResponse resp_back = query_response_from_json(resp_json);
    CHECK(resp_back.proof.openings == resp.proof.openings);
    CHECK(resp_back.proof.boundary_hashes == resp.proof.boundary_hashes);
    CHECK(resp_back.certificates == resp.certificates);
    CHECK_THROWS_AS(query_response_from_json("{"), DecodeError);
}
