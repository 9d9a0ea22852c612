#include "gecko/transport.hpp"

#include <httplib.h>
#include <json.hpp>

#include <thread>

namespace gecko {

using nlohmann::json;

namespace {
Hash32 hash_from(const json& j) {
    auto h = Hash32::from_hex(j.get<std::string>());
    if (!h) throw DecodeError("bad hash hex");
    return *h;
}

Signature sig_from(const json& j) {
    auto s = signature_from_b64(j.get<std::string>());
    if (!s) throw DecodeError("bad signature base64");
    return *s;
}

BitStringPair pair_from(const json& j) {
    auto p = BitStringPair::from_hex(j.get<std::string>());
    if (!p) throw DecodeError("bad pair hex");
    return *p;
}

json sth_json(const STH& sth) {
    return {{"timestamp", sth.timestamp},
            {"tree_size", sth.tree_size},
            {"root", sth.root.hex()},
            {"signature", signature_b64(sth.signature)}};
}

STH sth_parse(const json& j) {
    STH sth;
    sth.timestamp = j.at("timestamp").get<uint64_t>();
    sth.tree_size = j.at("tree_size").get<uint64_t>();
    sth.root = hash_from(j.at("root"));
    sth.signature = sig_from(j.at("signature"));
    return sth;
}

json smh_json(const SignedMapHead& smh) {
    json sources = json::array();
    for (const auto& [log_id, sth] : smh.sources) {
        sources.push_back({{"log_id", log_id}, {"sth", sth_json(sth)}});
    }
    return {{"smt_root", smh.smt_root.hex()},
            {"timestamp", smh.timestamp},
            {"sources", std::move(sources)},
            {"signature", signature_b64(smh.signature)}};
}

SignedMapHead smh_parse(const json& j) {
    SignedMapHead smh;
    smh.smt_root = hash_from(j.at("smt_root"));
    smh.timestamp = j.at("timestamp").get<uint64_t>();
    for (const json& s : j.at("sources")) {
        smh.sources.push_back({s.at("log_id").get<std::string>(), sth_parse(s.at("sth"))});
    }
    smh.signature = sig_from(j.at("signature"));
    return smh;
}

json sct_json(const SCT& sct) {
    return {{"log_id", sct.log_id},
            {"timestamp", sct.timestamp},
            {"cert_hash", sct.cert_hash.hex()},
            {"signature", signature_b64(sct.signature)}};
}

SCT sct_parse(const json& j) {
    SCT sct;
    sct.log_id = j.at("log_id").get<std::string>();
    sct.timestamp = j.at("timestamp").get<uint64_t>();
    sct.cert_hash = hash_from(j.at("cert_hash"));
    sct.signature = sig_from(j.at("signature"));
    return sct;
}

json revocation_json(const RevocationRecord& rec) {
    return {{"cert_hash", rec.cert_hash.hex()},
            {"revoked_at", rec.revoked_at},
            {"issuer_id", rec.issuer_id},
            {"signature", signature_b64(rec.signature)}};
}

RevocationRecord revocation_parse(const json& j) {
    RevocationRecord rec;
    rec.cert_hash = hash_from(j.at("cert_hash"));
    rec.revoked_at = j.at("revoked_at").get<uint64_t>();
    rec.issuer_id = j.at("issuer_id").get<std::string>();
    rec.signature = sig_from(j.at("signature"));
    return rec;
}

json proof_json(const CompletenessProof& proof) {
    json qp = json::array();
    for (const BitStringPair& p : proof.query_pairs) qp.push_back(p.hex());
    json openings = json::array();
    for (const auto& [pair, certs] : proof.openings) {
        json list = json::array();
        for (const Hash32& c : certs) list.push_back(c.hex());
        openings.push_back(json::array({pair.hex(), std::move(list)}));
    }
    json boundary = json::array();
    for (const auto& [pair, hash] : proof.boundary_hashes) {
        boundary.push_back(json::array({pair.hex(), hash.hex()}));
    }
    return {{"query_pairs", std::move(qp)},
            {"openings", std::move(openings)},
            {"boundary_hashes", std::move(boundary)},
            {"smh", smh_json(proof.smh)}};
}

CompletenessProof proof_parse(const json& j) {
    CompletenessProof proof;
    for (const json& p : j.at("query_pairs")) proof.query_pairs.push_back(pair_from(p));
    for (const json& o : j.at("openings")) {
        if (!o.is_array() || o.size() != 2) throw DecodeError("bad opening entry");
        std::vector<Hash32> certs;
        for (const json& c : o[1]) certs.push_back(hash_from(c));
        proof.openings.push_back({pair_from(o[0]), std::move(certs)});
    }
    for (const json& b : j.at("boundary_hashes")) {
        if (!b.is_array() || b.size() != 2) throw DecodeError("bad boundary entry");
        proof.boundary_hashes.push_back({pair_from(b[0]), hash_from(b[1])});
    }
    proof.smh = smh_parse(j.at("smh"));
    return proof;
}

json query_response_json(const QueryResponse& resp) {
    json certs = json::array();
    for (const Bytes& c : resp.certificates) certs.push_back(base64_encode(c));
    json revs = json::array();
    for (const RevocationRecord& r : resp.revocations) revs.push_back(revocation_json(r));
    return {{"proof", proof_json(resp.proof)},
            {"certificates", std::move(certs)},
            {"revocations", std::move(revs)}};
}

QueryResponse query_response_parse(const json& j) {
    QueryResponse resp;
    resp.proof = proof_parse(j.at("proof"));
    for (const json& c : j.at("certificates")) {
        auto b = base64_decode(c.get<std::string>());
        if (!b) throw DecodeError("bad certificate base64");
        resp.certificates.push_back(std::move(*b));
    }
    for (const json& r : j.at("revocations")) resp.revocations.push_back(revocation_parse(r));
    return resp;
}

json head_json(const SignedConsistencyHead& head) {
    return {{"root", head.root.hex()},
            {"size", head.size},
            {"signature", signature_b64(head.signature)}};
}

SignedConsistencyHead head_parse(const json& j) {
    SignedConsistencyHead head;
    head.root = hash_from(j.at("root"));
    head.size = j.at("size").get<uint64_t>();
    head.signature = sig_from(j.at("signature"));
    return head;
}

json parse_or_throw(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw DecodeError(std::string("bad JSON: ") + e.what());
    }
}

template <typename F>
auto convert_or_throw(const std::string& text, F&& fn) {
    json j = parse_or_throw(text);
    try {
        return fn(j);
    } catch (const json::exception& e) {
        throw DecodeError(std::string("bad wire object: ") + e.what());
    }
}
}  // namespace

std::string sth_to_json(const STH& sth) { return sth_json(sth).dump(); }
STH sth_from_json(const std::string& text) {
    return convert_or_throw(text, [](const json& j) { return sth_parse(j); });
}

std::string smh_to_json(const SignedMapHead& smh) { return smh_json(smh).dump(); }
SignedMapHead smh_from_json(const std::string& text) {
    return convert_or_throw(text, [](const json& j) { return smh_parse(j); });
}

std::string sct_to_json(const SCT& sct) { return sct_json(sct).dump(); }
SCT sct_from_json(const std::string& text) {
    return convert_or_throw(text, [](const json& j) { return sct_parse(j); });
}

std::string proof_to_json(const CompletenessProof& proof) { return proof_json(proof).dump(); }
CompletenessProof proof_from_json(const std::string& text) {
    return convert_or_throw(text, [](const json& j) { return proof_parse(j); });
}

std::string query_request_to_json(const QueryRequest& req) {
    json pairs = json::array();
    for (const BitStringPair& p : req.pairs) pairs.push_back(p.hex());
    return json{{"pairs", std::move(pairs)}}.dump();
}

QueryRequest query_request_from_json(const std::string& text) {
    return convert_or_throw(text, [](const json& j) {
        QueryRequest req;
        for (const json& p : j.at("pairs")) req.pairs.push_back(pair_from(p));
        return req;
    });
}

std::string query_response_to_json(const QueryResponse& resp) {
    return query_response_json(resp).dump();
}
QueryResponse query_response_from_json(const std::string& text) {
    return convert_or_throw(text, [](const json& j) { return query_response_parse(j); });
}

std::string consistency_bundle_to_json(const MapServerCore::ConsistencyBundle& b) {
    json proof = json::array();
    for (const Hash32& h : b.proof) proof.push_back(h.hex());
    return json{{"from", b.from},
                {"to", b.to},
                {"root_from", b.root_from.hex()},
                {"root_to", b.root_to.hex()},
                {"proof", std::move(proof)},
                {"head", head_json(b.head)}}
        .dump();
}

MapServerCore::ConsistencyBundle consistency_bundle_from_json(const std::string& text) {
    return convert_or_throw(text, [](const json& j) {
        MapServerCore::ConsistencyBundle b;
        b.from = j.at("from").get<uint64_t>();
        b.to = j.at("to").get<uint64_t>();
        b.root_from = hash_from(j.at("root_from"));
        b.root_to = hash_from(j.at("root_to"));
        for (const json& h : j.at("proof")) b.proof.push_back(hash_from(h));
        b.head = head_parse(j.at("head"));
        return b;
    });
}

std::string consistency_head_to_json(const SignedConsistencyHead& head) {
    return head_json(head).dump();
}
SignedConsistencyHead consistency_head_from_json(const std::string& text) {
    return convert_or_throw(text, [](const json& j) { return head_parse(j); });
}

namespace {
class InprocLogApi final : public LogApi {
public:
    explicit InprocLogApi(std::shared_ptr<LogServerCore> core) : core_(std::move(core)) {}
    std::string log_id() override { return core_->id(); }
    STH get_sth() override { return core_->sth(); }
    std::vector<LogEntry> get_entries(size_t start, size_t end) override {
        return core_->entries(start, end);
    }
    SCT request_sct(const Hash32& precert) override { return core_->request_sct(precert); }
    SCT submit_cert(const Bytes& canonical_cert) override {
        return core_->submit_cert(canonical_cert);
    }
    std::vector<Hash32> get_inclusion(size_t index, size_t tree_size) override {
        return core_->inclusion(index, tree_size);
    }
    std::vector<Hash32> get_consistency(size_t size_a, size_t size_b) override {
        return core_->consistency(size_a, size_b);
    }

private:
    std::shared_ptr<LogServerCore> core_;
};

class InprocMapApi final : public MapApi {
public:
    explicit InprocMapApi(std::shared_ptr<const MapServerCore> core)
        : core_(std::move(core)) {}
    QueryResponse query(const QueryRequest& req) override { return core_->handle_query(req); }
    SignedMapHead get_smh() override { return core_->latest_smh(); }
    SignedMapHead get_smh_at(size_t index) override { return core_->smh_at(index); }
    MapServerCore::ConsistencyBundle get_consistency(size_t from, size_t to) override {
        return core_->consistency(from, to);
    }
    SignedConsistencyHead get_consistency_head() override {
        return core_->consistency_head();
    }
    std::optional<Bytes> get_cert(const Hash32& hash) override {
        return core_->get_cert(hash);
    }

private:
    std::shared_ptr<const MapServerCore> core_;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string http_get(httplib::Client& client, const std::string& path) {
    auto res = client.Get(path);
    if (!res) throw TransportError("no response from " + path);
    if (res->status != 200) {
        throw TransportError("HTTP " + std::to_string(res->status) + " for " + path +
                             ": " + res->body);
    }
    return res->body;
}

std::string http_post(httplib::Client& client, const std::string& path,
                      const std::string& body) {
    auto res = client.Post(path, body, "application/json");
    if (!res) throw TransportError("no response from " + path);
    if (res->status != 200) {
        throw TransportError("HTTP " + std::to_string(res->status) + " for " + path +
                             ": " + res->body);
    }
    return res->body;
}

std::vector<Hash32> hash_list_from_json(const std::string& text, const char* key) {
    json j = parse_or_throw(text);
    std::vector<Hash32> out;
    for (const json& h : j.at(key)) out.push_back(hash_from(h));
    return out;
}

class HttpLogApi final : public LogApi {
public:
    explicit HttpLogApi(const std::string& base_url) : client_(base_url) {
        client_.set_connection_timeout(5);
        client_.set_read_timeout(30);
    }
    std::string log_id() override {
        json j = parse_or_throw(http_get(client_, "/v1/info"));
        return j.at("log_id").get<std::string>();
    }
    STH get_sth() override { return sth_from_json(http_get(client_, "/v1/sth")); }
    std::vector<LogEntry> get_entries(size_t start, size_t end) override {
        json j = parse_or_throw(http_get(client_, "/v1/entries?start=" +
                                                      std::to_string(start) +
                                                      "&end=" + std::to_string(end)));
        std::vector<LogEntry> out;
        for (const json& e : j.at("entries")) {
            LogEntry entry;
            std::string kind = e.at("kind").get<std::string>();
            if (kind == "cert") {
                entry.kind = LogEntry::Kind::cert;
            } else if (kind == "revocation") {
                entry.kind = LogEntry::Kind::revocation;
            } else {
                throw DecodeError("unknown entry kind " + kind);
            }
            auto b = base64_decode(e.at("data").get<std::string>());
            if (!b) throw DecodeError("bad entry base64");
            entry.payload = std::move(*b);
            out.push_back(std::move(entry));
        }
        return out;
    }
    SCT request_sct(const Hash32& precert) override {
        json body{{"precert_hash", precert.hex()}};
        return sct_from_json(http_post(client_, "/v1/request-sct", body.dump()));
    }
    SCT submit_cert(const Bytes& canonical_cert) override {
        json body{{"cert", base64_encode(canonical_cert)}};
        return sct_from_json(http_post(client_, "/v1/submit-cert", body.dump()));
    }
    std::vector<Hash32> get_inclusion(size_t index, size_t tree_size) override {
        return hash_list_from_json(
            http_get(client_, "/v1/inclusion?index=" + std::to_string(index) +
                                  "&size=" + std::to_string(tree_size)),
            "path");
    }
    std::vector<Hash32> get_consistency(size_t size_a, size_t size_b) override {
        return hash_list_from_json(
            http_get(client_, "/v1/log-consistency?a=" + std::to_string(size_a) +
                                  "&b=" + std::to_string(size_b)),
            "path");
    }

private:
    httplib::Client client_;
};

class HttpMapApi final : public MapApi {
public:
    explicit HttpMapApi(const std::string& base_url) : client_(base_url) {
        client_.set_connection_timeout(5);
        client_.set_read_timeout(30);
    }
    QueryResponse query(const QueryRequest& req) override {
        return query_response_from_json(
            http_post(client_, "/v1/query", query_request_to_json(req)));
    }
    SignedMapHead get_smh() override { return smh_from_json(http_get(client_, "/v1/smh")); }
    SignedMapHead get_smh_at(size_t index) override {
        return smh_from_json(http_get(client_, "/v1/smh?index=" + std::to_string(index)));
    }
    MapServerCore::ConsistencyBundle get_consistency(size_t from, size_t to) override {
        return consistency_bundle_from_json(
            http_get(client_, "/v1/consistency?from=" + std::to_string(from) +
                                  "&to=" + std::to_string(to)));
    }
    SignedConsistencyHead get_consistency_head() override {
        return consistency_head_from_json(http_get(client_, "/v1/consistency-head"));
    }
    std::optional<Bytes> get_cert(const Hash32& hash) override {
        auto res = client_.Get("/v1/cert/" + hash.hex());
        if (!res) throw TransportError("no response for cert fetch");
        if (res->status == 404) return std::nullopt;
        if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status));
        json j = parse_or_throw(res->body);
        auto b = base64_decode(j.at("cert").get<std::string>());
        if (!b) throw DecodeError("bad cert base64");
        return *b;
    }

private:
    httplib::Client client_;
};

class RunningServer final : public HttpServerHandle {
public:
    RunningServer(std::shared_ptr<httplib::Server> server, std::thread thread, int port)
        : server_(std::move(server)), thread_(std::move(thread)), port_(port) {}
    ~RunningServer() override {
        server_->stop();
        if (thread_.joinable()) thread_.join();
    }
    int port() const override { return port_; }

private:
    std::shared_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_;
};

std::unique_ptr<HttpServerHandle> run_server(std::shared_ptr<httplib::Server> server,
                                             const std::string& host, int port,
                                             int workers) {
    if (workers > 0) {
        server->new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
    }
    int bound = port;
    if (port == 0) {
        bound = server->bind_to_any_port(host);
        if (bound < 0) throw std::runtime_error("failed to bind " + host);
    } else {
        if (!server->bind_to_port(host, port)) {
            throw std::runtime_error("failed to bind " + host + ":" + std::to_string(port));
        }
    }
    std::thread thread([server] { server->listen_after_bind(); });
    server->wait_until_ready();
    return std::make_unique<RunningServer>(std::move(server), std::move(thread), bound);
}

size_t param_u64(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) throw std::invalid_argument(std::string("missing ") + name);
    return std::stoull(req.get_param_value(name));
}
}  // namespace

std::shared_ptr<LogApi> make_inproc_log_api(std::shared_ptr<LogServerCore> core) {
    return std::make_shared<InprocLogApi>(std::move(core));
}

std::shared_ptr<MapApi> make_inproc_map_api(std::shared_ptr<const MapServerCore> core) {
    return std::make_shared<InprocMapApi>(std::move(core));
}

std::shared_ptr<LogApi> make_http_log_api(const std::string& base_url) {
    return std::make_shared<HttpLogApi>(base_url);
}

std::shared_ptr<MapApi> make_http_map_api(const std::string& base_url) {
    return std::make_shared<HttpMapApi>(base_url);
}

std::unique_ptr<HttpServerHandle> serve_log_http(std::shared_ptr<LogServerCore> core,
                                                 const std::string& host, int port,
                                                 int workers) {
    auto server = std::make_shared<httplib::Server>();
    auto guard = [](auto fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const std::invalid_argument& e) {
                res.status = 400;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            } catch (const std::out_of_range& e) {
                res.status = 400;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            } catch (const std::exception& e) {
                res.status = 500;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            }
        };
    };

    server->Get("/v1/info", guard([core](const httplib::Request&, httplib::Response& res) {
        json j{{"log_id", core->id()},
               {"public_key", public_key_hex(core->public_key())},
               {"mmd_seconds", core->mmd_seconds()}};
        res.set_content(j.dump(), "application/json");
    }));
    server->Get("/v1/sth", guard([core](const httplib::Request&, httplib::Response& res) {
        res.set_content(sth_to_json(core->sth()), "application/json");
    }));
    server->Get("/v1/entries", guard([core](const httplib::Request& req,
                                            httplib::Response& res) {
        size_t start = param_u64(req, "start");
        size_t end = param_u64(req, "end");
        json entries = json::array();
        for (const LogEntry& e : core->entries(start, end)) {
            entries.push_back(
                {{"kind", e.kind == LogEntry::Kind::cert ? "cert" : "revocation"},
                 {"data", base64_encode(e.payload)}});
        }
        res.set_content(json{{"entries", std::move(entries)}}.dump(), "application/json");
    }));
    server->Post("/v1/request-sct", guard([core](const httplib::Request& req,
                                                 httplib::Response& res) {
        json j = parse_or_throw(req.body);
        auto pre = Hash32::from_hex(j.at("precert_hash").get<std::string>());
        if (!pre) throw std::invalid_argument("bad precert hash");
        res.set_content(sct_to_json(core->request_sct(*pre)), "application/json");
    }));
    server->Post("/v1/submit-cert", guard([core](const httplib::Request& req,
                                                 httplib::Response& res) {
        json j = parse_or_throw(req.body);
        auto cert = base64_decode(j.at("cert").get<std::string>());
        if (!cert) throw std::invalid_argument("bad cert base64");
        SCT sct = core->submit_cert(*cert);
        res.set_content(sct_to_json(sct), "application/json");
    }));
    server->Post("/v1/submit-revocation", guard([core](const httplib::Request& req,
                                                       httplib::Response& res) {
        json j = parse_or_throw(req.body);
        RevocationRecord rec;
        rec.cert_hash = hash_from(j.at("cert_hash"));
        rec.revoked_at = j.at("revoked_at").get<uint64_t>();
        rec.issuer_id = j.at("issuer_id").get<std::string>();
        rec.signature = sig_from(j.at("signature"));
        size_t index = core->submit_revocation(rec);
        res.set_content(json{{"index", index}}.dump(), "application/json");
    }));
    server->Get("/v1/inclusion", guard([core](const httplib::Request& req,
                                              httplib::Response& res) {
        auto path = core->inclusion(param_u64(req, "index"), param_u64(req, "size"));
        json out = json::array();
        for (const Hash32& h : path) out.push_back(h.hex());
        res.set_content(json{{"path", std::move(out)}}.dump(), "application/json");
    }));
    server->Get("/v1/log-consistency", guard([core](const httplib::Request& req,
                                                    httplib::Response& res) {
        auto path = core->consistency(param_u64(req, "a"), param_u64(req, "b"));
        json out = json::array();
        for (const Hash32& h : path) out.push_back(h.hex());
        res.set_content(json{{"path", std::move(out)}}.dump(), "application/json");
    }));

    return run_server(std::move(server), host, port, workers);
}

std::unique_ptr<HttpServerHandle> serve_map_http(std::shared_ptr<MapServerCore> core,
                                                 const std::string& host, int port,
                                                 int workers) {
    auto server = std::make_shared<httplib::Server>();
    auto guard = [](auto fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const QueryError& e) {
                res.status = e.code;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            } catch (const std::invalid_argument& e) {
                res.status = 400;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            } catch (const std::out_of_range& e) {
                res.status = 404;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            } catch (const std::exception& e) {
                res.status = 500;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            }
        };
    };

    server->Post("/v1/query", guard([core](const httplib::Request& req,
                                           httplib::Response& res) {
        QueryRequest qr = query_request_from_json(req.body);
        QueryResponse out = core->handle_query(qr);
        res.set_content(query_response_to_json(out), "application/json");
    }));
    server->Get("/v1/smh", guard([core](const httplib::Request& req,
                                        httplib::Response& res) {
        SignedMapHead smh = req.has_param("index")
                                ? core->smh_at(std::stoull(req.get_param_value("index")))
                                : core->latest_smh();
        res.set_content(smh_to_json(smh), "application/json");
    }));
    server->Get("/v1/consistency", guard([core](const httplib::Request& req,
                                                httplib::Response& res) {
        auto bundle = core->consistency(param_u64(req, "from"), param_u64(req, "to"));
        res.set_content(consistency_bundle_to_json(bundle), "application/json");
    }));
    server->Get("/v1/consistency-head", guard([core](const httplib::Request&,
                                                     httplib::Response& res) {
        res.set_content(consistency_head_to_json(core->consistency_head()),
                        "application/json");
    }));
    server->Get(R"(/v1/cert/([0-9a-f]{64}))", guard([core](const httplib::Request& req,
                                                           httplib::Response& res) {
        auto hash = Hash32::from_hex(req.matches[1].str());
        if (!hash) throw std::invalid_argument("bad hash");
        auto body = core->get_cert(*hash);
        if (!body) {
            res.status = 404;
            res.set_content(json{{"error", "unknown certificate"}}.dump(),
                            "application/json");
            return;
        }
        res.set_content(json{{"cert", base64_encode(*body)}}.dump(), "application/json");
    }));
    server->Get("/v1/healthz", guard([core](const httplib::Request&,
                                            httplib::Response& res) {
        json j{{"status", "ok"},
               {"smh_count", core->smh_count()},
               {"smt_root", core->latest_smh().smt_root.hex()}};
        res.set_content(j.dump(), "application/json");
    }));

    return run_server(std::move(server), host, port, workers);
}

}  // namespace gecko
