#include "gecko/client.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace gecko {

using nlohmann::json;

ClientConfig client_config_from_json(const std::string& json_text,
                                     const std::string& base_dir) {
    json doc = json::parse(json_text);
    ClientConfig cfg;
    cfg.quorum_m = doc.value("quorum_m", cfg.quorum_m);
    cfg.sct_quorum_n = doc.value("sct_quorum_n", cfg.sct_quorum_n);
    cfg.f_query = doc.value("f_query", cfg.f_query);
    cfg.exact_uri_match = doc.value("exact_uri_match", cfg.exact_uri_match);
    const json servers = doc.value("map_servers", json::array());
    for (const json& s : servers) {
        MapServerRef ref;
        ref.address = s.at("address").get<std::string>();
        auto pk = public_key_from_hex(s.at("public_key").get<std::string>());
        if (!pk) throw std::invalid_argument("bad map server public key");
        ref.public_key = *pk;
        if (ref.address.rfind("http", 0) == 0) ref.api = make_http_map_api(ref.address);
        cfg.servers.push_back(std::move(ref));
    }
    const json logs = doc.value("trusted_logs", json::array());
    for (const json& l : logs) {
        auto pk = public_key_from_hex(l.at("public_key").get<std::string>());
        if (!pk) throw std::invalid_argument("bad log public key");
        cfg.trusted_logs[l.at("log_id").get<std::string>()] = *pk;
    }
    const json cas = doc.value("ca_keys", json::object());
    for (const auto& [ca, key] : cas.items()) {
        auto pk = public_key_from_hex(key.get<std::string>());
        if (!pk) throw std::invalid_argument("bad CA public key for " + ca);
        cfg.ca_keys[ca] = *pk;
    }
    if (doc.contains("trust_preference")) {
        std::string path = doc["trust_preference"].get<std::string>();
        if (!path.empty() && path.front() != '/') path = base_dir + "/" + path;
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open trust preference file " + path);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        cfg.trust_preference = parse_trust_preference(cfg.model, text);
    }
    if (cfg.quorum_m < 1 || cfg.sct_quorum_n < 1) {
        throw std::invalid_argument("quorums must be at least 1");
    }
    return cfg;
}

QueryRequest build_query(const ClientConfig& cfg, const GeoPoint& center, double radius_m,
                         std::optional<AltRange> alt) {
    QueryRequest req;
    req.pairs = cover_circle(cfg.model, center, radius_m, alt, {cfg.f_query});
    std::sort(req.pairs.begin(), req.pairs.end());
    return req;
}

namespace {
size_t sct_count(const ClientConfig& cfg, const GeoCert& cert) {
    Hash32 pre = precert_hash(cert);
    std::set<std::string> logs;
    for (const SCT& sct : cert.scts) {
        auto it = cfg.trusted_logs.find(sct.log_id);
        if (it == cfg.trusted_logs.end()) continue;
        if (!(sct.cert_hash == pre)) continue;
        if (!sct.verify(it->second)) continue;
        logs.insert(sct.log_id);
    }
    return logs.size();
}
}  // namespace

VerifiedResult fetch_verified(const ClientConfig& cfg, const QueryRequest& req) {
    if (cfg.servers.empty()) throw FetchError("no map servers configured");

    std::vector<BitStringPair> want = req.pairs;
    std::sort(want.begin(), want.end());

    VerifiedResult result;
    std::map<Hash32, GeoCert> bodies;
    std::map<Hash32, RevocationRecord> revocations;

    for (const MapServerRef& ref : cfg.servers) {
        ServerEvidence ev;
        ev.address = ref.address;
        auto failed = [&](std::string why) {
            ev.ok = false;
            ev.error = std::move(why);
            result.evidence.push_back(ev);
        };
        if (!ref.api) {
            failed("no transport for address");
            continue;
        }
        QueryResponse resp;
        try {
            resp = ref.api->query(req);
        } catch (const std::exception& e) {
            failed(std::string("transport: ") + e.what());
            continue;
        }
        ev.smh = resp.proof.smh;
        if (!resp.proof.smh.verify(ref.public_key)) {
            failed("signed map head signature does not verify");
            continue;
        }
        if (resp.proof.query_pairs != want) {
            failed("proof answers different query pairs");
            continue;
        }
        VerifyOutcome outcome = verify_proof(cfg.model, resp.proof, resp.proof.smh.smt_root);
        if (!outcome.ok) {
            failed("proof: " + outcome.error);
            continue;
        }
        ev.proof_cert_hashes = outcome.certs.size();

        std::map<Hash32, GeoCert> server_bodies;
        bool body_problem = false;
        for (const Bytes& raw : resp.certificates) {
            Hash32 h = sha256(raw);
            if (!outcome.certs.count(h)) {
                failed("certificate body outside the proof openings");
                body_problem = true;
                break;
            }
            try {
                server_bodies[h] = canonical_decode(raw);
            } catch (const DecodeError& e) {
                failed(std::string("certificate body malformed: ") + e.what());
                body_problem = true;
                break;
            }
        }
        if (body_problem) continue;
        for (const Hash32& h : outcome.certs) {
            if (!server_bodies.count(h)) {
                failed("missing certificate body " + h.hex());
                body_problem = true;
                break;
            }
        }
        if (body_problem) continue;

        for (const RevocationRecord& rec : resp.revocations) {
            auto key = cfg.ca_keys.find(rec.issuer_id);
            if (key == cfg.ca_keys.end()) continue;  // unknown issuer: ignore
            if (!rec.verify(key->second)) continue;
            revocations.emplace(rec.cert_hash, rec);
        }

        ev.ok = true;
        result.evidence.push_back(ev);
        ++result.verified_servers;
        for (auto& [h, cert] : server_bodies) bodies.emplace(h, std::move(cert));
    }

    if (result.verified_servers < cfg.quorum_m) {
        throw FetchError("only " + std::to_string(result.verified_servers) + " of " +
                         std::to_string(cfg.quorum_m) + " required responses verified");
    }

    for (auto& [h, cert] : bodies) {
        if (revocations.count(h)) {
            result.applied_revocations.push_back(revocations.at(h));
            continue;
        }
        if (sct_count(cfg, cert) < cfg.sct_quorum_n) {
            result.dropped_sct_quorum.insert(h);
            continue;
        }
        result.hashes.insert(h);
        result.certs.push_back(std::move(cert));
    }
    return result;
}

std::vector<GeoCert> filter_exact(const std::vector<GeoCert>& certs,
                                  const PolygonFrustum& query_volume) {
    std::vector<GeoCert> out;
    for (const GeoCert& cert : certs) {
        for (const PolygonFrustum& f : cert.volume.frustums) {
            if (frustums_intersect(f, query_volume)) {
                out.push_back(cert);
                break;
            }
        }
    }
    return out;
}

CheckOutcome check(const ClientConfig& cfg, const std::string& object_identity,
                   const GeoPoint& center, double radius_m, std::optional<AltRange> alt) {
    CheckOutcome outcome;
    outcome.request = build_query(cfg, center, radius_m, alt);
    outcome.query_volume = circle_frustum(cfg.model, center, radius_m, alt);
    outcome.fetched = fetch_verified(cfg, outcome.request);
    std::vector<GeoCert> filtered = filter_exact(outcome.fetched.certs, outcome.query_volume);
    for (const GeoCert& cert : filtered) outcome.filtered.push_back(cert_hash(cert));
    outcome.validation =
        validate_object(cfg.model, object_identity, filtered, cfg.trust_preference,
                        VolumeSpec{{outcome.query_volume}}, cfg.exact_uri_match);
    return outcome;
}

std::string evidence_json_lines(const CheckOutcome& outcome) {
    std::string out;
    for (const ServerEvidence& ev : outcome.fetched.evidence) {
        json j{{"type", "server"},
               {"address", ev.address},
               {"ok", ev.ok},
               {"smt_root", ev.smh.smt_root.hex()},
               {"proof_cert_hashes", ev.proof_cert_hashes}};
        if (!ev.ok) j["error"] = ev.error;
        out += j.dump() + "\n";
    }
    for (const RevocationRecord& rec : outcome.fetched.applied_revocations) {
        out += json{{"type", "revocation"}, {"cert_hash", rec.cert_hash.hex()}}.dump() + "\n";
    }
    {
        json j{{"type", "fetch"},
               {"request_bytes", outcome.request.canonical_bytes().size()},
               {"verified_servers", outcome.fetched.verified_servers},
               {"union_certs", outcome.fetched.hashes.size()},
               {"filtered_certs", outcome.filtered.size()}};
        out += j.dump() + "\n";
    }
    {
        json maximal = json::array();
        for (const Hash32& h : outcome.validation.maximal) maximal.push_back(h.hex());
        json matching = json::array();
        for (const Hash32& h : outcome.validation.matching) matching.push_back(h.hex());
        json j{{"type", "decision"},
               {"decision", to_string(outcome.validation.decision)},
               {"reason", outcome.validation.reason},
               {"max_trust_level", outcome.validation.max_trust_level},
               {"maximal", std::move(maximal)},
               {"matching", std::move(matching)}};
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace gecko
