#include "gecko/map_server.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

namespace gecko {

using nlohmann::json;

void ServerConfig::validate() const {
    if (!(f_ingest > 0)) throw std::invalid_argument("f_ingest must be positive");
    if (source_logs.empty()) throw std::invalid_argument("at least one source log required");
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
}

ServerConfig server_config_from_json(const std::string& json_text) {
    json doc = json::parse(json_text);
    ServerConfig cfg;
    cfg.listen = doc.value("listen", cfg.listen);
    cfg.signing_key_hex = doc.value("signing_key", std::string{});
    cfg.ingest_interval_s = doc.value("ingest_interval_s", cfg.ingest_interval_s);
    cfg.f_ingest = doc.value("f_ingest", cfg.f_ingest);
    cfg.workers = doc.value("workers", cfg.workers);
    cfg.storage_path = doc.value("storage_path", std::string{});
    const json sources = doc.value("source_logs", json::array());
    for (const json& s : sources) {
        SourceLogRef ref;
        ref.log_id = s.at("log_id").get<std::string>();
        ref.address = s.value("address", std::string{});
        auto pk = public_key_from_hex(s.at("public_key").get<std::string>());
        if (!pk) throw std::invalid_argument("bad source log public key");
        ref.public_key = *pk;
        cfg.source_logs.push_back(std::move(ref));
    }
    const json ca_keys = doc.value("ca_keys", json::object());
    for (const auto& [ca, key] : ca_keys.items()) {
        auto pk = public_key_from_hex(key.get<std::string>());
        if (!pk) throw std::invalid_argument("bad CA public key for " + ca);
        cfg.ca_keys[ca] = *pk;
    }
    return cfg;
}

std::string server_config_to_json(const ServerConfig& cfg) {
    json doc;
    doc["listen"] = cfg.listen;
    doc["signing_key"] = cfg.signing_key_hex;
    doc["ingest_interval_s"] = cfg.ingest_interval_s;
    doc["f_ingest"] = cfg.f_ingest;
    doc["workers"] = cfg.workers;
    doc["storage_path"] = cfg.storage_path;
    doc["source_logs"] = json::array();
    for (const SourceLogRef& s : cfg.source_logs) {
        doc["source_logs"].push_back({{"log_id", s.log_id},
                                      {"address", s.address},
                                      {"public_key", public_key_hex(s.public_key)}});
    }
    doc["ca_keys"] = json::object();
    for (const auto& [ca, key] : cfg.ca_keys) doc["ca_keys"][ca] = public_key_hex(key);
    return doc.dump(2);
}

void apply_env_overrides(ServerConfig& cfg) {
    if (const char* listen = std::getenv("GECKO_LISTEN")) cfg.listen = listen;
    if (const char* storage = std::getenv("GECKO_STORAGE")) cfg.storage_path = storage;
}

Bytes QueryRequest::canonical_bytes() const {
    Bytes out;
    put_u8(out, static_cast<uint8_t>(pairs.size()));
    for (const BitStringPair& p : pairs) {
        PairKey k = p.key();
        put_bytes(out, k.data(), k.size());
    }
    return out;
}

QueryRequest QueryRequest::from_canonical(const Bytes& b) {
    ByteReader r(b);
    QueryRequest out;
    uint8_t n = r.u8();
    for (uint8_t i = 0; i < n; ++i) {
        Bytes raw = r.raw(11);
        PairKey k;
        std::copy(raw.begin(), raw.end(), k.begin());
        auto p = BitStringPair::from_key(k);
        if (!p) throw DecodeError("invalid pair encoding");
        out.pairs.push_back(*p);
    }
    if (!r.done()) throw DecodeError("trailing bytes after query request");
    return out;
}

size_t response_canonical_size(const QueryResponse& resp) {
    size_t n = 1 + 11 * resp.proof.query_pairs.size();
    for (const auto& [pair, certs] : resp.proof.openings) {
        n += 11 + 2 + 32 * certs.size();
    }
    n += (11 + 32) * resp.proof.boundary_hashes.size();
    n += resp.proof.smh.leaf_bytes().size();
    for (const Bytes& c : resp.certificates) n += 4 + c.size();
    for (const RevocationRecord& r : resp.revocations) n += r.encode().size();
    return n;
}

namespace {
uint64_t real_time() { return static_cast<uint64_t>(std::time(nullptr)); }
}  // namespace

MapServerCore::MapServerCore(ServerConfig cfg, std::vector<std::shared_ptr<LogApi>> sources,
                             std::function<uint64_t()> clock)
    : cfg_(std::move(cfg)),
      model_(EarthModel::wgs84()),
      key_(cfg_.signing_key_hex.empty()
               ? SigningKey::generate()
               : SigningKey::from_seed_hex(cfg_.signing_key_hex).value()),
      sources_(std::move(sources)),
      clock_(clock ? std::move(clock) : real_time) {
    cfg_.validate();
    tables_[0] = std::make_unique<Smt>(model_);
    tables_[1] = std::make_unique<Smt>(model_);
    auto snap = std::make_shared<Snapshot>();
    snap->tree = tables_[serving_].get();
    snap->smh.smt_root = default_hash();
    snap->smh.timestamp = clock_();
    snap->smh.sign(key_);
    smhs_.push_back(snap->smh);
    consistency_.append(snap->smh.leaf_bytes());
    snap_ = std::move(snap);
    if (!cfg_.storage_path.empty()) load_storage();
}

std::shared_ptr<const MapServerCore::Snapshot> MapServerCore::snapshot() const {
    std::lock_guard lock(snap_mu_);
    return snap_;
}

void MapServerCore::publish(std::shared_ptr<const Snapshot> snap) {
    std::lock_guard lock(snap_mu_);
    snap_ = std::move(snap);
}

void MapServerCore::persist_entry(const LogEntry& entry) {
    if (cfg_.storage_path.empty()) return;
    std::filesystem::create_directories(cfg_.storage_path);
    std::ofstream out(cfg_.storage_path + "/entries.bin",
                      std::ios::binary | std::ios::app);
    Bytes leaf = entry.leaf_bytes();
    Bytes framed;
    put_u32(framed, static_cast<uint32_t>(leaf.size()));
    put_bytes(framed, leaf);
    out.write(reinterpret_cast<const char*>(framed.data()),
              static_cast<std::streamsize>(framed.size()));
}

void MapServerCore::load_storage() {
    std::ifstream in(cfg_.storage_path + "/entries.bin", std::ios::binary);
    if (!in) return;
    Bytes all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader r(all);
    std::vector<std::pair<Hash32, std::vector<BitStringPair>>> inserts;
    while (!r.done()) {
        Bytes leaf = r.var_bytes();
        LogEntry entry = LogEntry::from_leaf(leaf);
        if (entry.kind == LogEntry::Kind::cert) {
            GeoCert cert = canonical_decode(entry.payload);
            Hash32 h = sha256(entry.payload);
            cert_bodies_[h.hex()] = entry.payload;
            auto cover = cover_volume(model_, cert.volume, {cfg_.f_ingest});
            tables_[0]->insert(h, cover);
            tables_[1]->insert(h, cover);
        } else {
            RevocationRecord rec = RevocationRecord::decode(entry.payload);
            auto it = cert_bodies_.find(rec.cert_hash.hex());
            if (it != cert_bodies_.end()) {
                GeoCert cert = canonical_decode(it->second);
                auto cover = cover_volume(model_, cert.volume, {cfg_.f_ingest});
                tables_[0]->remove(rec.cert_hash, cover);
                tables_[1]->remove(rec.cert_hash, cover);
                revocations_.push_back(rec);
            }
        }
    }
    tables_[0]->batch_update();
    tables_[1]->batch_update();
    auto snap = std::make_shared<Snapshot>();
    snap->tree = tables_[serving_].get();
    snap->smh.smt_root = tables_[serving_]->root();
    snap->smh.timestamp = clock_();
    snap->smh.sign(key_);
    snap->revocations = revocations_;
    smhs_.push_back(snap->smh);
    consistency_.append(snap->smh.leaf_bytes());
    publish(std::move(snap));
}

IngestReport MapServerCore::ingest_cycle() {
    auto started = std::chrono::steady_clock::now();
    IngestReport report;
    int shadow = 1 - serving_;
    Smt& table = *tables_[shadow];

    struct Staged {
        Hash32 hash;
        std::vector<BitStringPair> cover;
        bool is_removal = false;
    };
    std::vector<Staged> staged;
    std::vector<std::pair<Hash32, Bytes>> new_bodies;
    std::vector<RevocationRecord> new_revocations;
    std::vector<LogEntry> to_persist;

    for (size_t si = 0; si < sources_.size(); ++si) {
        LogApi& api = *sources_[si];
        const SourceLogRef& ref = cfg_.source_logs[si];
        STH sth;
        try {
            sth = api.get_sth();
        } catch (const std::exception&) {
            ++report.skipped_sources;
            continue;
        }
        if (!sth.verify(ref.public_key)) {
            // Quarantined: an unverifiable head never drives ingestion.
            ++report.skipped_sources;
            continue;
        }
        uint64_t have = fetched_[ref.log_id];
        if (sth.tree_size < have) {
            ++report.skipped_sources;  // shrinking log: misbehavior
            continue;
        }
        std::vector<LogEntry> entries;
        if (sth.tree_size > have) {
            try {
                entries = api.get_entries(have, sth.tree_size);
            } catch (const std::exception&) {
                ++report.skipped_sources;
                continue;
            }
            if (entries.size() != sth.tree_size - have) {
                ++report.skipped_sources;
                continue;
            }
        }
        for (const LogEntry& entry : entries) {
            if (entry.kind == LogEntry::Kind::cert) {
                GeoCert cert;
                try {
                    cert = canonical_decode(entry.payload);
                } catch (const DecodeError&) {
                    ++report.rejected;
                    continue;
                }
                if (!validate_cert(model_, cert).empty()) {
                    ++report.rejected;
                    continue;
                }
                // At least one SCT from a configured source log must verify
                // against the precertificate.
                Hash32 pre = precert_hash(cert);
                bool sct_ok = false;
                for (const SCT& sct : cert.scts) {
                    for (const SourceLogRef& src : cfg_.source_logs) {
                        if (sct.log_id == src.log_id && sct.cert_hash == pre &&
                            sct.verify(src.public_key)) {
                            sct_ok = true;
                            break;
                        }
                    }
                    if (sct_ok) break;
                }
                if (!sct_ok) {
                    ++report.rejected;
                    continue;
                }
                if (!cfg_.ca_keys.empty()) {
                    auto it = cfg_.ca_keys.find(cert.issuer_id);
                    if (it == cfg_.ca_keys.end() || !verify_cert_signature(cert, it->second)) {
                        ++report.rejected;
                        continue;
                    }
                }
                Staged s;
                s.hash = sha256(entry.payload);
                try {
                    s.cover = cover_volume(model_, cert.volume, {cfg_.f_ingest});
                } catch (const std::exception&) {
                    ++report.rejected;
                    continue;
                }
                new_bodies.emplace_back(s.hash, entry.payload);
                staged.push_back(std::move(s));
                to_persist.push_back(entry);
                ++report.new_certs;
            } else {
                RevocationRecord rec;
                try {
                    rec = RevocationRecord::decode(entry.payload);
                } catch (const DecodeError&) {
                    ++report.rejected;
                    continue;
                }
                Staged s;
                s.hash = rec.cert_hash;
                s.is_removal = true;
                staged.push_back(std::move(s));
                new_revocations.push_back(rec);
                to_persist.push_back(entry);
                ++report.new_revocations;
            }
        }
        fetched_[ref.log_id] = sth.tree_size;
        last_sth_[ref.log_id] = sth;
    }

    // Stage the body map first so removal covers can be recomputed.
    {
        std::unique_lock lock(certs_mu_);
        for (const auto& [hash, body] : new_bodies) cert_bodies_[hash.hex()] = body;
    }
    for (Staged& s : staged) {
        if (!s.is_removal) continue;
        std::shared_lock lock(certs_mu_);
        auto it = cert_bodies_.find(s.hash.hex());
        if (it == cert_bodies_.end()) continue;  // revocation of an unknown cert
        GeoCert cert = canonical_decode(it->second);
        s.cover = cover_volume(model_, cert.volume, {cfg_.f_ingest});
    }

    auto apply = [&](Smt& t) {
        for (const Staged& s : staged) {
            if (s.cover.empty()) continue;
            if (s.is_removal) {
                t.remove(s.hash, s.cover);
            } else {
                t.insert(s.hash, s.cover);
            }
        }
        return t.batch_update();
    };
    Hash32 root = apply(table);
    report.smt_root = root;

    for (const RevocationRecord& rec : new_revocations) {
        bool known = false;
        for (const RevocationRecord& old : revocations_) {
            if (old.cert_hash == rec.cert_hash) known = true;
        }
        if (!known) revocations_.push_back(rec);
    }

    // Publish the new head and swap the tables.
    auto snap = std::make_shared<Snapshot>();
    snap->tree = &table;
    snap->smh.smt_root = root;
    snap->smh.timestamp = clock_();
    for (const auto& [log_id, sth] : last_sth_) snap->smh.sources.push_back({log_id, sth});
    snap->smh.sign(key_);
    snap->revocations = revocations_;
    report.smh_index = smhs_.size();
    smhs_.push_back(snap->smh);
    consistency_.append(snap->smh.leaf_bytes());

    std::shared_ptr<const Snapshot> old;
    {
        std::lock_guard lock(snap_mu_);
        old = snap_;
        snap_ = snap;
    }
    serving_ = shadow;

    // Wait for in-flight queries on the old table to finish, then bring the
    // old table up to date; it becomes the next shadow.
    while (old.use_count() > 1) {
        std::this_thread::sleep_for(std::chrono::microseconds(50));
    }
    old.reset();
    apply(*tables_[1 - serving_]);

    for (const LogEntry& entry : to_persist) persist_entry(entry);

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

QueryResponse MapServerCore::handle_query(const QueryRequest& req) const {
    if (req.pairs.empty()) throw QueryError(400, "empty pair set");
    if (req.pairs.size() > 64) throw QueryError(400, "more than 64 query pairs");
    for (const BitStringPair& p : req.pairs) {
        if (!pair_valid(model_, p)) throw QueryError(400, "invalid pair " + p.str());
        for (const BitStringPair& q : req.pairs) {
            if (is_tree_ancestor(p, q)) {
                throw QueryError(400, "nested pairs " + p.str() + " and " + q.str());
            }
        }
    }

    auto snap = snapshot();
    QueryResponse resp;
    resp.proof = snap->tree->generate_proof(req.pairs);
    resp.proof.smh = snap->smh;

    std::set<Hash32> wanted;
    for (const auto& [pair, certs] : resp.proof.openings) {
        wanted.insert(certs.begin(), certs.end());
    }
    {
        std::shared_lock lock(certs_mu_);
        for (const Hash32& h : wanted) {
            auto it = cert_bodies_.find(h.hex());
            if (it != cert_bodies_.end()) resp.certificates.push_back(it->second);
        }
    }
    // Relying parties always get the full revocation view alongside the
    // certificates, so a union over servers cannot resurrect a revoked cert.
    resp.revocations = snap->revocations;
    return resp;
}

std::optional<Bytes> MapServerCore::get_cert(const Hash32& hash) const {
    std::shared_lock lock(certs_mu_);
    auto it = cert_bodies_.find(hash.hex());
    if (it == cert_bodies_.end()) return std::nullopt;
    return it->second;
}

void MapServerCore::for_each_serving_node(
    const std::function<void(const SmtNode&)>& fn) const {
    snapshot()->tree->for_each_node(fn);
}

SignedMapHead MapServerCore::latest_smh() const { return snapshot()->smh; }

SignedMapHead MapServerCore::smh_at(size_t index) const {
    if (index >= smhs_.size()) throw std::out_of_range("smh index");
    return smhs_[index];
}

size_t MapServerCore::smh_count() const { return smhs_.size(); }

MapServerCore::ConsistencyBundle MapServerCore::consistency(size_t from, size_t to) const {
    ConsistencyBundle out;
    out.from = from;
    out.to = to;
    out.root_from = consistency_.root_at(from);
    out.root_to = consistency_.root_at(to);
    out.proof = consistency_.consistency_proof(from, to);
    out.head = consistency_head();
    return out;
}

SignedConsistencyHead MapServerCore::consistency_head() const {
    SignedConsistencyHead head;
    head.root = consistency_.root();
    head.size = consistency_.size();
    head.sign(key_);
    return head;
}

Hash32 replay_smh_root(const EarthModel& m, const SignedMapHead& smh,
                       const std::vector<std::shared_ptr<LogApi>>& sources,
                       double f_ingest) {
    Smt tree(m);
    std::map<std::string, Bytes> bodies;
    for (const auto& [log_id, sth] : smh.sources) {
        for (const auto& api : sources) {
            if (api->log_id() != log_id) continue;
            auto entries = api->get_entries(0, sth.tree_size);
            for (const LogEntry& entry : entries) {
                if (entry.kind == LogEntry::Kind::cert) {
                    GeoCert cert = canonical_decode(entry.payload);
                    Hash32 h = sha256(entry.payload);
                    bodies[h.hex()] = entry.payload;
                    tree.insert(h, cover_volume(m, cert.volume, {f_ingest}));
                } else {
                    RevocationRecord rec = RevocationRecord::decode(entry.payload);
                    auto it = bodies.find(rec.cert_hash.hex());
                    if (it == bodies.end()) continue;
                    GeoCert cert = canonical_decode(it->second);
                    tree.remove(rec.cert_hash, cover_volume(m, cert.volume, {f_ingest}));
                }
            }
        }
    }
    return tree.batch_update();
}

}  // namespace gecko
