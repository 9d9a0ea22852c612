#pragma once

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "gecko/cover.hpp"
#include "gecko/log_server.hpp"
#include "gecko/merkle_log.hpp"
#include "gecko/smt.hpp"
#include "gecko/trust.hpp"

namespace gecko {

struct SourceLogRef {
    std::string log_id;
    std::string address;  // http://... or inproc handle name
    PublicKey public_key{};
};

struct ServerConfig {
    std::string listen = "127.0.0.1:8787";
    std::string signing_key_hex;  // 32-byte seed, hex
    std::vector<SourceLogRef> source_logs;
    uint64_t ingest_interval_s = 5;
    double f_ingest = 0.1;
    int workers = 4;
    std::string storage_path;  // empty: in-memory only
    std::map<std::string, PublicKey> ca_keys;  // optional issuer registry

    void validate() const;
};

ServerConfig server_config_from_json(const std::string& json_text);
std::string server_config_to_json(const ServerConfig& cfg);
/// GECKO_LISTEN and GECKO_STORAGE override the file values.
void apply_env_overrides(ServerConfig& cfg);

struct QueryRequest {
    std::vector<BitStringPair> pairs;

    /// Compact request encoding: count byte plus 11 bytes per pair. The size
    /// budget in the evaluation is measured on this form.
    Bytes canonical_bytes() const;
    static QueryRequest from_canonical(const Bytes& b);
};

struct QueryResponse {
    CompletenessProof proof;
    std::vector<Bytes> certificates;  // canonical bodies for opened hashes
    std::vector<RevocationRecord> revocations;
};

/// Compact size of the response parts (canonical encodings, not JSON).
size_t response_canonical_size(const QueryResponse& resp);

struct QueryError : std::runtime_error {
    QueryError(int code_, const std::string& what_) : std::runtime_error(what_), code(code_) {}
    int code;
};

/// Client-side view of a log server (in-process or HTTP).
class LogApi {
public:
    virtual ~LogApi() = default;
    virtual std::string log_id() = 0;
    virtual STH get_sth() = 0;
    virtual std::vector<LogEntry> get_entries(size_t start, size_t end) = 0;
    virtual SCT request_sct(const Hash32& precert) = 0;
    virtual SCT submit_cert(const Bytes& canonical_cert) = 0;
    virtual std::vector<Hash32> get_inclusion(size_t index, size_t tree_size) = 0;
    virtual std::vector<Hash32> get_consistency(size_t size_a, size_t size_b) = 0;
};

struct IngestReport {
    size_t new_certs = 0;
    size_t new_revocations = 0;
    size_t rejected = 0;
    size_t skipped_sources = 0;
    Hash32 smt_root;
    uint64_t smh_index = 0;
    double wall_seconds = 0;
};

/// The geographic map server: ingests certificates from source logs into the
/// shadow SMT table, swaps tables atomically, signs map heads, and answers
/// volume queries with completeness proofs. One ingest writer; query readers
/// never block on ingestion.
class MapServerCore {
public:
    MapServerCore(ServerConfig cfg, std::vector<std::shared_ptr<LogApi>> sources,
                  std::function<uint64_t()> clock = nullptr);

    /// One fetch-verify-ingest-swap-publish round.
    IngestReport ingest_cycle();

    QueryResponse handle_query(const QueryRequest& req) const;

    std::optional<Bytes> get_cert(const Hash32& hash) const;
    SignedMapHead latest_smh() const;
    SignedMapHead smh_at(size_t index) const;
    size_t smh_count() const;

    struct ConsistencyBundle {
        size_t from = 0;
        size_t to = 0;
        Hash32 root_from;
        Hash32 root_to;
        std::vector<Hash32> proof;
        SignedConsistencyHead head;
    };
    ConsistencyBundle consistency(size_t from, size_t to) const;
    SignedConsistencyHead consistency_head() const;

    const PublicKey& public_key() const { return key_.public_key(); }
    const ServerConfig& config() const { return cfg_; }
    const EarthModel& model() const { return model_; }

    /// Visits every material node of the serving table (statistics only; do
    /// not interleave with ingest cycles).
    void for_each_serving_node(const std::function<void(const SmtNode&)>& fn) const;

private:
    struct Snapshot {
        const Smt* tree = nullptr;
        SignedMapHead smh;
        std::vector<RevocationRecord> revocations;
    };

    std::shared_ptr<const Snapshot> snapshot() const;
    void publish(std::shared_ptr<const Snapshot> snap);
    void persist_entry(const LogEntry& entry);
    void load_storage();

    ServerConfig cfg_;
    EarthModel model_;
    SigningKey key_;
    std::vector<std::shared_ptr<LogApi>> sources_;
    std::function<uint64_t()> clock_;

    // Two SMT tables: one serves queries, the other ingests; roles swap after
    // every cycle once in-flight readers of the old table have drained.
    std::unique_ptr<Smt> tables_[2];
    int serving_ = 0;

    mutable std::mutex snap_mu_;
    std::shared_ptr<const Snapshot> snap_;

    mutable std::shared_mutex certs_mu_;
    std::unordered_map<std::string, Bytes> cert_bodies_;  // hex hash -> canonical bytes

    std::map<std::string, uint64_t> fetched_;          // log id -> entries ingested
    std::map<std::string, STH> last_sth_;              // log id -> last verified STH
    std::vector<RevocationRecord> revocations_;        // active revocations
    AppendOnlyLog consistency_;                        // leaves: SMH canonical bytes
    std::vector<SignedMapHead> smhs_;
};

/// Recomputes the SMT root an honest server must have published for the
/// given map head by replaying the cited log prefixes (the auditor check).
Hash32 replay_smh_root(const EarthModel& m, const SignedMapHead& smh,
                       const std::vector<std::shared_ptr<LogApi>>& sources,
                       double f_ingest);

}  // namespace gecko
