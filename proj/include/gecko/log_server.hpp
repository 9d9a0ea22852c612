#pragma once

#include <functional>
#include <map>
#include <shared_mutex>

#include "gecko/geocert.hpp"
#include "gecko/merkle_log.hpp"

namespace gecko {

/// Log entry: a certificate or a revocation record, tagged in the leaf bytes.
struct LogEntry {
    enum class Kind : uint8_t { cert = 0, revocation = 1 };
    Kind kind = Kind::cert;
    Bytes payload;

    Bytes leaf_bytes() const;
    static LogEntry from_leaf(const Bytes& leaf);
};

/// Append-only GeoCert log: a CT-style log that aggregates GeoCerts and
/// revocation records. Single appender, concurrent readers.
class LogServerCore {
public:
    LogServerCore(std::string log_id, SigningKey key, uint64_t mmd_seconds = 3600,
                  std::function<uint64_t()> clock = nullptr);

    const std::string& id() const { return log_id_; }
    const PublicKey& public_key() const { return key_.public_key(); }
    uint64_t mmd_seconds() const { return mmd_seconds_; }

    /// Known CA keys; when set, submissions must verify against their issuer.
    void set_ca_keys(std::map<std::string, PublicKey> keys);

    /// SCT for a precertificate hash during issuance (nothing is appended).
    SCT request_sct(const Hash32& precert) const;

    /// Validates and appends a final certificate; returns this log's SCT.
    /// Throws std::invalid_argument for malformed submissions.
    SCT submit_cert(const Bytes& canonical_cert);

    /// Appends a revocation record; returns its index.
    size_t submit_revocation(const RevocationRecord& record);

    STH sth() const;
    size_t size() const;
    std::vector<LogEntry> entries(size_t start, size_t end) const;
    std::vector<Hash32> inclusion(size_t index, size_t tree_size) const;
    std::vector<Hash32> consistency(size_t size_a, size_t size_b) const;
    Hash32 root_at(size_t n) const;

private:
    std::string log_id_;
    SigningKey key_;
    uint64_t mmd_seconds_;
    std::function<uint64_t()> clock_;
    std::map<std::string, PublicKey> ca_keys_;
    mutable std::shared_mutex mu_;
    AppendOnlyLog log_;
};

}  // namespace gecko
