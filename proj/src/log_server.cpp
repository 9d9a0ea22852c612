#include "gecko/log_server.hpp"

#include <ctime>
#include <mutex>

namespace gecko {

Bytes LogEntry::leaf_bytes() const {
    Bytes out;
    put_u8(out, static_cast<uint8_t>(kind));
    put_bytes(out, payload);
    return out;
}

LogEntry LogEntry::from_leaf(const Bytes& leaf) {
    if (leaf.empty()) throw DecodeError("empty log leaf");
    if (leaf[0] > 1) throw DecodeError("unknown log entry kind");
    LogEntry out;
    out.kind = static_cast<Kind>(leaf[0]);
    out.payload.assign(leaf.begin() + 1, leaf.end());
    return out;
}

namespace {
uint64_t real_time() { return static_cast<uint64_t>(std::time(nullptr)); }
}  // namespace

LogServerCore::LogServerCore(std::string log_id, SigningKey key, uint64_t mmd_seconds,
                             std::function<uint64_t()> clock)
    : log_id_(std::move(log_id)),
      key_(std::move(key)),
      mmd_seconds_(mmd_seconds),
      clock_(clock ? std::move(clock) : real_time) {}

void LogServerCore::set_ca_keys(std::map<std::string, PublicKey> keys) {
    std::unique_lock lock(mu_);
    ca_keys_ = std::move(keys);
}

SCT LogServerCore::request_sct(const Hash32& precert) const {
    SCT sct;
    sct.log_id = log_id_;
    sct.timestamp = clock_();
    sct.cert_hash = precert;
    sct.sign(key_);
    return sct;
}

SCT LogServerCore::submit_cert(const Bytes& canonical_cert) {
    GeoCert cert;
    try {
        cert = canonical_decode(canonical_cert);
    } catch (const DecodeError& e) {
        throw std::invalid_argument(std::string("malformed certificate: ") + e.what());
    }
    std::string problem = validate_cert(EarthModel::wgs84(), cert);
    if (!problem.empty()) throw std::invalid_argument("invalid certificate: " + problem);
    if (canonical_encode(cert) != canonical_cert) {
        throw std::invalid_argument("certificate is not in canonical form");
    }

    Hash32 precert = precert_hash(cert);
    std::unique_lock lock(mu_);
    // SCTs this log issued must match the precertificate.
    for (const SCT& sct : cert.scts) {
        if (sct.log_id != log_id_) continue;
        if (!(sct.cert_hash == precert) || !sct.verify(key_.public_key())) {
            throw std::invalid_argument("embedded SCT does not verify for this log");
        }
    }
    if (!ca_keys_.empty()) {
        auto it = ca_keys_.find(cert.issuer_id);
        if (it == ca_keys_.end()) {
            throw std::invalid_argument("unknown issuer " + cert.issuer_id);
        }
        if (!verify_cert_signature(cert, it->second)) {
            throw std::invalid_argument("issuer signature does not verify");
        }
    }

    LogEntry entry;
    entry.kind = LogEntry::Kind::cert;
    entry.payload = canonical_cert;
    log_.append(entry.leaf_bytes());

    SCT sct;
    sct.log_id = log_id_;
    sct.timestamp = clock_();
    sct.cert_hash = precert;
    sct.sign(key_);
    return sct;
}

size_t LogServerCore::submit_revocation(const RevocationRecord& record) {
    std::unique_lock lock(mu_);
    LogEntry entry;
    entry.kind = LogEntry::Kind::revocation;
    entry.payload = record.encode();
    return log_.append(entry.leaf_bytes());
}

STH LogServerCore::sth() const {
    std::shared_lock lock(mu_);
    STH out;
    out.timestamp = clock_();
    out.tree_size = log_.size();
    out.root = log_.root();
    out.sign(key_);
    return out;
}

size_t LogServerCore::size() const {
    std::shared_lock lock(mu_);
    return log_.size();
}

std::vector<LogEntry> LogServerCore::entries(size_t start, size_t end) const {
    std::shared_lock lock(mu_);
    if (start > end || end > log_.size()) throw std::out_of_range("entry range");
    std::vector<LogEntry> out;
    out.reserve(end - start);
    for (size_t i = start; i < end; ++i) out.push_back(LogEntry::from_leaf(log_.entry(i)));
    return out;
}

std::vector<Hash32> LogServerCore::inclusion(size_t index, size_t tree_size) const {
    std::shared_lock lock(mu_);
    return log_.inclusion_proof(index, tree_size);
}

std::vector<Hash32> LogServerCore::consistency(size_t size_a, size_t size_b) const {
    std::shared_lock lock(mu_);
    return log_.consistency_proof(size_a, size_b);
}

Hash32 LogServerCore::root_at(size_t n) const {
    std::shared_lock lock(mu_);
    return log_.root_at(n);
}

}  // namespace gecko
