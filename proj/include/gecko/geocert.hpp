#pragma once

#include <string>
#include <vector>

#include "gecko/cover.hpp"
#include "gecko/ed25519.hpp"
#include "gecko/heads.hpp"
#include "gecko/sha256.hpp"

namespace gecko {

/// How the issuing CA verified the space claim.
enum class LocVerification : uint8_t {
    in_person = 0,
    delegated = 1,
    postal = 2,
    wireless = 3,
    self_declared = 4,
};

const char* to_string(LocVerification v);
std::optional<LocVerification> loc_verification_from_string(std::string_view s);

/// Certificate binding a claimed physical volume to an identifier and
/// attributes. Standalone hierarchy: chain fields live in the certificate.
struct GeoCert {
    std::string subject_uri;  // gecko scheme
    std::string issuer_id;
    uint64_t serial = 0;
    VolumeSpec volume;
    std::vector<std::pair<std::string, std::string>> attributes;  // sorted by key
    LocVerification loc_verification = LocVerification::self_declared;
    int64_t not_before = 0;  // unix seconds
    int64_t not_after = 0;
    std::vector<SCT> scts;
    Bytes public_key;  // subject key (raw Ed25519)
    Bytes signature;   // issuer signature over tbs_bytes()

    friend bool operator==(const GeoCert&, const GeoCert&) = default;
};

/// Deterministic length-prefixed encoding in declared field order; doubles as
/// IEEE-754 big-endian. Attributes are sorted by key first. Throws
/// std::invalid_argument for invalid fields.
Bytes canonical_encode(const GeoCert& c);

/// Strict inverse of canonical_encode: rejects trailing bytes and unsorted
/// attributes, so encode(decode(b)) == b. Throws DecodeError.
GeoCert canonical_decode(const Bytes& b);

/// SHA-256 over the full canonical encoding; the certificate's identity.
Hash32 cert_hash(const GeoCert& c);

/// Canonical encoding with an empty signature: the bytes the issuer signs.
Bytes tbs_bytes(const GeoCert& c);

/// Hash of the certificate without SCTs and signature: what logs sign in
/// their SCTs before the final certificate exists.
Hash32 precert_hash(const GeoCert& c);

void sign_cert(GeoCert& c, const SigningKey& issuer);
bool verify_cert_signature(const GeoCert& c, const PublicKey& issuer);

/// Human-oriented textual form; not an interchange format.
std::string cert_debug_string(const GeoCert& c);

struct GeckoUri {
    std::string scheme;
    std::string host;
    std::string rest;  // path/query/fragment, verbatim
};

std::optional<GeckoUri> parse_gecko_uri(std::string_view uri);

/// Structural invariants: gecko subject, non-empty valid volume, ordered
/// validity window. Returns the first problem, empty string when fine.
std::string validate_cert(const EarthModel& m, const GeoCert& c);

struct ChainReport {
    bool ok = false;
    size_t violation_link = 0;  // index into the chain, root first
    std::string violation;
};

/// Root-first chain: each certificate signed by its parent (root by itself),
/// validity windows containing `now`, child volumes contained in parents.
ChainReport verify_chain(const EarthModel& m, const std::vector<GeoCert>& chain,
                         int64_t now);

/// Conservative containment: a deterministic grid of at least 10 000 sample
/// points per child frustum (plus its vertices) must all fall inside some
/// parent frustum whose altitude range covers the child's.
bool contains_volume(const EarthModel& m, const VolumeSpec& parent,
                     const VolumeSpec& child);

/// Revocation entry carried in logs and map-server responses.
struct RevocationRecord {
    Hash32 cert_hash;
    uint64_t revoked_at = 0;  // unix seconds
    std::string issuer_id;
    Signature signature{};

    Bytes signed_bytes() const;
    void sign(const SigningKey& key) { signature = key.sign(signed_bytes()); }
    bool verify(const PublicKey& pub) const {
        return ed25519_verify(pub, signed_bytes(), signature);
    }
    Bytes encode() const;
    static RevocationRecord decode(const Bytes& b);

    friend bool operator==(const RevocationRecord&, const RevocationRecord&) = default;
};

}  // namespace gecko
