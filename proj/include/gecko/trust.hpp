#pragma once

#include "gecko/geocert.hpp"

namespace gecko {

/// One row of the relying party's local trust preference: which CA may claim
/// which region, with which verification methods, at which level.
struct TrustPreferenceEntry {
    std::string ca_id;
    std::set<LocVerification> loc_verification_allowed;
    VolumeSpec region;
    uint32_t trust_level = 0;
};

enum class Decision { accept, reject, conflict };

const char* to_string(Decision d);

struct ValidationEvidence {
    Decision decision = Decision::reject;
    std::string reason;
    uint32_t max_trust_level = 0;
    std::vector<Hash32> considered;  // candidates surviving the TP filter
    std::vector<Hash32> maximal;     // considered certs at the top trust level
    std::vector<Hash32> matching;    // maximal certs naming the object
};

/// Filters candidates by the trust preference (issuer allowed for the query
/// volume and verification method), keeps the top trust level, then compares
/// the object identity against every remaining certificate. Deterministic
/// under permutation of candidates and entries. Candidates must already be
/// proof-verified and revocation-filtered. Throws std::invalid_argument on an
/// empty trust preference.
ValidationEvidence validate_object(const EarthModel& m, const std::string& object_identity,
                                   const std::vector<GeoCert>& candidates,
                                   const std::vector<TrustPreferenceEntry>& tp,
                                   const VolumeSpec& query_volume,
                                   bool exact_uri_match = false);

/// True when the identity names the certificate: same gecko host by default
/// (full URI with exact_uri_match), or any attribute value equal to it.
bool identity_matches(const std::string& object_identity, const GeoCert& cert,
                      bool exact_uri_match);

/// Parses the trust preference JSON document. Throws std::invalid_argument
/// with a line-of-sight message on any structural problem.
std::vector<TrustPreferenceEntry> parse_trust_preference(const EarthModel& m,
                                                         const std::string& json_text);

std::string trust_preference_to_json(const std::vector<TrustPreferenceEntry>& entries);

}  // namespace gecko
