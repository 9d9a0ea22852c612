#pragma once

#include "gecko/transport.hpp"
#include "gecko/trust.hpp"

namespace gecko {

struct MapServerRef {
    std::string address;
    PublicKey public_key{};
    std::shared_ptr<MapApi> api;
};

struct ClientConfig {
    EarthModel model = EarthModel::wgs84();
    std::vector<MapServerRef> servers;
    size_t quorum_m = 1;  // required verified responses
    std::map<std::string, PublicKey> trusted_logs;
    size_t sct_quorum_n = 1;  // required SCTs per certificate
    std::map<std::string, PublicKey> ca_keys;  // known issuer keys (revocations)
    std::vector<TrustPreferenceEntry> trust_preference;
    double f_query = 1.0;
    bool exact_uri_match = false;
};

/// Loads the JSON config; `trust_preference` may name a file (resolved
/// relative to the config) whose entries are parsed into the config.
ClientConfig client_config_from_json(const std::string& json_text,
                                     const std::string& base_dir = ".");

struct ServerEvidence {
    std::string address;
    bool ok = false;
    std::string error;
    SignedMapHead smh;
    size_t proof_cert_hashes = 0;
};

struct VerifiedResult {
    std::vector<GeoCert> certs;  // union over verified servers, sorted by hash
    std::set<Hash32> hashes;
    std::vector<ServerEvidence> evidence;
    size_t verified_servers = 0;
    std::vector<RevocationRecord> applied_revocations;
    std::set<Hash32> dropped_sct_quorum;
};

struct FetchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Cover of the query circle at the client's relative grid size.
/// Deterministic for fixed inputs.
QueryRequest build_query(const ClientConfig& cfg, const GeoPoint& center, double radius_m,
                         std::optional<AltRange> alt);

/// Queries every configured server, verifies each proof against that server's
/// signed map head, and unions the verified certificate sets. Servers whose
/// responses fail any check are excluded and reported. Throws FetchError when
/// fewer than quorum_m responses verify.
VerifiedResult fetch_verified(const ClientConfig& cfg, const QueryRequest& req);

/// Keeps certificates whose claimed volume geometrically intersects the query
/// frustum, removing the cover over-approximation.
std::vector<GeoCert> filter_exact(const std::vector<GeoCert>& certs,
                                  const PolygonFrustum& query_volume);

struct CheckOutcome {
    ValidationEvidence validation;
    VerifiedResult fetched;
    std::vector<Hash32> filtered;  // hashes surviving the geometric filter
    QueryRequest request;
    PolygonFrustum query_volume;
};

/// query -> verify -> filter -> validate, end to end.
CheckOutcome check(const ClientConfig& cfg, const std::string& object_identity,
                   const GeoPoint& center, double radius_m, std::optional<AltRange> alt);

/// Evidence as JSON lines (one object per line) for machine consumption.
std::string evidence_json_lines(const CheckOutcome& outcome);

}  // namespace gecko
