#pragma once

#include "gecko/map_server.hpp"

namespace gecko {

// JSON wire forms. Hashes and pair encodings are lowercase hex, signatures
// and certificate bodies base64. All parsers throw DecodeError on bad input.

std::string sth_to_json(const STH& sth);
STH sth_from_json(const std::string& text);

std::string smh_to_json(const SignedMapHead& smh);
SignedMapHead smh_from_json(const std::string& text);

std::string sct_to_json(const SCT& sct);
SCT sct_from_json(const std::string& text);

std::string proof_to_json(const CompletenessProof& proof);
CompletenessProof proof_from_json(const std::string& text);

std::string query_request_to_json(const QueryRequest& req);
QueryRequest query_request_from_json(const std::string& text);

std::string query_response_to_json(const QueryResponse& resp);
QueryResponse query_response_from_json(const std::string& text);

std::string consistency_bundle_to_json(const MapServerCore::ConsistencyBundle& b);
MapServerCore::ConsistencyBundle consistency_bundle_from_json(const std::string& text);

std::string consistency_head_to_json(const SignedConsistencyHead& head);
SignedConsistencyHead consistency_head_from_json(const std::string& text);

/// Client-side view of a map server (in-process or HTTP).
class MapApi {
public:
    virtual ~MapApi() = default;
    virtual QueryResponse query(const QueryRequest& req) = 0;
    virtual SignedMapHead get_smh() = 0;
    virtual SignedMapHead get_smh_at(size_t index) = 0;
    virtual MapServerCore::ConsistencyBundle get_consistency(size_t from, size_t to) = 0;
    virtual SignedConsistencyHead get_consistency_head() = 0;
    virtual std::optional<Bytes> get_cert(const Hash32& hash) = 0;
};

std::shared_ptr<LogApi> make_inproc_log_api(std::shared_ptr<LogServerCore> core);
std::shared_ptr<MapApi> make_inproc_map_api(std::shared_ptr<const MapServerCore> core);

/// HTTP clients against the JSON endpoints (base_url like http://host:port).
std::shared_ptr<LogApi> make_http_log_api(const std::string& base_url);
std::shared_ptr<MapApi> make_http_map_api(const std::string& base_url);

/// Running HTTP listener; stops and joins on destruction.
class HttpServerHandle {
public:
    virtual ~HttpServerHandle() = default;
    virtual int port() const = 0;
};

std::unique_ptr<HttpServerHandle> serve_log_http(std::shared_ptr<LogServerCore> core,
                                                 const std::string& host, int port,
                                                 int workers = 4);
std::unique_ptr<HttpServerHandle> serve_map_http(std::shared_ptr<MapServerCore> core,
                                                 const std::string& host, int port,
                                                 int workers = 0);

}  // namespace gecko
