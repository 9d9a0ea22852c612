#include "gecko/trust.hpp"

#include <json.hpp>

#include <algorithm>

namespace gecko {

using nlohmann::json;

const char* to_string(Decision d) {
    switch (d) {
        case Decision::accept: return "accept";
        case Decision::reject: return "reject";
        case Decision::conflict: return "conflict";
    }
    return "unknown";
}

bool identity_matches(const std::string& object_identity, const GeoCert& cert,
                      bool exact_uri_match) {
    if (exact_uri_match) {
        if (cert.subject_uri == object_identity) return true;
    } else {
        auto obj = parse_gecko_uri(object_identity);
        auto subj = parse_gecko_uri(cert.subject_uri);
        if (obj && subj && obj->host == subj->host) return true;
        if (!obj && cert.subject_uri == object_identity) return true;
    }
    for (const auto& [key, value] : cert.attributes) {
        if (value == object_identity) return true;
    }
    return false;
}

ValidationEvidence validate_object(const EarthModel& m, const std::string& object_identity,
                                   const std::vector<GeoCert>& candidates,
                                   const std::vector<TrustPreferenceEntry>& tp,
                                   const VolumeSpec& query_volume,
                                   bool exact_uri_match) {
    if (tp.empty()) throw std::invalid_argument("trust preference is empty");

    struct Kept {
        Hash32 hash;
        const GeoCert* cert;
        uint32_t level;
    };
    std::vector<Kept> kept;
    for (const GeoCert& cert : candidates) {
        bool allowed = false;
        uint32_t level = 0;
        for (const TrustPreferenceEntry& e : tp) {
            if (e.ca_id != cert.issuer_id) continue;
            if (!e.loc_verification_allowed.count(cert.loc_verification)) continue;
            if (!contains_volume(m, e.region, query_volume)) continue;
            allowed = true;
            level = std::max(level, e.trust_level);
        }
        if (allowed) kept.push_back({cert_hash(cert), &cert, level});
    }
    std::sort(kept.begin(), kept.end(),
              [](const Kept& a, const Kept& b) { return a.hash < b.hash; });
    kept.erase(std::unique(kept.begin(), kept.end(),
                           [](const Kept& a, const Kept& b) { return a.hash == b.hash; }),
               kept.end());

    ValidationEvidence ev;
    for (const Kept& k : kept) ev.considered.push_back(k.hash);
    if (kept.empty()) {
        ev.decision = Decision::reject;
        ev.reason = "no certificate passes the trust preference filter";
        return ev;
    }

    uint32_t max_level = 0;
    for (const Kept& k : kept) max_level = std::max(max_level, k.level);
    ev.max_trust_level = max_level;

    size_t matches = 0;
    size_t total = 0;
    for (const Kept& k : kept) {
        if (k.level != max_level) continue;
        ++total;
        ev.maximal.push_back(k.hash);
        if (identity_matches(object_identity, *k.cert, exact_uri_match)) {
            ++matches;
            ev.matching.push_back(k.hash);
        }
    }
    if (matches == total) {
        ev.decision = Decision::accept;
        ev.reason = "object named by every top-level certificate";
    } else if (matches == 0) {
        ev.decision = Decision::reject;
        ev.reason = "object named by no top-level certificate";
    } else {
        ev.decision = Decision::conflict;
        ev.reason = "top-level certificates disagree about the object";
    }
    return ev;
}

namespace {
VolumeSpec region_from_json(const EarthModel& m, const json& j) {
    if (!j.is_object() || !j.contains("frustums") || !j["frustums"].is_array() ||
        j["frustums"].empty()) {
        throw std::invalid_argument("region must hold a non-empty frustums array");
    }
    VolumeSpec out;
    for (const json& f : j["frustums"]) {
        PolygonFrustum s;
        if (!f.contains("ring") || !f["ring"].is_array() || f["ring"].size() < 3) {
            throw std::invalid_argument("frustum ring needs at least 3 [lon,lat] vertices");
        }
        for (const json& v : f["ring"]) {
            if (!v.is_array() || v.size() != 2) {
                throw std::invalid_argument("ring vertex must be [lon,lat]");
            }
            s.ring.push_back({v[0].get<double>(), v[1].get<double>(), 0});
        }
        s.alt_min = f.value("alt_min", m.min_altitude);
        s.alt_max = f.value("alt_max", m.max_altitude() + 1.0);
        validate_polygon(m, s);
        out.frustums.push_back(std::move(s));
    }
    return out;
}
}  // namespace

std::vector<TrustPreferenceEntry> parse_trust_preference(const EarthModel& m,
                                                         const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("trust preference is not valid JSON: ") +
                                    e.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
        throw std::invalid_argument("trust preference needs a top-level entries array");
    }
    std::vector<TrustPreferenceEntry> out;
    for (const json& e : doc["entries"]) {
        TrustPreferenceEntry entry;
        if (!e.contains("ca_id") || !e["ca_id"].is_string() || e["ca_id"].empty()) {
            throw std::invalid_argument("entry needs a ca_id string");
        }
        entry.ca_id = e["ca_id"].get<std::string>();
        if (!e.contains("loc_verification_allowed") ||
            !e["loc_verification_allowed"].is_array() ||
            e["loc_verification_allowed"].empty()) {
            throw std::invalid_argument("entry " + entry.ca_id +
                                        " needs loc_verification_allowed");
        }
        for (const json& v : e["loc_verification_allowed"]) {
            auto lv = loc_verification_from_string(v.get<std::string>());
            if (!lv) {
                throw std::invalid_argument("entry " + entry.ca_id +
                                            ": unknown verification method " +
                                            v.get<std::string>());
            }
            entry.loc_verification_allowed.insert(*lv);
        }
        if (!e.contains("trust_level") || !e["trust_level"].is_number_unsigned()) {
            throw std::invalid_argument("entry " + entry.ca_id +
                                        " needs an unsigned trust_level");
        }
        entry.trust_level = e["trust_level"].get<uint32_t>();
        if (!e.contains("region")) {
            throw std::invalid_argument("entry " + entry.ca_id + " needs a region");
        }
        entry.region = region_from_json(m, e["region"]);
        out.push_back(std::move(entry));
    }
    if (out.empty()) throw std::invalid_argument("trust preference has no entries");
    return out;
}

std::string trust_preference_to_json(const std::vector<TrustPreferenceEntry>& entries) {
    json doc;
    doc["entries"] = json::array();
    for (const TrustPreferenceEntry& e : entries) {
        json je;
        je["ca_id"] = e.ca_id;
        je["trust_level"] = e.trust_level;
        je["loc_verification_allowed"] = json::array();
        for (LocVerification v : e.loc_verification_allowed) {
            je["loc_verification_allowed"].push_back(to_string(v));
        }
        je["region"]["frustums"] = json::array();
        for (const PolygonFrustum& f : e.region.frustums) {
            json jf;
            jf["ring"] = json::array();
            for (const GeoPoint& p : f.ring) jf["ring"].push_back({p.lon, p.lat});
            jf["alt_min"] = f.alt_min;
            jf["alt_max"] = f.alt_max;
            je["region"]["frustums"].push_back(std::move(jf));
        }
        doc["entries"].push_back(std::move(je));
    }
    return doc.dump(2);
}

}  // namespace gecko
