#include "gecko/geocert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gecko {

const char* to_string(LocVerification v) {
    switch (v) {
        case LocVerification::in_person: return "in_person";
        case LocVerification::delegated: return "delegated";
        case LocVerification::postal: return "postal";
        case LocVerification::wireless: return "wireless";
        case LocVerification::self_declared: return "self_declared";
    }
    return "unknown";
}

std::optional<LocVerification> loc_verification_from_string(std::string_view s) {
    for (auto v : {LocVerification::in_person, LocVerification::delegated,
                   LocVerification::postal, LocVerification::wireless,
                   LocVerification::self_declared}) {
        if (s == to_string(v)) return v;
    }
    return std::nullopt;
}

std::optional<GeckoUri> parse_gecko_uri(std::string_view uri) {
    size_t scheme_end = uri.find("://");
    if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;
    GeckoUri out;
    out.scheme = std::string(uri.substr(0, scheme_end));
    std::string_view rest = uri.substr(scheme_end + 3);
    size_t host_end = rest.find_first_of("/?#");
    if (host_end == std::string_view::npos) {
        out.host = std::string(rest);
    } else {
        out.host = std::string(rest.substr(0, host_end));
        out.rest = std::string(rest.substr(host_end));
    }
    if (out.host.empty()) return std::nullopt;
    return out;
}

namespace {
std::vector<std::pair<std::string, std::string>> sorted_attributes(const GeoCert& c) {
    auto attrs = c.attributes;
    std::sort(attrs.begin(), attrs.end());
    return attrs;
}

void encode_body(Bytes& out, const GeoCert& c, bool with_scts, bool with_signature) {
    put_var_string(out, c.subject_uri);
    put_var_string(out, c.issuer_id);
    put_u64(out, c.serial);
    put_u32(out, static_cast<uint32_t>(c.volume.frustums.size()));
    for (const PolygonFrustum& s : c.volume.frustums) {
        put_u32(out, static_cast<uint32_t>(s.ring.size()));
        for (const GeoPoint& p : s.ring) {
            put_f64(out, p.lon);
            put_f64(out, p.lat);
        }
        put_f64(out, s.alt_min);
        put_f64(out, s.alt_max);
    }
    auto attrs = sorted_attributes(c);
    put_u32(out, static_cast<uint32_t>(attrs.size()));
    for (const auto& [k, v] : attrs) {
        put_var_string(out, k);
        put_var_string(out, v);
    }
    put_u8(out, static_cast<uint8_t>(c.loc_verification));
    put_i64(out, c.not_before);
    put_i64(out, c.not_after);
    if (with_scts) {
        put_u32(out, static_cast<uint32_t>(c.scts.size()));
        for (const SCT& sct : c.scts) {
            put_var_string(out, sct.log_id);
            put_u64(out, sct.timestamp);
            put_bytes(out, sct.cert_hash.data(), sct.cert_hash.size());
            put_bytes(out, sct.signature.data(), sct.signature.size());
        }
    } else {
        put_u32(out, 0);
    }
    put_var_bytes(out, c.public_key);
    if (with_signature) {
        put_var_bytes(out, c.signature);
    } else {
        put_u32(out, 0);
    }
}

void check_encodable(const GeoCert& c) {
    if (!parse_gecko_uri(c.subject_uri) || parse_gecko_uri(c.subject_uri)->scheme != "gecko") {
        throw std::invalid_argument("subject is not a gecko URI: " + c.subject_uri);
    }
    if (c.volume.frustums.empty()) throw std::invalid_argument("certificate volume is empty");
    if (!(c.not_before < c.not_after)) {
        throw std::invalid_argument("validity window inverted");
    }
    if (static_cast<uint8_t>(c.loc_verification) > 4) {
        throw std::invalid_argument("unknown location verification method");
    }
    for (const PolygonFrustum& s : c.volume.frustums) {
        for (const GeoPoint& p : s.ring) {
            if (!std::isfinite(p.lon) || !std::isfinite(p.lat)) {
                throw std::invalid_argument("non-finite vertex coordinate");
            }
        }
        if (!std::isfinite(s.alt_min) || !std::isfinite(s.alt_max)) {
            throw std::invalid_argument("non-finite altitude bound");
        }
    }
}
}  // namespace

Bytes canonical_encode(const GeoCert& c) {
    check_encodable(c);
    Bytes out;
    encode_body(out, c, true, true);
    return out;
}

Bytes tbs_bytes(const GeoCert& c) {
    check_encodable(c);
    Bytes out;
    encode_body(out, c, true, false);
    return out;
}

Hash32 precert_hash(const GeoCert& c) {
    check_encodable(c);
    Bytes out;
    encode_body(out, c, false, false);
    return sha256(out);
}

GeoCert canonical_decode(const Bytes& b) {
    ByteReader r(b);
    GeoCert c;
    c.subject_uri = r.var_string();
    c.issuer_id = r.var_string();
    c.serial = r.u64();
    uint32_t nf = r.u32();
    if (nf > 1u << 16) throw DecodeError("implausible frustum count");
    for (uint32_t i = 0; i < nf; ++i) {
        PolygonFrustum s;
        uint32_t nv = r.u32();
        if (nv > 1u << 20) throw DecodeError("implausible vertex count");
        for (uint32_t j = 0; j < nv; ++j) {
            double lon = r.f64();
            double lat = r.f64();
            s.ring.push_back({lon, lat, 0});
        }
        s.alt_min = r.f64();
        s.alt_max = r.f64();
        c.volume.frustums.push_back(std::move(s));
    }
    uint32_t na = r.u32();
    if (na > 1u << 16) throw DecodeError("implausible attribute count");
    for (uint32_t i = 0; i < na; ++i) {
        std::string k = r.var_string();
        std::string v = r.var_string();
        c.attributes.emplace_back(std::move(k), std::move(v));
    }
    if (!std::is_sorted(c.attributes.begin(), c.attributes.end())) {
        throw DecodeError("attributes not in canonical order");
    }
    uint8_t lv = r.u8();
    if (lv > 4) throw DecodeError("unknown location verification method");
    c.loc_verification = static_cast<LocVerification>(lv);
    c.not_before = r.i64();
    c.not_after = r.i64();
    uint32_t ns = r.u32();
    if (ns > 1u << 12) throw DecodeError("implausible SCT count");
    for (uint32_t i = 0; i < ns; ++i) {
        SCT sct;
        sct.log_id = r.var_string();
        sct.timestamp = r.u64();
        sct.cert_hash = r.hash32();
        Bytes sig = r.raw(64);
        std::copy(sig.begin(), sig.end(), sct.signature.begin());
        c.scts.push_back(std::move(sct));
    }
    c.public_key = r.var_bytes();
    c.signature = r.var_bytes();
    if (!r.done()) throw DecodeError("trailing bytes after certificate");
    return c;
}

Hash32 cert_hash(const GeoCert& c) { return sha256(canonical_encode(c)); }

void sign_cert(GeoCert& c, const SigningKey& issuer) {
    Signature sig = issuer.sign(tbs_bytes(c));
    c.signature.assign(sig.begin(), sig.end());
}

bool verify_cert_signature(const GeoCert& c, const PublicKey& issuer) {
    if (c.signature.size() != 64) return false;
    Signature sig;
    std::copy(c.signature.begin(), c.signature.end(), sig.begin());
    return ed25519_verify(issuer, tbs_bytes(c), sig);
}

std::string cert_debug_string(const GeoCert& c) {
    std::ostringstream os;
    os << "GeoCert{subject=" << c.subject_uri << " issuer=" << c.issuer_id
       << " serial=" << c.serial << " frustums=" << c.volume.frustums.size()
       << " locver=" << to_string(c.loc_verification) << " window=[" << c.not_before << ","
       << c.not_after << ")"
       << " scts=" << c.scts.size() << " hash=" << cert_hash(c).hex() << "}";
    return os.str();
}

std::string validate_cert(const EarthModel& m, const GeoCert& c) {
    auto uri = parse_gecko_uri(c.subject_uri);
    if (!uri || uri->scheme != "gecko") return "subject is not a gecko URI";
    if (c.volume.frustums.empty()) return "empty volume";
    if (!(c.not_before < c.not_after)) return "validity window inverted";
    for (const PolygonFrustum& s : c.volume.frustums) {
        try {
            validate_polygon(m, s);
        } catch (const std::exception& e) {
            return std::string("invalid frustum: ") + e.what();
        }
    }
    return "";
}

ChainReport verify_chain(const EarthModel& m, const std::vector<GeoCert>& chain,
                         int64_t now) {
    if (chain.empty()) throw std::invalid_argument("empty certificate chain");
    ChainReport report;
    for (size_t i = 0; i < chain.size(); ++i) {
        const GeoCert& cert = chain[i];
        auto bad = [&](std::string what) {
            report.ok = false;
            report.violation_link = i;
            report.violation = std::move(what);
            return report;
        };
        std::string structural = validate_cert(m, cert);
        if (!structural.empty()) return bad(structural);
        if (now < cert.not_before) return bad("not yet valid");
        if (now >= cert.not_after) return bad("expired");

        const Bytes& signer_key = (i == 0 ? cert.public_key : chain[i - 1].public_key);
        if (signer_key.size() != 32) return bad("signer key is not 32 bytes");
        PublicKey pk;
        std::copy(signer_key.begin(), signer_key.end(), pk.begin());
        if (!verify_cert_signature(cert, pk)) {
            return bad(i == 0 ? "root self-signature invalid" : "signature invalid");
        }
        if (i > 0 && !contains_volume(m, chain[i - 1].volume, cert.volume)) {
            return bad("volume not contained in parent");
        }
    }
    report.ok = true;
    return report;
}

bool contains_volume(const EarthModel& m, const VolumeSpec& parent,
                     const VolumeSpec& child) {
    (void)m;
    auto point_ok = [&](const Vec2& p, double alt_min, double alt_max) {
        for (const PolygonFrustum& pf : parent.frustums) {
            if (pf.alt_min <= alt_min && alt_max <= pf.alt_max &&
                point_in_ring(p, pf.ring2())) {
                return true;
            }
        }
        return false;
    };
    for (const PolygonFrustum& cf : child.frustums) {
        auto ring = cf.ring2();
        for (const Vec2& v : ring) {
            if (!point_ok(v, cf.alt_min, cf.alt_max)) return false;
        }
        double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
        for (const Vec2& v : ring) {
            xlo = std::min(xlo, v.x);
            xhi = std::max(xhi, v.x);
            ylo = std::min(ylo, v.y);
            yhi = std::max(yhi, v.y);
        }
        // 101x101 grid over the bounding box: >= 10000 deterministic samples.
        constexpr int kGrid = 101;
        for (int i = 0; i < kGrid; ++i) {
            for (int j = 0; j < kGrid; ++j) {
                Vec2 p{xlo + (xhi - xlo) * (i + 0.5) / kGrid,
                       ylo + (yhi - ylo) * (j + 0.5) / kGrid};
                if (!point_in_ring(p, ring)) continue;
                if (!point_ok(p, cf.alt_min, cf.alt_max)) return false;
            }
        }
    }
    return true;
}

Bytes RevocationRecord::signed_bytes() const {
    Bytes out;
    put_bytes(out, cert_hash.data(), cert_hash.size());
    put_u64(out, revoked_at);
    put_var_string(out, issuer_id);
    return out;
}

Bytes RevocationRecord::encode() const {
    Bytes out = signed_bytes();
    put_bytes(out, signature.data(), signature.size());
    return out;
}

RevocationRecord RevocationRecord::decode(const Bytes& b) {
    ByteReader r(b);
    RevocationRecord rec;
    rec.cert_hash = r.hash32();
    rec.revoked_at = r.u64();
    rec.issuer_id = r.var_string();
    Bytes sig = r.raw(64);
    std::copy(sig.begin(), sig.end(), rec.signature.begin());
    if (!r.done()) throw DecodeError("trailing bytes after revocation record");
    return rec;
}

}  // namespace gecko
