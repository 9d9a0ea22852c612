#include "gecko/heads.hpp"

namespace gecko {

Bytes STH::signed_bytes() const {
    Bytes out;
    put_u64(out, timestamp);
    put_u64(out, tree_size);
    put_bytes(out, root.data(), root.size());
    return out;
}

Bytes SignedMapHead::signed_bytes() const {
    Bytes out;
    put_bytes(out, smt_root.data(), smt_root.size());
    put_u64(out, timestamp);
    put_u32(out, static_cast<uint32_t>(sources.size()));
    for (const auto& [log_id, sth] : sources) {
        put_var_string(out, log_id);
        put_bytes(out, sth.signed_bytes());
        put_bytes(out, sth.signature.data(), sth.signature.size());
    }
    return out;
}

Bytes SignedMapHead::leaf_bytes() const {
    Bytes out = signed_bytes();
    put_bytes(out, signature.data(), signature.size());
    return out;
}

SignedMapHead smh_from_leaf_bytes(const Bytes& b) {
    ByteReader r(b);
    SignedMapHead smh;
    smh.smt_root = r.hash32();
    smh.timestamp = r.u64();
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        std::string id = r.var_string();
        STH sth;
        sth.timestamp = r.u64();
        sth.tree_size = r.u64();
        sth.root = r.hash32();
        Bytes sig = r.raw(64);
        std::copy(sig.begin(), sig.end(), sth.signature.begin());
        smh.sources.emplace_back(std::move(id), sth);
    }
    Bytes sig = r.raw(64);
    std::copy(sig.begin(), sig.end(), smh.signature.begin());
    if (!r.done()) throw DecodeError("trailing bytes after signed map head");
    return smh;
}

Bytes SignedConsistencyHead::signed_bytes() const {
    Bytes out;
    put_bytes(out, root.data(), root.size());
    put_u64(out, size);
    return out;
}

Bytes SCT::signed_bytes() const {
    Bytes out;
    put_var_string(out, log_id);
    put_u64(out, timestamp);
    put_bytes(out, cert_hash.data(), cert_hash.size());
    return out;
}

}  // namespace gecko
