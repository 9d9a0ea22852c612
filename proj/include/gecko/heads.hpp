#pragma once

#include <string>
#include <vector>

#include "gecko/bytes.hpp"
#include "gecko/ed25519.hpp"

namespace gecko {

/// Signed tree head of an append-only log.
struct STH {
    uint64_t timestamp = 0;  // unix seconds
    uint64_t tree_size = 0;
    Hash32 root;
    Signature signature{};

    Bytes signed_bytes() const;
    void sign(const SigningKey& key) { signature = key.sign(signed_bytes()); }
    bool verify(const PublicKey& pub) const {
        return ed25519_verify(pub, signed_bytes(), signature);
    }

    friend bool operator==(const STH&, const STH&) = default;
};

/// Signed map head: the SMT root together with the exact log prefixes it was
/// built from. Leaf of the consistency tree.
struct SignedMapHead {
    Hash32 smt_root;
    uint64_t timestamp = 0;
    std::vector<std::pair<std::string, STH>> sources;  // (log id, covered STH)
    Signature signature{};

    Bytes signed_bytes() const;
    /// Full canonical encoding including the signature; consistency tree leaf.
    Bytes leaf_bytes() const;
    void sign(const SigningKey& key) { signature = key.sign(signed_bytes()); }
    bool verify(const PublicKey& pub) const {
        return ed25519_verify(pub, signed_bytes(), signature);
    }

    friend bool operator==(const SignedMapHead&, const SignedMapHead&) = default;
};

/// Signed root and size of the consistency tree.
struct SignedConsistencyHead {
    Hash32 root;
    uint64_t size = 0;
    Signature signature{};

    Bytes signed_bytes() const;
    void sign(const SigningKey& key) { signature = key.sign(signed_bytes()); }
    bool verify(const PublicKey& pub) const {
        return ed25519_verify(pub, signed_bytes(), signature);
    }

    friend bool operator==(const SignedConsistencyHead&, const SignedConsistencyHead&) = default;
};

/// Signed certificate timestamp issued by a log at submission time. Signs the
/// precertificate hash (certificate without SCTs and signature).
struct SCT {
    std::string log_id;
    uint64_t timestamp = 0;
    Hash32 cert_hash;
    Signature signature{};

    Bytes signed_bytes() const;
    void sign(const SigningKey& key) { signature = key.sign(signed_bytes()); }
    bool verify(const PublicKey& pub) const {
        return ed25519_verify(pub, signed_bytes(), signature);
    }

    friend bool operator==(const SCT&, const SCT&) = default;
};

SignedMapHead smh_from_leaf_bytes(const Bytes& b);

}  // namespace gecko
