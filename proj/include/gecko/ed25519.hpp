#pragma once

#include "gecko/bytes.hpp"

namespace gecko {

using PublicKey = std::array<uint8_t, 32>;
using Signature = std::array<uint8_t, 64>;

/// Ed25519 signing key. Holds the 32-byte seed; the public key is derived.
class SigningKey {
public:
    /// Fresh random key.
    static SigningKey generate();
    /// Deterministic key from a 32-byte seed (tests, reproducible datasets).
    static SigningKey from_seed(const std::array<uint8_t, 32>& seed);
    static std::optional<SigningKey> from_seed_hex(std::string_view hex);

    const PublicKey& public_key() const { return pub_; }
    const std::array<uint8_t, 32>& seed() const { return seed_; }
    std::string seed_hex() const { return to_hex(seed_.data(), seed_.size()); }

    Signature sign(const uint8_t* msg, size_t len) const;
    Signature sign(const Bytes& msg) const { return sign(msg.data(), msg.size()); }

private:
    SigningKey() = default;
    std::array<uint8_t, 32> seed_{};
    PublicKey pub_{};
};

bool ed25519_verify(const PublicKey& pub, const uint8_t* msg, size_t len,
                    const Signature& sig);
inline bool ed25519_verify(const PublicKey& pub, const Bytes& msg, const Signature& sig) {
    return ed25519_verify(pub, msg.data(), msg.size(), sig);
}

std::optional<PublicKey> public_key_from_hex(std::string_view hex);
inline std::string public_key_hex(const PublicKey& pk) { return to_hex(pk.data(), pk.size()); }

std::optional<Signature> signature_from_b64(std::string_view b64);
inline std::string signature_b64(const Signature& s) { return base64_encode(s.data(), s.size()); }

}  // namespace gecko
