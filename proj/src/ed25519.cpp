#include "gecko/ed25519.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <memory>
#include <stdexcept>

namespace gecko {

namespace {
struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

PkeyPtr private_key_from_seed(const std::array<uint8_t, 32>& seed) {
    PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(),
                                             seed.size()));
    if (!key) throw std::runtime_error("ed25519 key import failed");
    return key;
}
}  // namespace

SigningKey SigningKey::generate() {
    std::array<uint8_t, 32> seed;
    if (RAND_bytes(seed.data(), static_cast<int>(seed.size())) != 1) {
        throw std::runtime_error("RAND_bytes failed");
    }
    return from_seed(seed);
}

SigningKey SigningKey::from_seed(const std::array<uint8_t, 32>& seed) {
    SigningKey k;
    k.seed_ = seed;
    auto key = private_key_from_seed(seed);
    size_t publen = k.pub_.size();
    if (EVP_PKEY_get_raw_public_key(key.get(), k.pub_.data(), &publen) != 1 ||
        publen != 32) {
        throw std::runtime_error("ed25519 public key derivation failed");
    }
    return k;
}

std::optional<SigningKey> SigningKey::from_seed_hex(std::string_view hex) {
    auto b = from_hex(hex);
    if (!b || b->size() != 32) return std::nullopt;
    std::array<uint8_t, 32> seed;
    std::memcpy(seed.data(), b->data(), 32);
    return from_seed(seed);
}

Signature SigningKey::sign(const uint8_t* msg, size_t len) const {
    auto key = private_key_from_seed(seed_);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("ed25519 sign ctx failed");
    Signature sig{};
    size_t siglen = sig.size();
    bool ok = EVP_DigestSignInit(ctx, nullptr, nullptr, nullptr, key.get()) == 1 &&
              EVP_DigestSign(ctx, sig.data(), &siglen, msg, len) == 1 && siglen == 64;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("ed25519 sign failed");
    return sig;
}

bool ed25519_verify(const PublicKey& pub, const uint8_t* msg, size_t len,
                    const Signature& sig) {
    PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(),
                                            pub.size()));
    if (!key) return false;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) return false;
    bool ok = EVP_DigestVerifyInit(ctx, nullptr, nullptr, nullptr, key.get()) == 1 &&
              EVP_DigestVerify(ctx, sig.data(), sig.size(), msg, len) == 1;
    EVP_MD_CTX_free(ctx);
    return ok;
}

std::optional<PublicKey> public_key_from_hex(std::string_view hex) {
    auto b = from_hex(hex);
    if (!b || b->size() != 32) return std::nullopt;
    PublicKey pk;
    std::memcpy(pk.data(), b->data(), 32);
    return pk;
}

std::optional<Signature> signature_from_b64(std::string_view b64) {
    auto b = base64_decode(b64);
    if (!b || b->size() != 64) return std::nullopt;
    Signature s;
    std::memcpy(s.data(), b->data(), 64);
    return s;
}

}  // namespace gecko
