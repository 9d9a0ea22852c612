#include "gecko/sha256.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace gecko {

Hash32 sha256(const uint8_t* data, size_t len) {
    Hash32 out;
    unsigned int outlen = 0;
    if (EVP_Digest(data, len, out.data(), &outlen, EVP_sha256(), nullptr) != 1 ||
        outlen != 32) {
        throw std::runtime_error("sha256 failed");
    }
    return out;
}

Sha256::Sha256() {
    auto* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 init failed");
    }
    ctx_ = ctx;
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha256& Sha256::update(const uint8_t* data, size_t len) {
    if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data, len) != 1) {
        throw std::runtime_error("sha256 update failed");
    }
    return *this;
}

Hash32 Sha256::finish() {
    Hash32 out;
    unsigned int outlen = 0;
    if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &outlen) != 1 ||
        outlen != 32) {
        throw std::runtime_error("sha256 final failed");
    }
    return out;
}

}  // namespace gecko
