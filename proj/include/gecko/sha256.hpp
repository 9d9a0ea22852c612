#pragma once

#include "gecko/bytes.hpp"

namespace gecko {

Hash32 sha256(const uint8_t* data, size_t len);
inline Hash32 sha256(const Bytes& b) { return sha256(b.data(), b.size()); }
inline Hash32 sha256(std::string_view s) {
    return sha256(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

/// Incremental SHA-256 for concatenation-style hash inputs.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(const uint8_t* data, size_t len);
    Sha256& update(const Bytes& b) { return update(b.data(), b.size()); }
    Sha256& update(const Hash32& h) { return update(h.data(), h.size()); }
    Sha256& update(uint8_t byte) { return update(&byte, 1); }
    Hash32 finish();

private:
    void* ctx_;
};

}  // namespace gecko
