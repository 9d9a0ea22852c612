#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gecko {

using Bytes = std::vector<uint8_t>;

/// 32-byte value used for SHA-256 digests and node hashes.
struct Hash32 : std::array<uint8_t, 32> {
    Hash32() { fill(0); }
    explicit Hash32(const std::array<uint8_t, 32>& a) : std::array<uint8_t, 32>(a) {}

    std::string hex() const;
    static std::optional<Hash32> from_hex(std::string_view s);
};

std::string to_hex(const uint8_t* data, size_t len);
inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }
std::optional<Bytes> from_hex(std::string_view s);

std::string base64_encode(const uint8_t* data, size_t len);
inline std::string base64_encode(const Bytes& b) { return base64_encode(b.data(), b.size()); }
std::optional<Bytes> base64_decode(std::string_view s);

// Big-endian scalar append/read helpers for canonical encodings.
void put_u8(Bytes& out, uint8_t v);
void put_u32(Bytes& out, uint32_t v);
void put_u64(Bytes& out, uint64_t v);
void put_i64(Bytes& out, int64_t v);
void put_f64(Bytes& out, double v);
void put_bytes(Bytes& out, const uint8_t* data, size_t len);
inline void put_bytes(Bytes& out, const Bytes& b) { put_bytes(out, b.data(), b.size()); }

/// Appends a u32 length prefix followed by the raw bytes.
void put_var_bytes(Bytes& out, const uint8_t* data, size_t len);
inline void put_var_bytes(Bytes& out, const Bytes& b) { put_var_bytes(out, b.data(), b.size()); }
inline void put_var_string(Bytes& out, std::string_view s) {
    put_var_bytes(out, reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

/// Sequential reader over a byte buffer. Throws DecodeError past the end.
class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t len) : data_(data), len_(len) {}
    explicit ByteReader(const Bytes& b) : ByteReader(b.data(), b.size()) {}

    uint8_t u8();
    uint32_t u32();
    uint64_t u64();
    int64_t i64();
    double f64();
    Bytes raw(size_t n);
    Bytes var_bytes();
    std::string var_string();
    Hash32 hash32();

    size_t remaining() const { return len_ - pos_; }
    bool done() const { return pos_ == len_; }

private:
    void need(size_t n);
    const uint8_t* data_;
    size_t len_;
    size_t pos_ = 0;
};

struct DecodeError : std::runtime_error {
    explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gecko
