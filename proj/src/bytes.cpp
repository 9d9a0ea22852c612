#include "gecko/bytes.hpp"

#include <bit>

namespace gecko {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

constexpr char kB64Digits[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_val(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}
}  // namespace

std::string to_hex(const uint8_t* data, size_t len) {
    std::string out(len * 2, '0');
    for (size_t i = 0; i < len; ++i) {
        out[2 * i] = kHexDigits[data[i] >> 4];
        out[2 * i + 1] = kHexDigits[data[i] & 0xf];
    }
    return out;
}

std::optional<Bytes> from_hex(std::string_view s) {
    if (s.size() % 2 != 0) return std::nullopt;
    Bytes out(s.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        int hi = hex_val(s[2 * i]);
        int lo = hex_val(s[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = static_cast<uint8_t>(hi << 4 | lo);
    }
    return out;
}

std::string Hash32::hex() const { return to_hex(data(), size()); }

std::optional<Hash32> Hash32::from_hex(std::string_view s) {
    auto b = gecko::from_hex(s);
    if (!b || b->size() != 32) return std::nullopt;
    Hash32 h;
    std::memcpy(h.data(), b->data(), 32);
    return h;
}

std::string base64_encode(const uint8_t* data, size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= len; i += 3) {
        uint32_t v = data[i] << 16 | data[i + 1] << 8 | data[i + 2];
        out.push_back(kB64Digits[v >> 18 & 0x3f]);
        out.push_back(kB64Digits[v >> 12 & 0x3f]);
        out.push_back(kB64Digits[v >> 6 & 0x3f]);
        out.push_back(kB64Digits[v & 0x3f]);
    }
    if (i + 1 == len) {
        uint32_t v = data[i] << 16;
        out.push_back(kB64Digits[v >> 18 & 0x3f]);
        out.push_back(kB64Digits[v >> 12 & 0x3f]);
        out.append("==");
    } else if (i + 2 == len) {
        uint32_t v = data[i] << 16 | data[i + 1] << 8;
        out.push_back(kB64Digits[v >> 18 & 0x3f]);
        out.push_back(kB64Digits[v >> 12 & 0x3f]);
        out.push_back(kB64Digits[v >> 6 & 0x3f]);
        out.push_back('=');
    }
    return out;
}

std::optional<Bytes> base64_decode(std::string_view s) {
    if (s.size() % 4 != 0) return std::nullopt;
    Bytes out;
    out.reserve(s.size() / 4 * 3);
    for (size_t i = 0; i < s.size(); i += 4) {
        int pad = 0;
        uint32_t v = 0;
        for (int j = 0; j < 4; ++j) {
            char c = s[i + j];
            if (c == '=') {
                if (i + 4 != s.size() || j < 2) return std::nullopt;
                ++pad;
                v <<= 6;
            } else {
                if (pad) return std::nullopt;
                int d = b64_val(c);
                if (d < 0) return std::nullopt;
                v = v << 6 | static_cast<uint32_t>(d);
            }
        }
        out.push_back(static_cast<uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<uint8_t>(v >> 8));
        if (pad < 1) out.push_back(static_cast<uint8_t>(v));
    }
    return out;
}

void put_u8(Bytes& out, uint8_t v) { out.push_back(v); }

void put_u32(Bytes& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_u64(Bytes& out, uint64_t v) {
    put_u32(out, static_cast<uint32_t>(v >> 32));
    put_u32(out, static_cast<uint32_t>(v));
}

void put_i64(Bytes& out, int64_t v) { put_u64(out, static_cast<uint64_t>(v)); }

void put_f64(Bytes& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

void put_bytes(Bytes& out, const uint8_t* data, size_t len) {
    out.insert(out.end(), data, data + len);
}

void put_var_bytes(Bytes& out, const uint8_t* data, size_t len) {
    put_u32(out, static_cast<uint32_t>(len));
    put_bytes(out, data, len);
}

void ByteReader::need(size_t n) {
    if (len_ - pos_ < n) throw DecodeError("truncated input");
}

uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

uint32_t ByteReader::u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_++];
    return v;
}

uint64_t ByteReader::u64() {
    uint64_t hi = u32();
    return hi << 32 | u32();
}

int64_t ByteReader::i64() { return static_cast<int64_t>(u64()); }

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

Bytes ByteReader::raw(size_t n) {
    need(n);
    Bytes out(data_ + pos_, data_ + pos_ + n);
    pos_ += n;
    return out;
}

Bytes ByteReader::var_bytes() {
    uint32_t n = u32();
    return raw(n);
}

std::string ByteReader::var_string() {
    Bytes b = var_bytes();
    return std::string(b.begin(), b.end());
}

Hash32 ByteReader::hash32() {
    need(32);
    Hash32 h;
    std::memcpy(h.data(), data_ + pos_, 32);
    pos_ += 32;
    return h;
}

}  // namespace gecko
