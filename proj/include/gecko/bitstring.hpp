#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gecko {

/// Bit string of up to 64 bits, MSB-first (bit 0 is the root-most bit).
class BitString {
public:
    BitString() = default;
    BitString(uint64_t value, int len) : bits_(value), len_(static_cast<uint8_t>(len)) {}

    static std::optional<BitString> parse(std::string_view s);

    int size() const { return len_; }
    bool empty() const { return len_ == 0; }
    int bit(int i) const { return static_cast<int>(bits_ >> (len_ - 1 - i)) & 1; }

    /// Integer value of the bits, right-aligned.
    uint64_t value() const { return bits_; }
    /// Value right-padded with zeros to `width` bits (lower bound of the covered range).
    uint64_t padded_floor(int width) const { return bits_ << (width - len_); }
    /// One past the value right-padded with ones to `width` bits (exclusive upper bound).
    uint64_t padded_ceil(int width) const { return (bits_ + 1) << (width - len_); }

    BitString append(int b) const {
        return BitString(bits_ << 1 | static_cast<uint64_t>(b & 1), len_ + 1);
    }
    BitString parent() const { return BitString(bits_ >> 1, len_ - 1); }
    BitString prefix(int n) const { return BitString(bits_ >> (len_ - n), n); }
    int last_bit() const { return static_cast<int>(bits_ & 1); }

    bool is_prefix_of(const BitString& other) const {
        return len_ <= other.len_ && other.prefix(len_).bits_ == bits_;
    }

    std::string str() const;

    friend bool operator==(const BitString&, const BitString&) = default;
    friend bool operator<(const BitString& a, const BitString& b) {
        return a.len_ != b.len_ ? a.len_ < b.len_ : a.bits_ < b.bits_;
    }

private:
    uint64_t bits_ = 0;
    uint8_t len_ = 0;
};

/// Longest common prefix of two bit strings.
BitString common_prefix(const BitString& a, const BitString& b);

/// Interleaves x (nx bits) and y (ny bits) as x0 y0 x1 y1 ..., appending the
/// final unpaired x bit when nx == ny + 1.
BitString interleave_bits(uint64_t x, uint64_t y, int nx, int ny);

/// Splits an interleaved string back into its x and y prefixes (x first).
void deinterleave_bits(const BitString& s, BitString& x, BitString& y);

/// Canonical fixed-width byte encoding of a surface/altitude bit string pair:
/// 1 byte surface length | 7 bytes surface bits MSB-first zero-padded |
/// 1 byte altitude length | 2 bytes altitude bits MSB-first zero-padded.
using PairKey = std::array<uint8_t, 11>;

/// SMT node address: surface bit string (<=51 bits) plus altitude bit string
/// (<=15 bits). (empty, empty) is the tree root.
struct BitStringPair {
    BitString surface;
    BitString altitude;

    PairKey key() const;
    static std::optional<BitStringPair> from_key(const PairKey& k);

    std::string hex() const;
    static std::optional<BitStringPair> from_hex(std::string_view s);

    bool is_root() const { return surface.empty() && altitude.empty(); }
    std::string str() const;

    friend bool operator==(const BitStringPair&, const BitStringPair&) = default;
};

/// Orders pairs by their canonical byte encoding.
bool operator<(const BitStringPair& a, const BitStringPair& b);

/// True if `a` lies on the tree path from the root to `b` (excluding `b`).
/// Surface extension is only reachable while the altitude string is empty.
bool is_tree_ancestor(const BitStringPair& a, const BitStringPair& b);

/// True if node `a`'s frustum contains node `b`'s (both strings prefix-nested).
bool pair_volume_contains(const BitStringPair& a, const BitStringPair& b);

/// True if the two nodes' frustums overlap: grid-aligned boxes intersect
/// exactly when both coordinates are prefix-comparable.
bool pair_volumes_intersect(const BitStringPair& a, const BitStringPair& b);

}  // namespace gecko
