#include "gecko/bitstring.hpp"

#include "gecko/bytes.hpp"

namespace gecko {

std::optional<BitString> BitString::parse(std::string_view s) {
    if (s.size() > 64) return std::nullopt;
    uint64_t v = 0;
    for (char c : s) {
        if (c != '0' && c != '1') return std::nullopt;
        v = v << 1 | static_cast<uint64_t>(c - '0');
    }
    return BitString(v, static_cast<int>(s.size()));
}

std::string BitString::str() const {
    std::string out(static_cast<size_t>(len_), '0');
    for (int i = 0; i < len_; ++i) out[static_cast<size_t>(i)] = static_cast<char>('0' + bit(i));
    return out;
}

BitString common_prefix(const BitString& a, const BitString& b) {
    int n = 0;
    int limit = std::min(a.size(), b.size());
    while (n < limit && a.bit(n) == b.bit(n)) ++n;
    return a.prefix(n);
}

BitString interleave_bits(uint64_t x, uint64_t y, int nx, int ny) {
    BitString out;
    for (int i = 0; i < ny; ++i) {
        out = out.append(static_cast<int>(x >> (nx - 1 - i)) & 1);
        out = out.append(static_cast<int>(y >> (ny - 1 - i)) & 1);
    }
    for (int i = ny; i < nx; ++i) {
        out = out.append(static_cast<int>(x >> (nx - 1 - i)) & 1);
    }
    return out;
}

void deinterleave_bits(const BitString& s, BitString& x, BitString& y) {
    x = BitString();
    y = BitString();
    for (int i = 0; i < s.size(); ++i) {
        if (i % 2 == 0) {
            x = x.append(s.bit(i));
        } else {
            y = y.append(s.bit(i));
        }
    }
}

namespace {
void pack_msb_first(const BitString& s, uint8_t* out, int nbytes) {
    for (int i = 0; i < nbytes; ++i) out[i] = 0;
    for (int i = 0; i < s.size(); ++i) {
        if (s.bit(i)) out[i / 8] |= static_cast<uint8_t>(0x80 >> (i % 8));
    }
}

std::optional<BitString> unpack_msb_first(const uint8_t* in, int nbytes, int len) {
    if (len > nbytes * 8 || len > 64) return std::nullopt;
    BitString s;
    for (int i = 0; i < len; ++i) {
        s = s.append((in[i / 8] >> (7 - i % 8)) & 1);
    }
    // Padding bits beyond the length must be zero for a canonical encoding.
    for (int i = len; i < nbytes * 8; ++i) {
        if ((in[i / 8] >> (7 - i % 8)) & 1) return std::nullopt;
    }
    return s;
}
}  // namespace

PairKey BitStringPair::key() const {
    PairKey k{};
    k[0] = static_cast<uint8_t>(surface.size());
    pack_msb_first(surface, k.data() + 1, 7);
    k[8] = static_cast<uint8_t>(altitude.size());
    pack_msb_first(altitude, k.data() + 9, 2);
    return k;
}

std::optional<BitStringPair> BitStringPair::from_key(const PairKey& k) {
    if (k[0] > 51 || k[8] > 15) return std::nullopt;
    auto s = unpack_msb_first(k.data() + 1, 7, k[0]);
    auto a = unpack_msb_first(k.data() + 9, 2, k[8]);
    if (!s || !a) return std::nullopt;
    return BitStringPair{*s, *a};
}

std::string BitStringPair::hex() const {
    PairKey k = key();
    return to_hex(k.data(), k.size());
}

std::optional<BitStringPair> BitStringPair::from_hex(std::string_view s) {
    auto b = gecko::from_hex(s);
    if (!b || b->size() != 11) return std::nullopt;
    PairKey k;
    std::copy(b->begin(), b->end(), k.begin());
    return from_key(k);
}

std::string BitStringPair::str() const {
    auto part = [](const BitString& s) { return s.empty() ? std::string("e") : s.str(); };
    return "(" + part(surface) + "," + part(altitude) + ")";
}

bool operator<(const BitStringPair& a, const BitStringPair& b) {
    // Matches the lexicographic order of the canonical key: the length byte
    // leads each part, and equal-length MSB-first bit packs compare like the
    // right-aligned values.
    if (a.surface.size() != b.surface.size()) return a.surface.size() < b.surface.size();
    if (a.surface.value() != b.surface.value()) return a.surface.value() < b.surface.value();
    if (a.altitude.size() != b.altitude.size()) return a.altitude.size() < b.altitude.size();
    return a.altitude.value() < b.altitude.value();
}

bool is_tree_ancestor(const BitStringPair& a, const BitStringPair& b) {
    if (a == b) return false;
    if (a.altitude.empty()) return a.surface.is_prefix_of(b.surface);
    return a.surface == b.surface && a.altitude.is_prefix_of(b.altitude);
}

bool pair_volume_contains(const BitStringPair& a, const BitStringPair& b) {
    return a.surface.is_prefix_of(b.surface) && a.altitude.is_prefix_of(b.altitude);
}

bool pair_volumes_intersect(const BitStringPair& a, const BitStringPair& b) {
    return (a.surface.is_prefix_of(b.surface) || b.surface.is_prefix_of(a.surface)) &&
           (a.altitude.is_prefix_of(b.altitude) || b.altitude.is_prefix_of(a.altitude));
}

}  // namespace gecko
