#include "gecko/merkle_log.hpp"

#include <bit>
#include <stdexcept>

namespace gecko {

Hash32 empty_tree_root() {
    static const Hash32 h = sha256(nullptr, 0);
    return h;
}

Hash32 log_leaf_hash(const Bytes& leaf) {
    return Sha256().update(uint8_t{0}).update(leaf).finish();
}

Hash32 log_interior_hash(const Hash32& left, const Hash32& right) {
    return Sha256().update(uint8_t{1}).update(left).update(right).finish();
}

namespace {
// Largest power of two strictly smaller than n (n >= 2).
size_t split_point(size_t n) { return std::bit_floor(n - 1); }
}  // namespace

size_t AppendOnlyLog::append(Bytes leaf) {
    leaf_hashes_.push_back(log_leaf_hash(leaf));
    leaves_.push_back(std::move(leaf));
    return leaves_.size() - 1;
}

const Bytes& AppendOnlyLog::entry(size_t index) const {
    if (index >= leaves_.size()) throw std::out_of_range("log entry index");
    return leaves_[index];
}

Hash32 AppendOnlyLog::subtree_root(size_t lo, size_t hi) const {
    size_t n = hi - lo;
    if (n == 0) return empty_tree_root();
    if (n == 1) return leaf_hashes_[lo];
    size_t k = split_point(n);
    return log_interior_hash(subtree_root(lo, lo + k), subtree_root(lo + k, hi));
}

Hash32 AppendOnlyLog::root_at(size_t n) const {
    if (n > size()) throw std::out_of_range("tree size beyond the log");
    return subtree_root(0, n);
}

std::vector<Hash32> AppendOnlyLog::path(size_t m, size_t lo, size_t hi) const {
    size_t n = hi - lo;
    if (n == 1) return {};
    size_t k = split_point(n);
    std::vector<Hash32> out;
    if (m < k) {
        out = path(m, lo, lo + k);
        out.push_back(subtree_root(lo + k, hi));
    } else {
        out = path(m - k, lo + k, hi);
        out.push_back(subtree_root(lo, lo + k));
    }
    return out;
}

std::vector<Hash32> AppendOnlyLog::inclusion_proof(size_t index, size_t tree_size) const {
    if (tree_size > size() || index >= tree_size) {
        throw std::out_of_range("inclusion proof indices");
    }
    return path(index, 0, tree_size);
}

std::vector<Hash32> AppendOnlyLog::subproof(size_t m, size_t lo, size_t hi,
                                            bool complete) const {
    size_t n = hi - lo;
    if (m == n) {
        if (complete) return {};
        return {subtree_root(lo, hi)};
    }
    size_t k = split_point(n);
    std::vector<Hash32> out;
    if (m <= k) {
        out = subproof(m, lo, lo + k, complete);
        out.push_back(subtree_root(lo + k, hi));
    } else {
        out = subproof(m - k, lo + k, hi, false);
        out.push_back(subtree_root(lo, lo + k));
    }
    return out;
}

std::vector<Hash32> AppendOnlyLog::consistency_proof(size_t size_a, size_t size_b) const {
    if (size_b > size() || size_a > size_b) {
        throw std::out_of_range("consistency proof sizes");
    }
    if (size_a == 0 || size_a == size_b) return {};
    return subproof(size_a, 0, size_b, true);
}

bool verify_inclusion(const Hash32& leaf_hash, size_t index, size_t tree_size,
                      const std::vector<Hash32>& path, const Hash32& root) {
    if (index >= tree_size) return false;
    size_t fn = index;
    size_t sn = tree_size - 1;
    Hash32 r = leaf_hash;
    for (const Hash32& v : path) {
        if (sn == 0) return false;
        if ((fn & 1) != 0 || fn == sn) {
            r = log_interior_hash(v, r);
            if ((fn & 1) == 0) {
                while (fn != 0 && (fn & 1) == 0) {
                    fn >>= 1;
                    sn >>= 1;
                }
            }
        } else {
            r = log_interior_hash(r, v);
        }
        fn >>= 1;
        sn >>= 1;
    }
    return sn == 0 && r == root;
}

bool verify_consistency(const Hash32& root_a, size_t size_a, const Hash32& root_b,
                        size_t size_b, const std::vector<Hash32>& proof) {
    if (size_a > size_b) return false;
    if (size_a == size_b) return proof.empty() && root_a == root_b;
    if (size_a == 0) return proof.empty() && root_a == empty_tree_root();

    std::vector<Hash32> p = proof;
    if (std::has_single_bit(size_a)) {
        p.insert(p.begin(), root_a);
    }
    if (p.empty()) return false;

    size_t fn = size_a - 1;
    size_t sn = size_b - 1;
    while ((fn & 1) != 0) {
        fn >>= 1;
        sn >>= 1;
    }
    Hash32 fr = p[0];
    Hash32 sr = p[0];
    for (size_t i = 1; i < p.size(); ++i) {
        const Hash32& c = p[i];
        if (sn == 0) return false;
        if ((fn & 1) != 0 || fn == sn) {
            fr = log_interior_hash(c, fr);
            sr = log_interior_hash(c, sr);
            if ((fn & 1) == 0) {
                while (fn != 0 && (fn & 1) == 0) {
                    fn >>= 1;
                    sn >>= 1;
                }
            }
        } else {
            sr = log_interior_hash(sr, c);
        }
        fn >>= 1;
        sn >>= 1;
    }
    return sn == 0 && fr == root_a && sr == root_b;
}

}  // namespace gecko
