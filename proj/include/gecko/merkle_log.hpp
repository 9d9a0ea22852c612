#pragma once

#include <vector>

#include "gecko/bytes.hpp"
#include "gecko/sha256.hpp"

namespace gecko {

/// SHA-256 of the empty string: root of the zero-leaf tree.
Hash32 empty_tree_root();

/// Leaf hash with the 0x00 domain-separation prefix.
Hash32 log_leaf_hash(const Bytes& leaf);

/// Interior hash with the 0x01 prefix.
Hash32 log_interior_hash(const Hash32& left, const Hash32& right);

/// Append-only Merkle log with CT-style hashing: leaves are never mutated and
/// every historical root stays reconstructible.
class AppendOnlyLog {
public:
    /// Appends the leaf and returns its index.
    size_t append(Bytes leaf);

    size_t size() const { return leaves_.size(); }
    const Bytes& entry(size_t index) const;

    Hash32 root() const { return root_at(size()); }
    /// Root of the first n leaves.
    Hash32 root_at(size_t n) const;

    /// Audit path for the leaf at `index` within the first `tree_size` leaves.
    std::vector<Hash32> inclusion_proof(size_t index, size_t tree_size) const;

    /// Proof that the size_a-leaf tree is a prefix of the size_b-leaf tree.
    std::vector<Hash32> consistency_proof(size_t size_a, size_t size_b) const;

private:
    Hash32 subtree_root(size_t lo, size_t hi) const;
    std::vector<Hash32> path(size_t m, size_t lo, size_t hi) const;
    std::vector<Hash32> subproof(size_t m, size_t lo, size_t hi, bool complete) const;

    std::vector<Bytes> leaves_;
    std::vector<Hash32> leaf_hashes_;
};

bool verify_inclusion(const Hash32& leaf_hash, size_t index, size_t tree_size,
                      const std::vector<Hash32>& path, const Hash32& root);

bool verify_consistency(const Hash32& root_a, size_t size_a, const Hash32& root_b,
                        size_t size_b, const std::vector<Hash32>& proof);

}  // namespace gecko
