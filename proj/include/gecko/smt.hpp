#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>

#include "gecko/geo.hpp"
#include "gecko/heads.hpp"
#include "gecko/sha256.hpp"

namespace gecko {

/// Hash of the single zero byte: the value of every sparse node and of every
/// bit string pair outside the tree.
const Hash32& default_hash();

/// Leaf hash: SHA-256(0x00 || h(c_0) || ... || h(c_{L-1})). Empty lists give
/// default_hash(). Throws std::logic_error when the list is not strictly
/// ascending.
Hash32 hash_leaf(std::span<const Hash32> certs);

/// Intermediate node hash: SHA-256(0x01 || h1..h4 [|| h5]) where h5 hashes the
/// concatenated certificate hashes. Children in slot order surface-0,
/// surface-1, altitude-0, altitude-1; absent slots carry default_hash().
Hash32 hash_intermediate(const std::array<Hash32, 4>& children,
                         std::span<const Hash32> certs);

/// Logical node record: the pair, its sorted certificate hashes, and which of
/// the four child slots hold a non-sparse subtree.
struct SmtNode {
    BitStringPair pair;
    std::vector<Hash32> cert_hashes;
    std::array<bool, 4> child_present{};
};

/// Node openings and boundary hashes that recompute the SMT root for a query,
/// proving presence and absence at once.
struct CompletenessProof {
    std::vector<BitStringPair> query_pairs;
    std::vector<std::pair<BitStringPair, std::vector<Hash32>>> openings;
    std::vector<std::pair<BitStringPair, Hash32>> boundary_hashes;
    SignedMapHead smh;
};

struct VerifyOutcome {
    bool ok = false;
    std::string error;
    std::set<Hash32> certs;
};

/// Recomputes the root from the proof alone and compares against `root`.
/// Untrusted input: every structural defect fails verification outright.
VerifyOutcome verify_proof(const EarthModel& m, const CompletenessProof& proof,
                           const Hash32& root);

/// Storage record of a material node. The tree is stored path-compressed:
/// only nodes holding certificates, branching nodes, and the root are
/// materialized; single-child chains between them are implicit. `next[slot]`
/// is the nearest material descendant in that direction.
struct StoredNode {
    std::vector<Hash32> certs;
    std::array<std::optional<BitStringPair>, 4> next;
    Hash32 hash;

    int child_count() const {
        int n = 0;
        for (const auto& c : next) n += c.has_value();
        return n;
    }
};

/// Keyed node storage behind the tree; two instances back the serving and
/// ingesting tables.
class NodeStore {
public:
    virtual ~NodeStore() = default;
    virtual StoredNode* find(const BitStringPair& p) = 0;
    virtual const StoredNode* find(const BitStringPair& p) const = 0;
    virtual StoredNode& put(const BitStringPair& p, StoredNode node) = 0;
    virtual void erase(const BitStringPair& p) = 0;
    virtual size_t size() const = 0;
    virtual void for_each(
        const std::function<void(const BitStringPair&, const StoredNode&)>& fn) const = 0;
};

std::unique_ptr<NodeStore> make_memory_store();

/// Geographically structured sparse Merkle tree with certificates at
/// arbitrary nodes. Single writer; readers may use a fully updated tree
/// concurrently.
class Smt {
public:
    explicit Smt(EarthModel model = EarthModel::wgs84(),
                 std::unique_ptr<NodeStore> store = make_memory_store());

    const EarthModel& model() const { return model_; }

    /// Stages the certificate hash into every listed node. Idempotent.
    void insert(const Hash32& cert, const std::vector<BitStringPair>& pairs);

    /// Removes the certificate hash from the listed nodes; returns how many
    /// were absent (no-ops).
    size_t remove(const Hash32& cert, const std::vector<BitStringPair>& pairs);

    /// Recomputes every dirty hash bottom-up and returns the new root.
    Hash32 batch_update();

    /// Current root; requires no staged structural changes.
    Hash32 root() const;

    bool dirty() const { return !dirty_.empty(); }
    size_t material_node_count() const { return store_->size(); }

    /// Material view of a node (empty when the node is implicit or sparse).
    std::optional<SmtNode> get_node(const BitStringPair& p) const;

    /// Visits every material node (data and branch nodes).
    void for_each_node(const std::function<void(const SmtNode&)>& fn) const;

    /// Openings for every non-sparse node related to the query pairs plus the
    /// boundary hashes of their unopened children. Query pairs must be valid
    /// and mutually non-nested; the tree must be clean.
    CompletenessProof generate_proof(const std::vector<BitStringPair>& query_pairs) const;

private:
    struct WalkFrame {
        BitStringPair pair;
        int slot = -1;  // slot taken from this node toward the target
    };

    StoredNode& root_node();
    const StoredNode& root_node() const;
    Hash32 chain_top_hash(const BitStringPair& parent, int slot) const;
    Hash32 node_hash_for(const BitStringPair& pair, const StoredNode& n) const;
    void mark_dirty(const std::vector<BitStringPair>& ancestors);

    EarthModel model_;
    std::unique_ptr<NodeStore> store_;
    std::set<BitStringPair> dirty_;
};

/// Immediate child of `ancestor` on the tree path toward `target`.
BitStringPair step_toward(const BitStringPair& ancestor, const BitStringPair& target);

/// Child slot index (surface-0, surface-1, altitude-0, altitude-1) of a child
/// relative to its direct parent.
int child_slot(const BitStringPair& parent, const BitStringPair& child);

}  // namespace gecko
