#include "gecko/smt.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace gecko {

const Hash32& default_hash() {
    static const Hash32 h = [] {
        uint8_t zero = 0;
        return sha256(&zero, 1);
    }();
    return h;
}

Hash32 hash_leaf(std::span<const Hash32> certs) {
    for (size_t i = 1; i < certs.size(); ++i) {
        if (!(certs[i - 1] < certs[i])) {
            throw std::logic_error("certificate hashes must be strictly ascending");
        }
    }
    if (certs.empty()) return default_hash();
    Sha256 h;
    h.update(uint8_t{0});
    for (const Hash32& c : certs) h.update(c);
    return h.finish();
}

Hash32 hash_intermediate(const std::array<Hash32, 4>& children,
                         std::span<const Hash32> certs) {
    Sha256 h;
    h.update(uint8_t{1});
    for (const Hash32& c : children) h.update(c);
    if (!certs.empty()) {
        Sha256 inner;
        for (const Hash32& c : certs) inner.update(c);
        h.update(inner.finish());
    }
    return h.finish();
}

BitStringPair step_toward(const BitStringPair& ancestor, const BitStringPair& target) {
    if (ancestor.surface == target.surface) {
        return {ancestor.surface,
                ancestor.altitude.append(target.altitude.bit(ancestor.altitude.size()))};
    }
    return {ancestor.surface.append(target.surface.bit(ancestor.surface.size())),
            BitString()};
}

int child_slot(const BitStringPair& parent, const BitStringPair& child) {
    if (child.surface.size() == parent.surface.size() + 1) return child.surface.last_bit();
    return 2 + child.altitude.last_bit();
}

namespace {
int total_depth(const BitStringPair& p) { return p.surface.size() + p.altitude.size(); }

BitStringPair child_of(const BitStringPair& parent, int slot) {
    if (slot < 2) return {parent.surface.append(slot), parent.altitude};
    return {parent.surface, parent.altitude.append(slot - 2)};
}

/// Deepest common tree ancestor of two unrelated pairs.
BitStringPair tree_lcp(const BitStringPair& p, const BitStringPair& q) {
    if (p.surface == q.surface) {
        return {p.surface, common_prefix(p.altitude, q.altitude)};
    }
    return {common_prefix(p.surface, q.surface), BitString()};
}

/// Slots that exist for a pair in the tree. Surface slots require an empty
/// altitude string and spare surface bits; altitude slots require spare
/// altitude bits.
std::array<bool, 4> real_slots(const EarthModel& m, const BitStringPair& p) {
    std::array<bool, 4> out{};
    if (p.altitude.size() == m.altitude_height()) return out;
    bool surf = p.altitude.empty() && p.surface.size() < m.surface_height();
    out[0] = out[1] = surf;
    out[2] = out[3] = true;
    return out;
}

struct KeyHash {
    size_t operator()(const PairKey& k) const {
        // FNV-1a over the 11 canonical bytes.
        uint64_t h = 1469598103934665603ull;
        for (uint8_t b : k) {
            h ^= b;
            h *= 1099511628211ull;
        }
        return static_cast<size_t>(h);
    }
};

class MemoryNodeStore final : public NodeStore {
public:
    StoredNode* find(const BitStringPair& p) override {
        auto it = map_.find(p.key());
        return it == map_.end() ? nullptr : &it->second;
    }
    const StoredNode* find(const BitStringPair& p) const override {
        auto it = map_.find(p.key());
        return it == map_.end() ? nullptr : &it->second;
    }
    StoredNode& put(const BitStringPair& p, StoredNode node) override {
        return map_.insert_or_assign(p.key(), std::move(node)).first->second;
    }
    void erase(const BitStringPair& p) override { map_.erase(p.key()); }
    size_t size() const override { return map_.size(); }
    void for_each(const std::function<void(const BitStringPair&, const StoredNode&)>& fn)
        const override {
        for (const auto& [key, node] : map_) {
            fn(*BitStringPair::from_key(key), node);
        }
    }

private:
    // Node-based map: put() must not invalidate pointers to other entries.
    std::unordered_map<PairKey, StoredNode, KeyHash> map_;
};
}  // namespace

std::unique_ptr<NodeStore> make_memory_store() {
    return std::make_unique<MemoryNodeStore>();
}

Smt::Smt(EarthModel model, std::unique_ptr<NodeStore> store)
    : model_(model), store_(std::move(store)) {
    StoredNode root;
    root.hash = default_hash();
    store_->put(BitStringPair{}, std::move(root));
}

StoredNode& Smt::root_node() { return *store_->find(BitStringPair{}); }
const StoredNode& Smt::root_node() const { return *store_->find(BitStringPair{}); }

void Smt::mark_dirty(const std::vector<BitStringPair>& ancestors) {
    dirty_.insert(ancestors.begin(), ancestors.end());
}

void Smt::insert(const Hash32& cert, const std::vector<BitStringPair>& pairs) {
    for (const BitStringPair& p : pairs) {
        if (!pair_valid(model_, p)) {
            throw std::invalid_argument("invalid node pair " + p.str());
        }
        std::vector<BitStringPair> path;
        BitStringPair cur{};
        while (true) {
            path.push_back(cur);
            StoredNode* node = store_->find(cur);
            if (cur == p) {
                auto it = std::lower_bound(node->certs.begin(), node->certs.end(), cert);
                if (it == node->certs.end() || *it != cert) node->certs.insert(it, cert);
                break;
            }
            int slot = child_slot(cur, step_toward(cur, p));
            if (!node->next[slot]) {
                node->next[slot] = p;
                store_->put(p, StoredNode{{cert}, {}, default_hash()});
                path.push_back(p);
                break;
            }
            BitStringPair q = *node->next[slot];
            if (q == p || is_tree_ancestor(q, p)) {
                cur = q;
                continue;
            }
            if (is_tree_ancestor(p, q)) {
                // New node on the chain above q.
                StoredNode fresh{{cert}, {}, default_hash()};
                fresh.next[child_slot(p, step_toward(p, q))] = q;
                store_->put(p, std::move(fresh));
                store_->find(cur)->next[slot] = p;
                path.push_back(p);
                break;
            }
            // The chain diverges: split at the deepest common ancestor.
            BitStringPair b = tree_lcp(p, q);
            StoredNode branch{{}, {}, default_hash()};
            branch.next[child_slot(b, step_toward(b, q))] = q;
            branch.next[child_slot(b, step_toward(b, p))] = p;
            store_->put(b, std::move(branch));
            store_->put(p, StoredNode{{cert}, {}, default_hash()});
            store_->find(cur)->next[slot] = b;
            path.push_back(b);
            path.push_back(p);
            break;
        }
        mark_dirty(path);
    }
}

size_t Smt::remove(const Hash32& cert, const std::vector<BitStringPair>& pairs) {
    size_t missing = 0;
    for (const BitStringPair& p : pairs) {
        if (!pair_valid(model_, p)) {
            throw std::invalid_argument("invalid node pair " + p.str());
        }
        std::vector<BitStringPair> path;
        BitStringPair cur{};
        bool found = false;
        while (true) {
            path.push_back(cur);
            StoredNode* node = store_->find(cur);
            if (cur == p) {
                auto it = std::lower_bound(node->certs.begin(), node->certs.end(), cert);
                if (it != node->certs.end() && *it == cert) {
                    node->certs.erase(it);
                    found = true;
                }
                break;
            }
            int slot = child_slot(cur, step_toward(cur, p));
            if (!node->next[slot]) break;
            BitStringPair q = *node->next[slot];
            if (q == p || is_tree_ancestor(q, p)) {
                cur = q;
                continue;
            }
            break;
        }
        if (!found) {
            ++missing;
            continue;
        }
        mark_dirty(path);
        // Collapse nodes that stopped being material, bottom-up.
        size_t i = path.size() - 1;
        while (i > 0) {
            StoredNode* node = store_->find(path[i]);
            if (!node->certs.empty() || node->child_count() >= 2) break;
            StoredNode* parent = store_->find(path[i - 1]);
            int pslot = child_slot(path[i - 1], step_toward(path[i - 1], path[i]));
            if (node->child_count() == 1) {
                for (auto& n : node->next) {
                    if (n) parent->next[pslot] = n;
                }
                store_->erase(path[i]);
                break;
            }
            parent->next[pslot] = std::nullopt;
            store_->erase(path[i]);
            --i;
        }
    }
    return missing;
}

Hash32 Smt::chain_top_hash(const BitStringPair& parent, int slot) const {
    const StoredNode* pnode = store_->find(parent);
    BitStringPair q = *pnode->next[slot];
    BitStringPair target = child_of(parent, slot);
    Hash32 h = store_->find(q)->hash;
    BitStringPair cur = q;
    while (!(cur == target)) {
        BitStringPair par = node_parent(cur);
        std::array<Hash32, 4> slots{default_hash(), default_hash(), default_hash(),
                                    default_hash()};
        slots[child_slot(par, cur)] = h;
        h = hash_intermediate(slots, {});
        cur = par;
    }
    return h;
}

Hash32 Smt::node_hash_for(const BitStringPair& pair, const StoredNode& n) const {
    if (pair.altitude.size() == model_.altitude_height()) {
        return hash_leaf(n.certs);
    }
    std::array<Hash32, 4> slots{default_hash(), default_hash(), default_hash(),
                                default_hash()};
    bool any_child = false;
    for (int s = 0; s < 4; ++s) {
        if (n.next[s]) {
            slots[s] = chain_top_hash(pair, s);
            any_child = true;
        }
    }
    if (!any_child && n.certs.empty()) return default_hash();
    return hash_intermediate(slots, n.certs);
}

Hash32 Smt::batch_update() {
    std::vector<BitStringPair> order(dirty_.begin(), dirty_.end());
    std::sort(order.begin(), order.end(), [](const BitStringPair& a, const BitStringPair& b) {
        return total_depth(a) > total_depth(b);
    });
    for (const BitStringPair& p : order) {
        StoredNode* node = store_->find(p);
        if (!node) continue;  // collapsed during this batch
        node->hash = node_hash_for(p, *node);
    }
    dirty_.clear();
    return root_node().hash;
}

Hash32 Smt::root() const {
    if (!dirty_.empty()) throw std::logic_error("root on a tree with staged updates");
    return root_node().hash;
}

std::optional<SmtNode> Smt::get_node(const BitStringPair& p) const {
    const StoredNode* node = store_->find(p);
    if (!node) return std::nullopt;
    SmtNode out;
    out.pair = p;
    out.cert_hashes = node->certs;
    for (int s = 0; s < 4; ++s) out.child_present[s] = node->next[s].has_value();
    return out;
}

void Smt::for_each_node(const std::function<void(const SmtNode&)>& fn) const {
    store_->for_each([&](const BitStringPair& p, const StoredNode& n) {
        SmtNode out;
        out.pair = p;
        out.cert_hashes = n.certs;
        for (int s = 0; s < 4; ++s) out.child_present[s] = n.next[s].has_value();
        fn(out);
    });
}

CompletenessProof Smt::generate_proof(const std::vector<BitStringPair>& query_pairs) const {
    if (!dirty_.empty()) throw std::logic_error("proof on a tree with staged updates");
    if (query_pairs.empty()) throw std::invalid_argument("empty query");
    for (const BitStringPair& a : query_pairs) {
        if (!pair_valid(model_, a)) throw std::invalid_argument("invalid query pair " + a.str());
        for (const BitStringPair& b : query_pairs) {
            if (!(a == b) && pair_volume_contains(a, b)) {
                throw std::invalid_argument("nested query pairs " + a.str() + " and " + b.str());
            }
        }
    }

    auto intersects_query = [&](const BitStringPair& p) {
        for (const BitStringPair& q : query_pairs) {
            if (pair_volumes_intersect(p, q)) return true;
        }
        return false;
    };

    // The opened set is every non-sparse node whose frustum intersects a
    // query frustum. Child volumes nest inside their parent's, so the walk
    // prunes as soon as a node stops intersecting. Material nodes carry their
    // certificates; chain nodes are implicit single-child nodes keyed to the
    // material node below them.
    std::map<BitStringPair, const StoredNode*> open_material;
    std::map<BitStringPair, BitStringPair> open_chain;  // chain node -> bottom material

    {
        const StoredNode* root = &root_node();
        if (!(root->certs.empty() && root->child_count() == 0)) {
            auto visit = [&](auto&& self, const BitStringPair& pair,
                             const StoredNode* node) -> void {
                open_material[pair] = node;
                for (int s = 0; s < 4; ++s) {
                    if (!node->next[s]) continue;
                    BitStringPair q = *node->next[s];
                    BitStringPair cur = child_of(pair, s);
                    bool reached = true;
                    while (!(cur == q)) {
                        if (!intersects_query(cur)) {
                            reached = false;
                            break;
                        }
                        open_chain[cur] = q;
                        cur = step_toward(cur, q);
                    }
                    if (reached && intersects_query(q)) {
                        self(self, q, store_->find(q));
                    }
                }
            };
            // The root's frustum contains every query volume.
            visit(visit, BitStringPair{}, root);
        }
    }

    // Chain nodes double as openings with empty certificate lists.
    CompletenessProof proof;
    proof.query_pairs = query_pairs;
    std::sort(proof.query_pairs.begin(), proof.query_pairs.end());

    std::map<BitStringPair, std::vector<Hash32>> openings;
    for (const auto& [pair, node] : open_material) openings[pair] = node->certs;
    for (const auto& [pair, q] : open_chain) openings[pair] = {};

    auto opened = [&](const BitStringPair& p) { return openings.count(p) != 0; };

    // Hash of a chain position, recomputed upward from the material node below.
    auto hash_on_chain = [&](const BitStringPair& q, const BitStringPair& upto) {
        Hash32 h = store_->find(q)->hash;
        BitStringPair cur = q;
        while (!(cur == upto)) {
            BitStringPair par = node_parent(cur);
            std::array<Hash32, 4> slots{default_hash(), default_hash(), default_hash(),
                                        default_hash()};
            slots[child_slot(par, cur)] = h;
            h = hash_intermediate(slots, {});
            cur = par;
        }
        return h;
    };

    std::map<BitStringPair, Hash32> boundary;
    for (const auto& [pair, node] : open_material) {
        auto slots = real_slots(model_, pair);
        for (int s = 0; s < 4; ++s) {
            if (!slots[s]) continue;
            BitStringPair c = child_of(pair, s);
            if (opened(c)) continue;
            boundary[c] = node->next[s] ? chain_top_hash(pair, s) : default_hash();
        }
    }
    for (const auto& [pair, q] : open_chain) {
        auto slots = real_slots(model_, pair);
        BitStringPair toward = step_toward(pair, q);
        for (int s = 0; s < 4; ++s) {
            if (!slots[s]) continue;
            BitStringPair c = child_of(pair, s);
            if (opened(c)) continue;
            boundary[c] = (c == toward) ? hash_on_chain(q, c) : default_hash();
        }
    }

    proof.openings.assign(openings.begin(), openings.end());
    proof.boundary_hashes.assign(boundary.begin(), boundary.end());
    return proof;
}

VerifyOutcome verify_proof(const EarthModel& m, const CompletenessProof& proof,
                           const Hash32& root) {
    auto fail = [](std::string msg) {
        VerifyOutcome out;
        out.error = std::move(msg);
        return out;
    };

    if (proof.query_pairs.empty()) return fail("no query pairs");
    if (proof.openings.size() > 1u << 20 || proof.boundary_hashes.size() > 1u << 22) {
        return fail("oversized proof");
    }
    for (const BitStringPair& a : proof.query_pairs) {
        if (!pair_valid(m, a)) return fail("invalid query pair " + a.str());
        for (const BitStringPair& b : proof.query_pairs) {
            if (!(a == b) && pair_volume_contains(a, b)) return fail("nested query pairs");
        }
    }
    auto intersects_query = [&](const BitStringPair& p) {
        for (const BitStringPair& qp : proof.query_pairs) {
            if (pair_volumes_intersect(p, qp)) return true;
        }
        return false;
    };

    // The wire form keeps both arrays sorted by pair encoding; strict
    // ascending order also rules out duplicates and enables binary search.
    const auto& openings = proof.openings;
    const auto& boundary = proof.boundary_hashes;
    for (size_t i = 1; i < openings.size(); ++i) {
        if (!(openings[i - 1].first < openings[i].first)) return fail("openings not sorted");
    }
    for (size_t i = 1; i < boundary.size(); ++i) {
        if (!(boundary[i - 1].first < boundary[i].first)) return fail("boundary not sorted");
    }
    auto open_index = [&](const BitStringPair& p) -> ptrdiff_t {
        auto it = std::lower_bound(
            openings.begin(), openings.end(), p,
            [](const auto& entry, const BitStringPair& key) { return entry.first < key; });
        if (it == openings.end() || !(it->first == p)) return -1;
        return it - openings.begin();
    };
    auto boundary_index = [&](const BitStringPair& p) -> ptrdiff_t {
        auto it = std::lower_bound(
            boundary.begin(), boundary.end(), p,
            [](const auto& entry, const BitStringPair& key) { return entry.first < key; });
        if (it == boundary.end() || !(it->first == p)) return -1;
        return it - boundary.begin();
    };

    for (const auto& [pair, certs] : openings) {
        if (!pair_valid(m, pair)) return fail("invalid opened pair " + pair.str());
        for (size_t i = 1; i < certs.size(); ++i) {
            if (!(certs[i - 1] < certs[i])) return fail("unsorted opening " + pair.str());
        }
        if (!intersects_query(pair)) {
            return fail("opening unrelated to the query " + pair.str());
        }
        if (!pair.is_root() && open_index(node_parent(pair)) < 0) {
            return fail("opening with unopened parent " + pair.str());
        }
    }

    for (const auto& [pair, hash] : boundary) {
        if (!pair_valid(m, pair)) return fail("invalid boundary pair " + pair.str());
        if (open_index(pair) >= 0) {
            return fail("boundary hash for an opened node " + pair.str());
        }
        if (pair.is_root() || open_index(node_parent(pair)) < 0) {
            return fail("boundary not a child of an opened node " + pair.str());
        }
        // Nothing overlapping the query volume may hide behind an opaque
        // hash: such a boundary is only acceptable when the subtree is
        // sparse, whose hash is the public default.
        if (intersects_query(pair) && !(hash == default_hash())) {
            return fail("non-default boundary inside the query volume " + pair.str());
        }
    }

    // Frontier exactness: every real child of an opened node is accounted for
    // exactly once, as an opening or as a boundary hash.
    for (const auto& [pair, certs] : openings) {
        (void)certs;
        auto real = real_slots(m, pair);
        for (int s = 0; s < 4; ++s) {
            if (!real[s]) continue;
            BitStringPair c = child_of(pair, s);
            if ((open_index(c) >= 0) == (boundary_index(c) >= 0)) {
                return fail("child neither opened nor boundary " + c.str());
            }
        }
    }

    // Recompute bottom-up (children have strictly larger total depth).
    std::vector<size_t> order(openings.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return total_depth(openings[a].first) > total_depth(openings[b].first);
    });
    std::vector<Hash32> computed(openings.size());
    for (size_t idx : order) {
        const BitStringPair& pair = openings[idx].first;
        const std::vector<Hash32>& certs = openings[idx].second;
        Hash32 h;
        if (pair.altitude.size() == m.altitude_height()) {
            h = hash_leaf(certs);
        } else {
            std::array<Hash32, 4> slots{default_hash(), default_hash(), default_hash(),
                                        default_hash()};
            bool any = false;
            auto real = real_slots(m, pair);
            for (int s = 0; s < 4; ++s) {
                if (!real[s]) continue;
                BitStringPair c = child_of(pair, s);
                ptrdiff_t oi = open_index(c);
                const Hash32& ch = oi >= 0 ? computed[static_cast<size_t>(oi)]
                                           : boundary[static_cast<size_t>(boundary_index(c))]
                                                 .second;
                slots[s] = ch;
                if (!(ch == default_hash())) any = true;
            }
            h = (!any && certs.empty()) ? default_hash() : hash_intermediate(slots, certs);
        }
        computed[idx] = h;
    }

    Hash32 got = default_hash();
    if (!openings.empty()) {
        ptrdiff_t ri = open_index(BitStringPair{});
        if (ri < 0) return fail("root not opened");
        got = computed[static_cast<size_t>(ri)];
    }
    if (!(got == root)) return fail("root mismatch");

    VerifyOutcome out;
    out.ok = true;
    for (const auto& [pair, certs] : openings) {
        (void)pair;
        out.certs.insert(certs.begin(), certs.end());
    }
    return out;
}

}  // namespace gecko
