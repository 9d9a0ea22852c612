#pragma once

// Brute-force recomputation of the SMT hash function over a fully
// materialized node map. Deliberately ignorant of the library's storage
// layout: it only uses the tree relations and the two hash equations.

#include <map>
#include <set>
#include <vector>

#include "gecko/smt.hpp"

namespace gecko::oracle {

using DataMap = std::map<BitStringPair, std::vector<Hash32>>;

inline std::set<BitStringPair> nonsparse_closure(const DataMap& data) {
    std::set<BitStringPair> out;
    for (const auto& [pair, certs] : data) {
        if (certs.empty()) continue;
        BitStringPair cur = pair;
        while (true) {
            if (!out.insert(cur).second) break;
            if (cur.is_root()) break;
            cur = node_parent(cur);
        }
    }
    return out;
}

inline Hash32 node_hash(const EarthModel& m, const DataMap& data,
                        const std::set<BitStringPair>& nonsparse, const BitStringPair& p) {
    if (!nonsparse.count(p)) return default_hash();
    auto it = data.find(p);
    std::vector<Hash32> certs = it == data.end() ? std::vector<Hash32>{} : it->second;
    auto children = node_children(m, p);
    if (children.empty()) return hash_leaf(certs);
    std::array<Hash32, 4> slots{default_hash(), default_hash(), default_hash(),
                                default_hash()};
    for (const BitStringPair& c : children) {
        slots[child_slot(p, c)] = node_hash(m, data, nonsparse, c);
    }
    return hash_intermediate(slots, certs);
}

inline Hash32 root(const EarthModel& m, const DataMap& data) {
    auto nonsparse = nonsparse_closure(data);
    return node_hash(m, data, nonsparse, BitStringPair{});
}

}  // namespace gecko::oracle
