#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gecko/log_server.hpp"
#include "gecko/merkle_log.hpp"

using namespace gecko;

namespace {
// Independent Merkle tree hash oracle, recursive split at the largest power
// of two below n.
Hash32 oracle_root(const std::vector<Bytes>& leaves, size_t lo, size_t hi) {
    size_t n = hi - lo;
    if (n == 0) return sha256(nullptr, 0);
    if (n == 1) return Sha256().update(uint8_t{0}).update(leaves[lo]).finish();
    size_t k = 1;
    while (k * 2 < n) k *= 2;
    Hash32 left = oracle_root(leaves, lo, lo + k);
    Hash32 right = oracle_root(leaves, lo + k, hi);
    return Sha256().update(uint8_t{1}).update(left).update(right).finish();
}

Bytes leaf_of(uint64_t i) {
    Bytes b;
    put_u64(b, i);
    return b;
}

SigningKey key_of(uint8_t fill) {
    std::array<uint8_t, 32> seed;
    seed.fill(fill);
    return SigningKey::from_seed(seed);
}

GeoCert sample_cert(const SigningKey& issuer, uint64_t serial) {
    GeoCert c;
    c.subject_uri = "gecko://site-" + std::to_string(serial) + ".example";
    c.issuer_id = "bench-ca";
    c.serial = serial;
    c.volume.frustums = {PolygonFrustum{
        {{8.5, 47.3, 0}, {8.5001, 47.3, 0}, {8.5001, 47.30001, 0}, {8.5, 47.30001, 0}},
        400,
        403}};
    c.loc_verification = LocVerification::wireless;
    c.not_before = 1700000000;
    c.not_after = 1900000000;
    c.public_key.assign(32, 0x5a);
    sign_cert(c, issuer);
    return c;
}
}  // namespace

TEST_CASE("known answers for the tree hashing") {
    AppendOnlyLog log;
    CHECK(log.root().hex() ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

    CHECK(log.append({'a'}) == 0);
    CHECK(log.root() == log_leaf_hash({'a'}));

    CHECK(log.append({'b'}) == 1);
    // Recomputed independently: H(0x01 || H(0x00||'a') || H(0x00||'b')).
    CHECK(log.root().hex() ==
          "b137985ff484fb600db93107c77b0365c80d78f5b429ded0fd97361d077999eb");
}

TEST_CASE("roots match the oracle for every size up to 64") {
    AppendOnlyLog log;
    std::vector<Bytes> leaves;
    for (uint64_t i = 0; i < 64; ++i) {
        leaves.push_back(leaf_of(i));
        log.append(leaf_of(i));
        CHECK(log.root() == oracle_root(leaves, 0, leaves.size()));
        // Historical roots stay reconstructible.
        for (size_t n = 0; n <= leaves.size(); n += 7) {
            CHECK(log.root_at(n) == oracle_root(leaves, 0, n));
        }
    }
}

TEST_CASE("inclusion proofs: exhaustive over trees up to 64 leaves") {
    AppendOnlyLog log;
    std::vector<Bytes> leaves;
    for (uint64_t i = 0; i < 64; ++i) {
        leaves.push_back(leaf_of(i));
        log.append(leaf_of(i));
    }
    CHECK(verify_inclusion(log_leaf_hash(leaf_of(0)), 0, 1, {}, log.root_at(1)));
    for (size_t size = 1; size <= 64; ++size) {
        Hash32 root = oracle_root(leaves, 0, size);
        for (size_t index = 0; index < size; ++index) {
            auto path = log.inclusion_proof(index, size);
            REQUIRE(verify_inclusion(log_leaf_hash(leaf_of(index)), index, size, path, root));
            // Wrong leaf or tampered path must fail.
            REQUIRE(!verify_inclusion(log_leaf_hash(leaf_of(index + 100)), index, size,
                                      path, root));
            if (!path.empty()) {
                auto bad = path;
                bad[0][5] ^= 0x40;
                REQUIRE(!verify_inclusion(log_leaf_hash(leaf_of(index)), index, size, bad,
                                          root));
            }
        }
    }
    CHECK_THROWS_AS(log.inclusion_proof(64, 64), std::out_of_range);
    CHECK_THROWS_AS(log.inclusion_proof(0, 65), std::out_of_range);
}

TEST_CASE("appending never invalidates earlier proofs") {
    AppendOnlyLog log;
    for (uint64_t i = 0; i < 10; ++i) log.append(leaf_of(i));
    Hash32 root10 = log.root_at(10);
    auto path = log.inclusion_proof(3, 10);
    for (uint64_t i = 10; i < 20; ++i) log.append(leaf_of(i));
    CHECK(log.root_at(10) == root10);
    CHECK(log.inclusion_proof(3, 10) == path);
    CHECK(verify_inclusion(log_leaf_hash(leaf_of(3)), 3, 10, path, root10));
}

TEST_CASE("consistency proofs: exhaustive over trees up to 64 leaves") {
    AppendOnlyLog log;
    std::vector<Bytes> leaves;
    for (uint64_t i = 0; i < 64; ++i) {
        leaves.push_back(leaf_of(i));
        log.append(leaf_of(i));
    }
    for (size_t a = 0; a <= 64; ++a) {
        for (size_t b = a; b <= 64; ++b) {
            auto proof = log.consistency_proof(a, b);
            REQUIRE(verify_consistency(oracle_root(leaves, 0, a), a,
                                       oracle_root(leaves, 0, b), b, proof));
            if (a == b) CHECK(proof.empty());
            if (!proof.empty()) {
                auto bad = proof;
                bad[0][7] ^= 0x01;
                REQUIRE(!verify_consistency(oracle_root(leaves, 0, a), a,
                                            oracle_root(leaves, 0, b), b, bad));
            }
        }
    }
    CHECK_THROWS_AS(log.consistency_proof(5, 4), std::out_of_range);
    CHECK_THROWS_AS(log.consistency_proof(0, 65), std::out_of_range);
}

TEST_CASE("forked histories admit no consistency proof") {
    for (size_t fork_at = 0; fork_at < 8; ++fork_at) {
        AppendOnlyLog honest;
        AppendOnlyLog fork;
        for (uint64_t i = 0; i < 16; ++i) {
            honest.append(leaf_of(i));
            fork.append(i == fork_at ? leaf_of(1000 + i) : leaf_of(i));
        }
        for (size_t a = fork_at + 1; a <= 16; ++a) {
            for (size_t b = a; b <= 16; ++b) {
                Hash32 fork_a = fork.root_at(a);
                Hash32 honest_b = honest.root_at(b);
                // Every honestly derivable proof candidate fails to link the
                // forked prefix root into the honest tree.
                REQUIRE(!verify_consistency(fork_a, a, honest_b, b,
                                            honest.consistency_proof(a, b)));
                REQUIRE(!verify_consistency(fork_a, a, honest_b, b,
                                            fork.consistency_proof(a, b)));
            }
        }
    }
}

TEST_CASE("signed heads round-trip and reject tampering") {
    SigningKey log_key = key_of(1);
    SigningKey map_key = key_of(2);

    STH sth;
    sth.timestamp = 1234;
    sth.tree_size = 42;
    sth.root.fill(0x11);
    sth.sign(log_key);
    CHECK(sth.verify(log_key.public_key()));
    CHECK(!sth.verify(map_key.public_key()));

    SignedMapHead smh;
    smh.smt_root.fill(0x22);
    smh.timestamp = 777;
    smh.sources.push_back({"log-1", sth});
    smh.sign(map_key);
    CHECK(smh.verify(map_key.public_key()));
    SignedMapHead mutated = smh;
    mutated.smt_root[0] ^= 1;
    CHECK(!mutated.verify(map_key.public_key()));

    auto back = smh_from_leaf_bytes(smh.leaf_bytes());
    CHECK(back == smh);

    SignedConsistencyHead head;
    head.root.fill(0x33);
    head.size = 9;
    head.sign(map_key);
    CHECK(head.verify(map_key.public_key()));
    head.size = 10;
    CHECK(!head.verify(map_key.public_key()));

    SCT sct;
    sct.log_id = "log-1";
    sct.timestamp = 99;
    sct.cert_hash.fill(0x44);
    sct.sign(log_key);
    CHECK(sct.verify(log_key.public_key()));
}

TEST_CASE("log stub: submission, read-back, STH coverage") {
    SigningKey log_key = key_of(3);
    SigningKey ca_key = key_of(4);
    uint64_t fake_now = 1750000000;
    LogServerCore log("log-1", log_key, 3600, [&] { return fake_now; });

    GeoCert cert = sample_cert(ca_key, 1);
    Bytes canonical = canonical_encode(cert);
    SCT sct = log.submit_cert(canonical);
    CHECK(sct.log_id == "log-1");
    CHECK(sct.cert_hash == precert_hash(cert));
    CHECK(sct.verify(log.public_key()));

    auto entries = log.entries(0, 1);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].kind == LogEntry::Kind::cert);
    CHECK(entries[0].payload == canonical);  // byte-identical read-back

    for (uint64_t s = 2; s <= 5; ++s) {
        log.submit_cert(canonical_encode(sample_cert(ca_key, s)));
    }
    STH sth = log.sth();
    CHECK(sth.tree_size == 5);
    CHECK(sth.verify(log.public_key()));
    CHECK(sth.root == log.root_at(5));

    // Proof endpoints agree with the verifiers.
    auto path = log.inclusion(0, 5);
    CHECK(verify_inclusion(log_leaf_hash(entries[0].leaf_bytes()), 0, 5, path, sth.root));
    auto cons = log.consistency(2, 5);
    CHECK(verify_consistency(log.root_at(2), 2, sth.root, 5, cons));

    SUBCASE("malformed submissions are rejected") {
        CHECK_THROWS_AS(log.submit_cert(Bytes{1, 2, 3}), std::invalid_argument);
        Bytes truncated(canonical.begin(), canonical.end() - 4);
        CHECK_THROWS_AS(log.submit_cert(truncated), std::invalid_argument);
    }
    SUBCASE("issuer registry enforces signatures when configured") {
        log.set_ca_keys({{"bench-ca", ca_key.public_key()}});
        CHECK_NOTHROW(log.submit_cert(canonical_encode(sample_cert(ca_key, 7))));
        GeoCert forged = sample_cert(ca_key, 8);
        sign_cert(forged, key_of(5));  // not the registered CA key
        CHECK_THROWS_AS(log.submit_cert(canonical_encode(forged)), std::invalid_argument);
        GeoCert unknown = sample_cert(ca_key, 9);
        unknown.issuer_id = "stranger-ca";
        sign_cert(unknown, ca_key);
        CHECK_THROWS_AS(log.submit_cert(canonical_encode(unknown)), std::invalid_argument);
    }
    SUBCASE("revocations append as tagged entries") {
        RevocationRecord rec;
        rec.cert_hash = cert_hash(cert);
        rec.revoked_at = fake_now;
        rec.issuer_id = "bench-ca";
        rec.sign(ca_key);
        size_t index = log.submit_revocation(rec);
        auto all = log.entries(index, index + 1);
        REQUIRE(all.size() == 1);
        CHECK(all[0].kind == LogEntry::Kind::revocation);
        CHECK(RevocationRecord::decode(all[0].payload) == rec);
    }
    SUBCASE("embedded SCT for this log must match the precertificate") {
        GeoCert with_sct = sample_cert(ca_key, 10);
        with_sct.scts = {log.request_sct(precert_hash(with_sct))};
        sign_cert(with_sct, ca_key);
        CHECK_NOTHROW(log.submit_cert(canonical_encode(with_sct)));

        GeoCert bad_sct = sample_cert(ca_key, 11);
        SCT wrong = log.request_sct(precert_hash(with_sct));  // different precert
        bad_sct.scts = {wrong};
        sign_cert(bad_sct, ca_key);
        CHECK_THROWS_AS(log.submit_cert(canonical_encode(bad_sct)), std::invalid_argument);
    }
}

TEST_CASE("log entry leaf encoding") {
    LogEntry entry;
    entry.kind = LogEntry::Kind::revocation;
    entry.payload = {9, 8, 7};
    auto back = LogEntry::from_leaf(entry.leaf_bytes());
    CHECK(back.kind == entry.kind);
    CHECK(back.payload == entry.payload);
    CHECK_THROWS_AS(LogEntry::from_leaf(Bytes{}), DecodeError);
    CHECK_THROWS_AS(LogEntry::from_leaf(Bytes{7, 1}), DecodeError);
}
