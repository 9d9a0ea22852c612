#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gecko/geocert.hpp"
#include "gecko/trust.hpp"

using namespace gecko;

namespace {
const EarthModel kModel = EarthModel::wgs84();

PolygonFrustum square(double lon, double lat, double half_deg, double alt_min,
                      double alt_max) {
    PolygonFrustum s;
    s.ring = {{lon - half_deg, lat - half_deg, 0},
              {lon + half_deg, lat - half_deg, 0},
              {lon + half_deg, lat + half_deg, 0},
              {lon - half_deg, lat + half_deg, 0}};
    s.alt_min = alt_min;
    s.alt_max = alt_max;
    return s;
}

GeoCert base_cert() {
    GeoCert c;
    c.subject_uri = "gecko://shop.example";
    c.issuer_id = "ca.example";
    c.serial = 7;
    c.volume.frustums = {PolygonFrustum{
        {{8.5, 47.3, 0}, {8.6, 47.3, 0}, {8.6, 47.4, 0}, {8.5, 47.4, 0}}, 400.0, 430.0}};
    c.attributes = {{"intended_use", "payment terminal"}, {"floor", "2"}};
    c.loc_verification = LocVerification::in_person;
    c.not_before = 1700000000;
    c.not_after = 1800000000;
    SCT sct;
    sct.log_id = "log-1";
    sct.timestamp = 1700000100;
    sct.cert_hash.fill(0x11);
    sct.signature.fill(0x22);
    c.scts = {sct};
    c.public_key.assign(32, 0x33);
    c.signature.assign(64, 0x44);
    return c;
}

GeoCert issued_cert(const SigningKey& issuer, const SigningKey& subject,
                    const std::string& subject_uri, const std::string& issuer_id,
                    const PolygonFrustum& frustum, uint64_t serial,
                    LocVerification lv = LocVerification::in_person) {
    GeoCert c;
    c.subject_uri = subject_uri;
    c.issuer_id = issuer_id;
    c.serial = serial;
    c.volume.frustums = {frustum};
    c.loc_verification = lv;
    c.not_before = 1700000000;
    c.not_after = 1900000000;
    c.public_key.assign(subject.public_key().begin(), subject.public_key().end());
    sign_cert(c, issuer);
    return c;
}

SigningKey key_of(uint8_t fill) {
    std::array<uint8_t, 32> seed;
    seed.fill(fill);
    return SigningKey::from_seed(seed);
}
}  // namespace

TEST_CASE("canonical hash matches the committed golden vector") {
    GeoCert c = base_cert();
    Bytes enc = canonical_encode(c);
    CHECK(enc.size() == 426);
    // Recomputed from the byte layout with an independent SHA-256 tool.
    CHECK(cert_hash(c).hex() ==
          "5f53981f776494957e43ca81485cb17efd485a0ebe173fb81e5ebf661cd79695");
}

TEST_CASE("canonical encoding round-trips and is order-insensitive") {
    GeoCert c = base_cert();
    Bytes enc = canonical_encode(c);
    GeoCert back = canonical_decode(enc);
    CHECK(canonical_encode(back) == enc);

    GeoCert swapped = base_cert();
    std::swap(swapped.attributes[0], swapped.attributes[1]);
    CHECK(canonical_encode(swapped) == enc);

    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        Bytes mutated = enc;
        mutated[rng() % mutated.size()] ^= static_cast<uint8_t>(1 + rng() % 255);
        try {
            GeoCert m2 = canonical_decode(mutated);
            // Decoded despite the flip: re-encoding must differ (injectivity),
            // unless the mutation produced an unencodable certificate.
            Hash32 h2 = cert_hash(m2);
            CHECK(!(h2 == cert_hash(c)));
        } catch (const DecodeError&) {
        } catch (const std::invalid_argument&) {
        }
    }
}

TEST_CASE("encoding rejects invalid fields") {
    GeoCert c = base_cert();
    c.subject_uri = "https://shop.example";
    CHECK_THROWS_AS(canonical_encode(c), std::invalid_argument);

    c = base_cert();
    c.volume.frustums.clear();
    CHECK_THROWS_AS(canonical_encode(c), std::invalid_argument);

    c = base_cert();
    c.not_after = c.not_before;
    CHECK_THROWS_AS(canonical_encode(c), std::invalid_argument);
}

TEST_CASE("gecko URI parsing") {
    auto u = parse_gecko_uri("gecko://bank.com?branch=newyork");
    REQUIRE(u.has_value());
    CHECK(u->scheme == "gecko");
    CHECK(u->host == "bank.com");
    CHECK(u->rest == "?branch=newyork");
    CHECK(!parse_gecko_uri("bank.com").has_value());
    CHECK(!parse_gecko_uri("gecko://").has_value());
}

TEST_CASE("signature and chain verification") {
    SigningKey root_key = key_of(1);
    SigningKey mid_key = key_of(2);
    SigningKey leaf_key = key_of(3);
    int64_t now = 1750000000;

    GeoCert root = issued_cert(root_key, root_key, "gecko://root-ca.example",
                               "root-ca.example", square(8, 47, 1.0, -100, 5000), 1);
    GeoCert mid = issued_cert(root_key, mid_key, "gecko://city.example", "root-ca.example",
                              square(8, 47, 0.5, 0, 1000), 2);
    GeoCert leaf = issued_cert(mid_key, leaf_key, "gecko://shop.example", "city.example",
                               square(8, 47, 0.1, 100, 200), 3);

    SUBCASE("valid three-link chain") {
        auto report = verify_chain(kModel, {root, mid, leaf}, now);
        CHECK(report.ok);
    }
    SUBCASE("single self-signed root") {
        auto report = verify_chain(kModel, {root}, now);
        CHECK(report.ok);
    }
    SUBCASE("child volume escaping its parent") {
        GeoCert wide = issued_cert(mid_key, leaf_key, "gecko://shop.example",
                                   "city.example", square(8.55, 47, 0.1, 100, 200), 4);
        auto report = verify_chain(kModel, {root, mid, wide}, now);
        CHECK(!report.ok);
        CHECK(report.violation_link == 2);
        CHECK(report.violation == "volume not contained in parent");
    }
    SUBCASE("altitude escape is a containment violation") {
        GeoCert tall = issued_cert(mid_key, leaf_key, "gecko://shop.example",
                                   "city.example", square(8, 47, 0.1, 100, 2000), 5);
        auto report = verify_chain(kModel, {root, mid, tall}, now);
        CHECK(!report.ok);
        CHECK(report.violation_link == 2);
    }
    SUBCASE("expired leaf") {
        auto report = verify_chain(kModel, {root, mid, leaf}, 1900000001);
        CHECK(!report.ok);
        CHECK(report.violation == "expired");
        CHECK(report.violation_link == 0);  // the whole chain shares the window here
    }
    SUBCASE("wrong signer") {
        GeoCert forged = leaf;
        sign_cert(forged, root_key);  // parent is mid, not root
        auto report = verify_chain(kModel, {root, mid, forged}, now);
        CHECK(!report.ok);
        CHECK(report.violation == "signature invalid");
    }
    SUBCASE("empty chain") {
        CHECK_THROWS_AS(verify_chain(kModel, {}, now), std::invalid_argument);
    }
}

TEST_CASE("volume containment by sampling") {
    VolumeSpec parent{{square(8, 47, 0.5, 0, 1000)}};
    CHECK(contains_volume(kModel, parent, parent));

    VolumeSpec shrunk{{square(8, 47, 0.45, 10, 900)}};
    CHECK(contains_volume(kModel, parent, shrunk));

    VolumeSpec disjoint{{square(10, 47, 0.1, 0, 100)}};
    CHECK(!contains_volume(kModel, parent, disjoint));

    VolumeSpec too_tall{{square(8, 47, 0.1, 0, 2000)}};
    CHECK(!contains_volume(kModel, parent, too_tall));

    // Two parent frustums jointly covering a child that neither covers alone.
    VolumeSpec split_parent{{square(8, 47, 0.5, 0, 1000), square(8.9, 47, 0.5, 0, 1000)}};
    VolumeSpec child_left{{square(8.2, 47, 0.2, 0, 500)}};
    CHECK(contains_volume(kModel, split_parent, child_left));
}

TEST_CASE("revocation records round-trip and verify") {
    SigningKey ca = key_of(9);
    RevocationRecord rec;
    rec.cert_hash.fill(0xab);
    rec.revoked_at = 1760000000;
    rec.issuer_id = "ca.example";
    rec.sign(ca);
    CHECK(rec.verify(ca.public_key()));
    auto back = RevocationRecord::decode(rec.encode());
    CHECK(back == rec);
    back.revoked_at += 1;
    CHECK(!back.verify(ca.public_key()));
}

TEST_CASE("validate_object: acceptance, downgrade resistance, conflicts") {
    SigningKey high_ca = key_of(10);
    SigningKey low_ca = key_of(11);
    SigningKey subject = key_of(12);

    PolygonFrustum spot = square(8.5, 47.3, 0.01, 0, 100);
    VolumeSpec query{{square(8.5, 47.3, 0.001, 0, 50)}};

    GeoCert legit = issued_cert(high_ca, subject, "gecko://shop.example", "high-ca", spot,
                                1, LocVerification::in_person);
    GeoCert squatter = issued_cert(low_ca, subject, "gecko://evil.example", "low-ca", spot,
                                   2, LocVerification::postal);

    TrustPreferenceEntry high;
    high.ca_id = "high-ca";
    high.loc_verification_allowed = {LocVerification::in_person,
                                     LocVerification::delegated};
    high.region = VolumeSpec{{square(8.5, 47.3, 1.0, -11000, 21768)}};
    high.trust_level = 3;
    TrustPreferenceEntry low;
    low.ca_id = "low-ca";
    low.loc_verification_allowed = {LocVerification::postal,
                                    LocVerification::self_declared};
    low.region = high.region;
    low.trust_level = 1;
    std::vector<TrustPreferenceEntry> tp{high, low};

    SUBCASE("matching top-level certificate accepts") {
        auto ev = validate_object(kModel, "gecko://shop.example", {legit}, tp, query);
        CHECK(ev.decision == Decision::accept);
    }
    SUBCASE("lower-level squatter is outranked") {
        auto ev =
            validate_object(kModel, "gecko://shop.example", {legit, squatter}, tp, query);
        CHECK(ev.decision == Decision::accept);
        auto ev2 =
            validate_object(kModel, "gecko://evil.example", {legit, squatter}, tp, query);
        CHECK(ev2.decision == Decision::reject);
    }
    SUBCASE("equal-level disagreement surfaces a conflict") {
        GeoCert rival = issued_cert(high_ca, subject, "gecko://other.example", "high-ca",
                                    spot, 3, LocVerification::in_person);
        auto ev =
            validate_object(kModel, "gecko://shop.example", {legit, rival}, tp, query);
        CHECK(ev.decision == Decision::conflict);
    }
    SUBCASE("no matching certificate rejects") {
        auto ev = validate_object(kModel, "gecko://ghost.example", {legit}, tp, query);
        CHECK(ev.decision == Decision::reject);
    }
    SUBCASE("disallowed verification method never changes the outcome") {
        // A high-CA cert with a method the client distrusts is filtered before
        // level selection, so the accept stands.
        GeoCert weak = issued_cert(high_ca, subject, "gecko://evil.example", "high-ca",
                                   spot, 4, LocVerification::self_declared);
        auto with_weak =
            validate_object(kModel, "gecko://shop.example", {legit, weak}, tp, query);
        CHECK(with_weak.decision == Decision::accept);
    }
    SUBCASE("empty trust preference is a configuration error") {
        CHECK_THROWS_AS(validate_object(kModel, "gecko://shop.example", {legit}, {}, query),
                        std::invalid_argument);
    }
    SUBCASE("cert from a CA with no region over the query is filtered") {
        TrustPreferenceEntry elsewhere = high;
        elsewhere.region = VolumeSpec{{square(-70, -30, 1.0, -11000, 21768)}};
        auto ev =
            validate_object(kModel, "gecko://shop.example", {legit}, {elsewhere}, query);
        CHECK(ev.decision == Decision::reject);
    }
    SUBCASE("decision is invariant under permutation") {
        GeoCert rival = issued_cert(high_ca, subject, "gecko://other.example", "high-ca",
                                    spot, 3, LocVerification::in_person);
        std::vector<GeoCert> certs{legit, squatter, rival};
        std::vector<TrustPreferenceEntry> tp2 = tp;
        std::mt19937_64 rng(5);
        auto first = validate_object(kModel, "gecko://shop.example", certs, tp2, query);
        for (int i = 0; i < 50; ++i) {
            std::shuffle(certs.begin(), certs.end(), rng);
            std::shuffle(tp2.begin(), tp2.end(), rng);
            auto ev = validate_object(kModel, "gecko://shop.example", certs, tp2, query);
            CHECK(ev.decision == first.decision);
            CHECK(ev.considered == first.considered);
            CHECK(ev.maximal == first.maximal);
        }
    }
}

TEST_CASE("trust preference file parsing and lint") {
    std::string good = R"({
      "entries": [
        {
          "ca_id": "high-ca",
          "loc_verification_allowed": ["in_person", "wireless"],
          "trust_level": 3,
          "region": {"frustums": [{"ring": [[8,47],[9,47],[9,48],[8,48]],
                                   "alt_min": -100, "alt_max": 5000}]}
        }
      ]
    })";
    auto entries = parse_trust_preference(kModel, good);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].ca_id == "high-ca");
    CHECK(entries[0].trust_level == 3);
    CHECK(entries[0].loc_verification_allowed.count(LocVerification::wireless));

    // Round-trip through the serializer.
    auto again = parse_trust_preference(kModel, trust_preference_to_json(entries));
    CHECK(again.size() == 1);
    CHECK(again[0].ca_id == entries[0].ca_id);

    CHECK_THROWS_AS(parse_trust_preference(kModel, "{"), std::invalid_argument);
    CHECK_THROWS_AS(parse_trust_preference(kModel, R"({"entries": []})"),
                    std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_trust_preference(kModel, R"({"entries": [{"ca_id": "x",
            "loc_verification_allowed": ["telepathy"], "trust_level": 1,
            "region": {"frustums": [{"ring": [[0,0],[1,0],[1,1]]}]}}]})"),
        doctest::Contains("telepathy"), std::invalid_argument);
}
