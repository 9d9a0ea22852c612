#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gecko/benchkit.hpp"

using namespace gecko;

TEST_CASE("dataset generation is deterministic and respects the density map") {
    DensityMap density = DensityMap::europe();
    DatasetParams params;
    params.seed = 42;
    params.count = 300;

    Dataset a = generate_dataset(params, density);
    Dataset b = generate_dataset(params, density);
    CHECK(dataset_to_bytes(a) == dataset_to_bytes(b));

    params.seed = 43;
    Dataset c = generate_dataset(params, density);
    CHECK(dataset_to_bytes(a) != dataset_to_bytes(c));

    // Payload cap honored.
    for (const GeoCert& cert : a.certs) {
        CHECK(canonical_encode(cert).size() <= params.payload_cap_bytes);
        CHECK(verify_cert_signature(cert, a.ca_key.public_key()));
    }

    // Serialization round-trip.
    Dataset back = dataset_from_bytes(dataset_to_bytes(a));
    CHECK(back.certs.size() == a.certs.size());
    CHECK(canonical_encode(back.certs[0]) == canonical_encode(a.certs[0]));
}

TEST_CASE("zero-density regions receive no certificates") {
    DensityMap density;
    density.lon_cells = 4;
    density.lat_cells = 4;
    density.lon_min = 0;
    density.lat_min = 40;
    density.lon_max = 4;
    density.lat_max = 44;
    density.weights.assign(16, 0.0);
    density.at(2, 1) = 1.0;  // only cell [2,3) x [41,42)

    DatasetParams params;
    params.seed = 7;
    params.count = 200;
    Dataset d = generate_dataset(params, density);
    for (const GeoCert& cert : d.certs) {
        const auto& ring = cert.volume.frustums.front().ring;
        double lon = (ring[0].lon + ring[2].lon) / 2;
        double lat = (ring[0].lat + ring[2].lat) / 2;
        CHECK(lon >= 2.0);
        CHECK(lon < 3.0);
        CHECK(lat >= 41.0);
        CHECK(lat < 42.0);
    }
}

TEST_CASE("density CSV round-trip and validation") {
    DensityMap density = DensityMap::europe();
    DensityMap back = DensityMap::from_csv(density.to_csv());
    CHECK(back.lon_cells == density.lon_cells);
    CHECK(back.weights == density.weights);

    CHECK_THROWS_AS(DensityMap::from_csv(""), std::invalid_argument);
    CHECK_THROWS_AS(DensityMap::from_csv("2,2,0,0,1,1\n5,0,1\n"), std::invalid_argument);
    DensityMap zeros;
    zeros.lon_cells = 2;
    zeros.lat_cells = 2;
    zeros.lon_min = 0;
    zeros.lat_min = 0;
    zeros.lon_max = 1;
    zeros.lat_max = 1;
    zeros.weights.assign(4, 0.0);
    CHECK_THROWS_AS(zeros.validate(), std::invalid_argument);
}

TEST_CASE("query points: one per certificate, shuffled deterministically") {
    DensityMap density = DensityMap::europe();
    DatasetParams params;
    params.seed = 9;
    params.count = 50;
    Dataset d = generate_dataset(params, density);
    auto q1 = query_points(d, params.seed);
    auto q2 = query_points(d, params.seed);
    CHECK(q1.size() == d.certs.size());
    REQUIRE(q1.size() == q2.size());
    for (size_t i = 0; i < q1.size(); ++i) CHECK(q1[i] == q2[i]);
}

TEST_CASE("bench rig: every response verifies; reports are well-formed") {
    BenchParams params;
    params.dataset.seed = 11;
    params.dataset.count = 200;
    DensityMap density = DensityMap::europe();
    BenchRig rig = build_rig(params, density);
    CHECK(rig.queries.size() == 200);

    auto qps = bench_throughput(rig, params, {1, 2}, 60);
    REQUIRE(qps.size() == 2);
    for (const auto& row : qps) {
        CHECK(row.failures == 0);
        CHECK(row.qps > 0);
    }

    auto latency = bench_latency(rig, params, 50);
    REQUIRE(latency.size() == 50);
    for (const auto& s : latency) {
        CHECK(s.total_us >= s.query_us);
        CHECK(s.request_bytes <= 128);
        CHECK(s.response_bytes > 0);
    }

    std::string meta = bench_meta(params, rig.dataset.certs.size());
    std::string qps_csv = throughput_csv(qps, meta);
    CHECK(qps_csv.find("workers,queries,wall_seconds,qps,failures") != std::string::npos);
    std::string lat_csv = latency_cdf_csv(latency, meta);
    CHECK(lat_csv.find("metric,value_us,fraction") != std::string::npos);
    std::string size_csv = size_cdf_csv(latency, meta);
    CHECK(size_csv.find("kind,bytes,fraction") != std::string::npos);

    auto hist = depth_histogram(*rig.server);
    CHECK(!hist.empty());
    size_t total = 0;
    for (const auto& [depth, count] : hist) total += count;
    CHECK(total > 0);
    CHECK(depth_histogram_csv(hist, meta).find("depth,data_nodes") != std::string::npos);

    // The client config wired to the rig answers end to end.
    ClientConfig cfg = rig.client_config();
    cfg.trust_preference = {[] {
        TrustPreferenceEntry e;
        e.ca_id = "bench-ca";
        e.loc_verification_allowed = {LocVerification::wireless};
        e.region = VolumeSpec{{PolygonFrustum{
            {{-20, 30, 0}, {40, 30, 0}, {40, 65, 0}, {-20, 65, 0}}, -11000, 21768}}};
        e.trust_level = 1;
        return e;
    }()};
    CheckOutcome out =
        check(cfg, rig.dataset.certs[0].subject_uri, rig.queries[0], 10.0, std::nullopt);
    CHECK(out.fetched.verified_servers == 1);
}

TEST_CASE("ingest bench: batching reduces per-cert cost") {
    BenchParams params;
    params.dataset.seed = 13;
    DensityMap density = DensityMap::europe();
    auto rows = bench_ingest(params, density, {1, 50}, 100);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].batch_size == 1);
    CHECK(rows[1].batch_size == 50);
    CHECK(rows[0].certs == 100);
    // Batching trend: batch 50 is strictly cheaper per certificate than batch 1.
    CHECK(rows[1].per_cert_ms < rows[0].per_cert_ms);
    CHECK(ingest_csv(rows, "# meta\n").find("batch_size,certs") != std::string::npos);
}

TEST_CASE("quantile and plotting helpers") {
    CHECK(quantile({1, 2, 3, 4}, 0.0) == 1);
    CHECK(quantile({1, 2, 3, 4}, 1.0) == 4);
    CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));

    std::string csv = "# meta\nx,y\n1,10\n2,20\n3,15\n";
    std::string svg = plot_csv_to_svg(csv, "x", {"y"}, false, "test");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK_THROWS_AS(plot_csv_to_svg(csv, "missing", {"y"}, false, "t"),
                    std::invalid_argument);
}
