#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "mpmf/geo.hpp"
#include "support.hpp"

using namespace mpmf;

TEST_CASE("haversine identity and symmetry") {
    const LatLon p{37.8, -122.47};
    CHECK(haversine_m(p, p) == 0.0);
    const LatLon q{37.81, -122.48};
    CHECK(haversine_m(p, q) == Catch::Approx(haversine_m(q, p)));
    CHECK(haversine_m(p, q) > 0.0);
}

TEST_CASE("haversine rejects out-of-range coordinates") {
    CHECK_THROWS_AS(haversine_m({91.0, 0.0}, {0.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(haversine_m({0.0, 0.0}, {0.0, 181.0}), ValidationError);
}

TEST_CASE("haversine of the Golden Gate tower reference points is ~1280 m") {
    // Tower coordinates read off a public map.
    const LatLon south{37.810000, -122.477400};
    const LatLon north{37.821475, -122.478550};
    const double d = haversine_m(south, north);
    CHECK(d == Catch::Approx(1280.0).margin(0.01 * 1280.0));
}

TEST_CASE("haversine matches the spherical law of cosines") {
    const LatLon a{0.0, 0.0};
    const LatLon b{0.0, 1.0};
    const double expected = testsupport::law_of_cosines_m(a, b);
    CHECK(haversine_m(a, b) == Catch::Approx(expected).epsilon(1e-6));

    std::mt19937 gen(7);
    std::uniform_real_distribution<double> lat(-60.0, 60.0), lon(-170.0, 170.0);
    for (int i = 0; i < 50; ++i) {
        const LatLon p{lat(gen), lon(gen)};
        const LatLon q{p.lat + lat(gen) / 100.0, p.lon + lon(gen) / 100.0};
        if (haversine_m(p, q) < 1.0) continue;  // acos oracle is ill-conditioned near zero
        CHECK(haversine_m(p, q) == Catch::Approx(testsupport::law_of_cosines_m(p, q)).epsilon(1e-6));
    }
}

TEST_CASE("haversine triangle inequality on random triples") {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-180.0, 180.0);
    for (int i = 0; i < 100; ++i) {
        const LatLon a{lat(gen), lon(gen)}, b{lat(gen), lon(gen)}, c{lat(gen), lon(gen)};
        const double ab = haversine_m(a, b), bc = haversine_m(b, c), ac = haversine_m(a, c);
        CHECK(ac <= ab + bc + 1e-9 * (ab + bc));
    }
}

TEST_CASE("bridge frame validation") {
    auto frame = testsupport::test_frame(1000.0);
    CHECK(frame.length_m == 1000.0);
    // Length more than 1% off the endpoint distance is rejected.
    CHECK_THROWS_AS(BridgeFrame::create("bad", frame.point_a, frame.point_b, 1100.0,
                                        frame.bbox_min, frame.bbox_max),
                    ValidationError);
    // bbox must contain both endpoints.
    CHECK_THROWS_AS(BridgeFrame::create("bad", frame.point_a, frame.point_b, 1000.0,
                                        frame.point_a, frame.point_a),
                    ValidationError);
}

TEST_CASE("to_bridge_coords maps endpoints to 0 and L") {
    const auto frame = testsupport::test_frame(1000.0);
    std::vector<GpsSample> gps = {{0.0, frame.point_a.lat, frame.point_a.lon, 1.0},
                                  {10.0, frame.point_b.lat, frame.point_b.lon, 1.0}};
    const BridgeTrack track = to_bridge_coords(gps, frame);
    CHECK(track.r[0] == Catch::Approx(0.0).margin(1e-6));
    CHECK(track.r[1] == Catch::Approx(frame.length_m).margin(0.05));
}

TEST_CASE("to_bridge_coords on a constant-speed crossing") {
    const auto frame = testsupport::test_frame(1000.0);
    std::vector<GpsSample> gps;
    for (int k = 0; k <= 100; ++k) {
        const LatLon p = frame.from_axis(10.0 * k, 0.0);
        gps.push_back({static_cast<double>(k), p.lat, p.lon, 1.0});
    }
    const BridgeTrack track = to_bridge_coords(gps, frame);
    for (int k = 1; k <= 100; ++k)
        CHECK(track.r[k] - track.r[k - 1] == Catch::Approx(10.0).margin(1e-6));
}

TEST_CASE("reversing A and B maps r to L - r") {
    const auto frame = testsupport::test_frame(1000.0);
    const auto reversed = BridgeFrame::create("rev", frame.point_b, frame.point_a, frame.length_m,
                                              frame.bbox_min, frame.bbox_max);
    std::vector<GpsSample> gps;
    for (int k = 0; k <= 10; ++k) {
        const LatLon p = frame.from_axis(100.0 * k, 2.0);
        gps.push_back({static_cast<double>(k), p.lat, p.lon, 1.0});
    }
    const BridgeTrack fwd = to_bridge_coords(gps, frame);
    const BridgeTrack bwd = to_bridge_coords(gps, reversed);
    for (std::size_t i = 0; i < fwd.size(); ++i)
        CHECK(bwd.r[i] == Catch::Approx(frame.length_m - fwd.r[i]).margin(1e-6 * frame.length_m));
}

TEST_CASE("clean_track is identity on all-valid tracks and idempotent") {
    const auto frame = testsupport::test_frame(1000.0);
    std::vector<GpsSample> gps;
    for (int k = 0; k <= 50; ++k) {
        const LatLon p = frame.from_axis(20.0 * k, 0.0);
        gps.push_back({static_cast<double>(k), p.lat, p.lon, 1.0});
    }
    const BridgeTrack track = to_bridge_coords(gps, frame);
    const BridgeTrack cleaned = clean_track(track, frame);
    REQUIRE(cleaned.size() == track.size());
    for (std::size_t i = 0; i < track.size(); ++i) CHECK(cleaned.r[i] == track.r[i]);
    const BridgeTrack twice = clean_track(cleaned, frame);
    for (std::size_t i = 0; i < cleaned.size(); ++i) CHECK(twice.r[i] == cleaned.r[i]);
}

TEST_CASE("clean_track interpolates interior outliers") {
    BridgeTrack track;
    track.r = {100.0, 5000.0, 120.0};
    track.t = {10.0, 11.0, 12.0};
    track.valid = {true, false, true};
    const auto frame = testsupport::test_frame(1000.0);
    const BridgeTrack cleaned = clean_track(track, frame);
    REQUIRE(cleaned.size() == 3);
    CHECK(cleaned.r[1] == Catch::Approx(110.0));
}

TEST_CASE("clean_track drops leading/trailing invalid samples and needs 2 valid") {
    BridgeTrack track;
    track.r = {-900.0, 10.0, 20.0, -900.0};
    track.t = {0.0, 1.0, 2.0, 3.0};
    track.valid = {false, true, true, false};
    const auto frame = testsupport::test_frame(1000.0);
    const BridgeTrack cleaned = clean_track(track, frame);
    CHECK(cleaned.size() == 2);
    CHECK(cleaned.t_first() == 1.0);

    BridgeTrack too_few;
    too_few.r = {10.0, 20.0};
    too_few.t = {0.0, 1.0};
    too_few.valid = {true, false};
    CHECK_THROWS_AS(clean_track(too_few, frame), ValidationError);
}

TEST_CASE("cleaning reduces the error of laterally perturbed tracks") {
    // Frame with a tight 20 m cross-axis bbox so 50 m lateral outliers are
    // invalidated and interpolated over.
    const auto frame = testsupport::test_frame(1000.0, 20.0);
    std::mt19937 gen(3);
    std::uniform_int_distribution<int> pick(1, 99);
    std::vector<GpsSample> gps;
    std::vector<double> truth;
    for (int k = 0; k <= 100; ++k) {
        truth.push_back(10.0 * k);
        const LatLon p = frame.from_axis(10.0 * k, 0.0);
        gps.push_back({static_cast<double>(k), p.lat, p.lon, 1.0});
    }
    std::set<int> perturbed;
    while (perturbed.size() < 15) perturbed.insert(pick(gen));
    for (int k : perturbed) {
        // 50 m diagonal offset: the cross component trips the bbox, the
        // along component corrupts r until cleaning interpolates it away.
        const LatLon p = frame.from_axis(10.0 * k + 35.36, 35.36);
        gps[static_cast<std::size_t>(k)].lat = p.lat;
        gps[static_cast<std::size_t>(k)].lon = p.lon;
    }

    const BridgeTrack raw = to_bridge_coords(gps, frame);
    const BridgeTrack cleaned = clean_track(raw, frame);
    double max_before = 0.0, max_after = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        max_before = std::max(max_before, std::abs(raw.r[i] - truth[i]));
        max_after = std::max(max_after, std::abs(cleaned.r[i] - truth[i]));
    }
    CHECK(max_after < max_before);
}

TEST_CASE("position_at interpolates linearly") {
    BridgeTrack track;
    track.r = {0.0, 10.0, 30.0};
    track.t = {0.0, 1.0, 2.0};
    track.valid = {true, true, true};
    CHECK(position_at(track, 1.0) == 10.0);
    CHECK(position_at(track, 0.5) == Catch::Approx(5.0));
    CHECK_THROWS_AS(position_at(track, -0.1), ValidationError);
    CHECK_THROWS_AS(position_at(track, 2.1), ValidationError);
}

TEST_CASE("position_at against a dense tabulated track") {
    BridgeTrack dense;
    for (int k = 0; k <= 1000; ++k) {
        dense.t.push_back(0.01 * k);
        dense.r.push_back(3.7 * 0.01 * k);  // constant speed
        dense.valid.push_back(true);
    }
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> pick(0.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const double t = pick(gen);
        CHECK(position_at(dense, t) == Catch::Approx(3.7 * t).margin(1e-9));
    }
}
