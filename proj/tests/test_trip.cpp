#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "mpmf/trip.hpp"
#include "support.hpp"

using namespace mpmf;

namespace {

TripRecord make_trip(std::size_t n = 10) {
    TripRecord trip;
    trip.trip_id = "unit_0001";
    for (std::size_t i = 0; i < n; ++i) {
        trip.t.push_back(0.01 * static_cast<double>(i) + (i % 3 == 1 ? 0.0005 : 0.0));
        trip.accel[0].push_back(0.001 * static_cast<double>(i));
        trip.accel[1].push_back(-0.002 * static_cast<double>(i));
        trip.accel[2].push_back(9.81 + 0.01 * std::sin(0.5 * static_cast<double>(i)));
    }
    trip.gps.push_back({0.0, 37.81, -122.4774, 4.3});
    trip.gps.push_back({trip.t.back(), 37.8101, -122.4774, 4.3});
    trip.speed_mps = 8.9436721390004;
    trip.meta.phone_model = "iPhone 5";
    trip.meta.vehicle_model = "Nissan Sentra";
    trip.meta.target_speed_mps = 8.9;
    trip.meta.controllability = Controllability::controlled;
    trip.meta.orientation_source = OrientationSource::known_upright;
    trip.rotation.push_back({0.0, 1.0, 0.0, 0.0, 0.0});
    return trip;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("well-formed CSV with 10 rows loads as 10 samples") {
    testsupport::TempDir dir("trip_load");
    const auto csv = dir.path / "a.csv";
    std::string text = "t,ax,ay,az\n";
    for (int i = 0; i < 10; ++i)
        text += std::to_string(0.01 * i) + ",0.1,0.2,9.8\n";
    write_file(csv, text);
    write_file(dir.path / "a.json",
               R"({"trip_id":"a","gps":[{"t":0.0,"lat":37.81,"lon":-122.47,"err":4.0},)"
               R"({"t":0.09,"lat":37.8101,"lon":-122.47,"err":4.0}]})");
    const TripRecord trip = load_trip(csv);
    CHECK(trip.t.size() == 10);
    CHECK(trip.trip_id == "a");
    CHECK(trip.gps.size() == 2);
    CHECK_FALSE(trip.speed_mps.has_value());
}

TEST_CASE("decreasing time is a validation error naming the row") {
    testsupport::TempDir dir("trip_bad_time");
    const auto csv = dir.path / "b.csv";
    write_file(csv,
               "t,ax,ay,az\n0,0,0,9.8\n0.01,0,0,9.8\n0.02,0,0,9.8\n0.03,0,0,9.8\n0.01,0,0,9.8\n");
    write_file(dir.path / "b.json",
               R"({"trip_id":"b","gps":[{"t":0,"lat":1,"lon":1,"err":1},{"t":0.03,"lat":1.0001,"lon":1,"err":1}]})");
    try {
        load_trip(csv);
        FAIL("expected ValidationError");
    } catch (const ValidationError& ex) {
        CHECK(std::string(ex.what()).find("row 5") != std::string::npos);
    }
}

TEST_CASE("malformed rows and headers raise parse errors with line numbers") {
    testsupport::TempDir dir("trip_malformed");
    const auto csv = dir.path / "c.csv";
    write_file(csv, "t,ax,ay,az\n0,0,0,9.8\n0.01,zzz,0,9.8\n");
    write_file(dir.path / "c.json", R"({"trip_id":"c","gps":[{"t":0,"lat":1,"lon":1,"err":1}]})");
    try {
        load_trip(csv);
        FAIL("expected ParseError");
    } catch (const ParseError& ex) {
        CHECK(std::string(ex.what()).find("line 3") != std::string::npos);
    }

    const auto hdr = dir.path / "d.csv";
    write_file(hdr, "time,ax,ay,az\n0,0,0,9.8\n");
    CHECK_THROWS_AS(load_trip(hdr), ParseError);
}

TEST_CASE("empty GPS track is a validation error") {
    testsupport::TempDir dir("trip_nogps");
    const auto csv = dir.path / "e.csv";
    write_file(csv, "t,ax,ay,az\n0,0,0,9.8\n0.01,0,0,9.8\n");
    write_file(dir.path / "e.json", R"({"trip_id":"e","gps":[]})");
    CHECK_THROWS_AS(load_trip(csv), ValidationError);
}

TEST_CASE("negative GPS error and out-of-window GPS times are rejected") {
    TripRecord trip = make_trip();
    trip.gps[0].err = -1.0;
    CHECK_THROWS_AS(trip.validate(), ValidationError);
    trip = make_trip();
    trip.gps[0].t = -10.0;
    CHECK_THROWS_AS(trip.validate(), ValidationError);
}

TEST_CASE("save/load round-trip is exact field-for-field") {
    testsupport::TempDir dir("trip_roundtrip");
    const TripRecord trip = make_trip(50);
    const auto csv = dir.path / (trip.trip_id + ".csv");
    save_trip(trip, csv);
    const TripRecord back = load_trip(csv);

    CHECK(back.trip_id == trip.trip_id);
    REQUIRE(back.t.size() == trip.t.size());
    for (std::size_t i = 0; i < trip.t.size(); ++i) {
        CHECK(back.t[i] == trip.t[i]);
        for (int c = 0; c < 3; ++c) CHECK(back.accel[c][i] == trip.accel[c][i]);
    }
    REQUIRE(back.gps.size() == trip.gps.size());
    for (std::size_t i = 0; i < trip.gps.size(); ++i) {
        CHECK(back.gps[i].t == trip.gps[i].t);
        CHECK(back.gps[i].lat == trip.gps[i].lat);
        CHECK(back.gps[i].lon == trip.gps[i].lon);
        CHECK(back.gps[i].err == trip.gps[i].err);
    }
    CHECK(back.speed_mps == trip.speed_mps);
    CHECK(back.meta.phone_model == trip.meta.phone_model);
    CHECK(back.meta.vehicle_model == trip.meta.vehicle_model);
    CHECK(back.meta.target_speed_mps == trip.meta.target_speed_mps);
    CHECK(back.meta.controllability == trip.meta.controllability);
    CHECK(back.meta.orientation_source == trip.meta.orientation_source);
    REQUIRE(back.rotation.size() == trip.rotation.size());
    CHECK(back.rotation[0].w == trip.rotation[0].w);
}

TEST_CASE("catalog of an empty directory is empty") {
    testsupport::TempDir dir("catalog_empty");
    const CatalogResult cat = catalog(dir.path);
    CHECK(cat.trips.empty());
    CHECK(cat.diagnostics.empty());
}

TEST_CASE("catalog reports corrupt files as diagnostics, not failures") {
    testsupport::TempDir dir("catalog_mixed");
    for (int i = 0; i < 3; ++i) {
        TripRecord trip = make_trip();
        trip.trip_id = "t" + std::to_string(i);
        save_trip(trip, dir.path / (trip.trip_id + ".csv"));
    }
    write_file(dir.path / "corrupt.csv", "not a trip\n");
    write_file(dir.path / "corrupt.json", "{}");

    const CatalogResult cat = catalog(dir.path);
    CHECK(cat.trips.size() == 3);
    REQUIRE(cat.diagnostics.size() == 1);
    CHECK(cat.diagnostics[0].first.filename() == "corrupt.csv");
    // Sorted by path: count and order are independent of listing order.
    CHECK(cat.trips[0].trip_id == "t0");
    CHECK(cat.trips[2].trip_id == "t2");
    CHECK(cat.trips[0].n_samples == 10);
}
