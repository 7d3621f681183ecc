#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpmf/geo.hpp"

namespace mpmf {

enum class Controllability { controlled, partially_controlled, uncontrolled };
enum class OrientationSource { known_upright, rotation_vector, unknown };

inline const char* to_string(Controllability c) {
    switch (c) {
        case Controllability::controlled: return "controlled";
        case Controllability::partially_controlled: return "partially_controlled";
        default: return "uncontrolled";
    }
}

inline const char* to_string(OrientationSource s) {
    switch (s) {
        case OrientationSource::known_upright: return "known_upright";
        case OrientationSource::rotation_vector: return "rotation_vector";
        default: return "unknown";
    }
}

inline Controllability controllability_from(const std::string& s) {
    if (s == "controlled") return Controllability::controlled;
    if (s == "partially_controlled") return Controllability::partially_controlled;
    if (s == "uncontrolled") return Controllability::uncontrolled;
    throw ParseError("unknown controllability: " + s);
}

inline OrientationSource orientation_from(const std::string& s) {
    if (s == "known_upright") return OrientationSource::known_upright;
    if (s == "rotation_vector") return OrientationSource::rotation_vector;
    if (s == "unknown") return OrientationSource::unknown;
    throw ParseError("unknown orientation_source: " + s);
}

struct TripMeta {
    std::optional<std::string> phone_model;
    std::optional<std::string> vehicle_model;
    std::optional<double> target_speed_mps;
    Controllability controllability = Controllability::uncontrolled;
    OrientationSource orientation_source = OrientationSource::unknown;
};

// Device orientation sample (unit quaternion, world<-device), time on the
// trip clock. Present only when the collection app logged rotation vectors.
struct RotationSample {
    double t = 0.0;
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;
};

struct TripRecord {
    std::string trip_id;
    std::vector<double> t;                      // seconds, possibly jittered
    std::array<std::vector<double>, 3> accel;   // ax, ay, az in m/s^2
    std::vector<GpsSample> gps;
    std::optional<double> speed_mps;
    std::vector<RotationSample> rotation;       // optional
    TripMeta meta;

    void validate() const {
        if (trip_id.empty()) throw ValidationError("trip: empty trip_id");
        if (t.size() < 2) throw ValidationError("trip " + trip_id + ": fewer than 2 samples");
        for (const auto& ch : accel)
            if (ch.size() != t.size())
                throw ValidationError("trip " + trip_id + ": accel/t length mismatch");
        for (std::size_t i = 1; i < t.size(); ++i)
            if (!(t[i] > t[i - 1]))
                throw ValidationError("trip " + trip_id + ": time not strictly increasing at row " +
                                      std::to_string(i + 1));
        if (gps.empty()) throw ValidationError("trip " + trip_id + ": empty GPS track");
        for (const auto& g : gps) {
            if (g.err < 0.0) throw ValidationError("trip " + trip_id + ": negative GPS error");
            if (g.t < t.front() - 2.0 || g.t > t.back() + 2.0)
                throw ValidationError("trip " + trip_id + ": GPS time outside acceleration window");
        }
    }

    double duration_s() const { return t.back() - t.front(); }
};

// Uniformly sampled vertical acceleration with per-sample bridge coordinate;
// the product of the preprocess + geo stages.
struct VerticalTrace {
    std::string trip_id;
    double fs = 0.0;   // Hz
    double t0 = 0.0;   // trip-clock time of x[0]
    std::vector<double> x;
    std::vector<double> r;
};

namespace detail {

inline void format_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

inline double parse_double(const char* begin, const char* end, std::size_t line, const char* field) {
    double v = 0.0;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ParseError("line " + std::to_string(line) + ": bad " + field + " value");
    return v;
}

}  // namespace detail

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

inline TripRecord load_trip(const std::filesystem::path& csv_path) {
    std::ifstream csv(csv_path);
    if (!csv) throw ParseError("cannot open " + csv_path.string());

    TripRecord trip;
    std::string line;
    if (!std::getline(csv, line)) throw ParseError(csv_path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,ax,ay,az")
        throw ParseError(csv_path.string() + ": line 1: expected header t,ax,ay,az");

    std::size_t line_no = 1;
    while (std::getline(csv, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* s = line.data();
        const char* e = s + line.size();
        const char* fields[5];
        fields[0] = s;
        int nf = 1;
        for (const char* p = s; p < e && nf < 5; ++p)
            if (*p == ',') fields[nf++] = p + 1;
        if (nf != 4)
            throw ParseError(csv_path.string() + ": line " + std::to_string(line_no) +
                             ": expected 4 comma-separated values");
        const char* ends[4] = {fields[1] - 1, fields[2] - 1, fields[3] - 1, e};
        trip.t.push_back(detail::parse_double(fields[0], ends[0], line_no, "t"));
        trip.accel[0].push_back(detail::parse_double(fields[1], ends[1], line_no, "ax"));
        trip.accel[1].push_back(detail::parse_double(fields[2], ends[2], line_no, "ay"));
        trip.accel[2].push_back(detail::parse_double(fields[3], ends[3], line_no, "az"));
    }

    const auto side = sidecar_path(csv_path);
    std::ifstream sf(side);
    if (!sf) throw ParseError("missing sidecar " + side.string());
    nlohmann::json j;
    try {
        sf >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(side.string() + ": " + ex.what());
    }

    try {
        trip.trip_id = j.at("trip_id").get<std::string>();
        for (const auto& g : j.at("gps")) {
            GpsSample s;
            s.t = g.at("t").get<double>();
            s.lat = g.at("lat").get<double>();
            s.lon = g.at("lon").get<double>();
            s.err = g.at("err").get<double>();
            trip.gps.push_back(s);
        }
        if (j.contains("speed_mps") && !j["speed_mps"].is_null())
            trip.speed_mps = j["speed_mps"].get<double>();
        if (j.contains("rotation")) {
            for (const auto& q : j["rotation"]) {
                RotationSample r;
                r.t = q.at("t").get<double>();
                r.x = q.at("x").get<double>();
                r.y = q.at("y").get<double>();
                r.z = q.at("z").get<double>();
                if (q.contains("w") && !q["w"].is_null()) {
                    r.w = q.at("w").get<double>();
                } else {
                    // Rotation-vector logs store only the imaginary part.
                    const double s2 = r.x * r.x + r.y * r.y + r.z * r.z;
                    r.w = s2 < 1.0 ? std::sqrt(1.0 - s2) : 0.0;
                }
                trip.rotation.push_back(r);
            }
        }
        if (j.contains("meta")) {
            const auto& m = j["meta"];
            if (m.contains("phone_model") && !m["phone_model"].is_null())
                trip.meta.phone_model = m["phone_model"].get<std::string>();
            if (m.contains("vehicle_model") && !m["vehicle_model"].is_null())
                trip.meta.vehicle_model = m["vehicle_model"].get<std::string>();
            if (m.contains("target_speed_mps") && !m["target_speed_mps"].is_null())
                trip.meta.target_speed_mps = m["target_speed_mps"].get<double>();
            if (m.contains("controllability"))
                trip.meta.controllability = controllability_from(m["controllability"].get<std::string>());
            if (m.contains("orientation_source"))
                trip.meta.orientation_source = orientation_from(m["orientation_source"].get<std::string>());
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(side.string() + ": " + ex.what());
    }

    trip.validate();
    return trip;
}

inline void save_trip(const TripRecord& trip, const std::filesystem::path& csv_path) {
    trip.validate();
    std::string buf = "t,ax,ay,az\n";
    buf.reserve(trip.t.size() * 48);
    for (std::size_t i = 0; i < trip.t.size(); ++i) {
        detail::format_double(buf, trip.t[i]);
        buf.push_back(',');
        detail::format_double(buf, trip.accel[0][i]);
        buf.push_back(',');
        detail::format_double(buf, trip.accel[1][i]);
        buf.push_back(',');
        detail::format_double(buf, trip.accel[2][i]);
        buf.push_back('\n');
    }
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw ParseError("cannot write " + csv_path.string());
    csv << buf;

    nlohmann::json j;
    j["trip_id"] = trip.trip_id;
    nlohmann::json gps = nlohmann::json::array();
    for (const auto& g : trip.gps)
        gps.push_back({{"t", g.t}, {"lat", g.lat}, {"lon", g.lon}, {"err", g.err}});
    j["gps"] = gps;
    if (trip.speed_mps) j["speed_mps"] = *trip.speed_mps;
    if (!trip.rotation.empty()) {
        nlohmann::json rot = nlohmann::json::array();
        for (const auto& q : trip.rotation)
            rot.push_back({{"t", q.t}, {"w", q.w}, {"x", q.x}, {"y", q.y}, {"z", q.z}});
        j["rotation"] = rot;
    }
    nlohmann::json meta;
    if (trip.meta.phone_model) meta["phone_model"] = *trip.meta.phone_model;
    if (trip.meta.vehicle_model) meta["vehicle_model"] = *trip.meta.vehicle_model;
    if (trip.meta.target_speed_mps) meta["target_speed_mps"] = *trip.meta.target_speed_mps;
    meta["controllability"] = to_string(trip.meta.controllability);
    meta["orientation_source"] = to_string(trip.meta.orientation_source);
    j["meta"] = meta;

    std::ofstream side(sidecar_path(csv_path), std::ios::binary);
    if (!side) throw ParseError("cannot write " + sidecar_path(csv_path).string());
    side << j.dump(2) << '\n';
}

struct TripSummary {
    std::string trip_id;
    std::filesystem::path path;
    std::size_t n_samples = 0;
    double duration_s = 0.0;
    std::size_t gps_points = 0;
    Controllability controllability = Controllability::uncontrolled;
};

struct CatalogResult {
    std::vector<TripSummary> trips;
    std::vector<std::pair<std::filesystem::path, std::string>> diagnostics;
};

// One summary per parseable trip CSV in dir; unreadable files become
// diagnostics, never fatal. Sorted by path for listing-order independence.
inline CatalogResult catalog(const std::filesystem::path& dir) {
    CatalogResult result;
    if (!std::filesystem::is_directory(dir)) return result;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        try {
            const TripRecord trip = load_trip(path);
            TripSummary s;
            s.trip_id = trip.trip_id;
            s.path = path;
            s.n_samples = trip.t.size();
            s.duration_s = trip.duration_s();
            s.gps_points = trip.gps.size();
            s.controllability = trip.meta.controllability;
            result.trips.push_back(std::move(s));
        } catch (const std::exception& ex) {
            result.diagnostics.emplace_back(path, ex.what());
        }
    }
    return result;
}

}  // namespace mpmf
