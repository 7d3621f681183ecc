#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpmf {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kDeg2Rad = std::numbers::pi / 180.0;

struct LatLon {
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees
};

inline void check_latlon(const LatLon& p, const char* what) {
    if (!(p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0))
        throw ValidationError(std::string(what) + ": lat/lon out of range");
}

// Great-circle distance in meters on the mean-radius sphere.
inline double haversine_m(const LatLon& p1, const LatLon& p2) {
    check_latlon(p1, "haversine");
    check_latlon(p2, "haversine");
    const double lat1 = p1.lat * kDeg2Rad;
    const double lat2 = p2.lat * kDeg2Rad;
    const double dlat = (p2.lat - p1.lat) * kDeg2Rad;
    const double dlon = (p2.lon - p1.lon) * kDeg2Rad;
    const double sl = std::sin(dlat / 2.0);
    const double so = std::sin(dlon / 2.0);
    const double a = sl * sl + std::cos(lat1) * std::cos(lat2) * so * so;
    return 2.0 * kEarthRadiusM * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

struct GpsSample {
    double t = 0.0;    // seconds, trip clock
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees
    double err = 0.0;  // meters, reported accuracy
};

// Geographic reference for one bridge span. Defines the 1-D coordinate along
// the A->B axis via an equirectangular tangent plane at A; span lengths of a
// few km keep the planar error far below GPS noise.
struct BridgeFrame {
    std::string name;
    LatLon point_a;
    LatLon point_b;
    double length_m = 0.0;
    LatLon bbox_min;
    LatLon bbox_max;

    double cos_lat0 = 1.0;
    double axis_east = 0.0;   // unit vector A->B, local plane
    double axis_north = 1.0;

    static BridgeFrame create(std::string name, LatLon a, LatLon b, double length_m,
                              LatLon bbox_min, LatLon bbox_max) {
        check_latlon(a, "BridgeFrame A");
        check_latlon(b, "BridgeFrame B");
        if (length_m <= 0.0) throw ValidationError("BridgeFrame: length must be positive");
        const double d = haversine_m(a, b);
        if (std::abs(d - length_m) > 0.01 * length_m)
            throw ValidationError("BridgeFrame: haversine(A,B) deviates more than 1% from length");

        BridgeFrame f;
        f.name = std::move(name);
        f.point_a = a;
        f.point_b = b;
        f.length_m = length_m;
        f.bbox_min = bbox_min;
        f.bbox_max = bbox_max;
        f.cos_lat0 = std::cos(a.lat * kDeg2Rad);

        double be, bn;
        f.to_local(b, be, bn);
        const double norm = std::hypot(be, bn);
        if (norm <= 0.0) throw ValidationError("BridgeFrame: A and B coincide");
        f.axis_east = be / norm;
        f.axis_north = bn / norm;

        if (!f.in_bbox(a) || !f.in_bbox(b))
            throw ValidationError("BridgeFrame: bbox does not contain both endpoints");
        return f;
    }

    void to_local(const LatLon& p, double& east, double& north) const {
        east = (p.lon - point_a.lon) * kDeg2Rad * kEarthRadiusM * cos_lat0;
        north = (p.lat - point_a.lat) * kDeg2Rad * kEarthRadiusM;
    }

    // Along-axis coordinate in meters; r(A) = 0, r(B) = |AB|.
    double along_axis(const LatLon& p) const {
        double e, n;
        to_local(p, e, n);
        return e * axis_east + n * axis_north;
    }

    bool in_bbox(const LatLon& p) const {
        return p.lat >= bbox_min.lat && p.lat <= bbox_max.lat &&
               p.lon >= bbox_min.lon && p.lon <= bbox_max.lon;
    }

    // Inverse mapping used by the trip simulator: along-axis meters plus a
    // cross-axis offset back to lat/lon.
    LatLon from_axis(double r, double cross) const {
        const double e = r * axis_east + cross * (-axis_north);
        const double n = r * axis_north + cross * axis_east;
        LatLon p;
        p.lat = point_a.lat + n / (kDeg2Rad * kEarthRadiusM) / 1.0;
        p.lon = point_a.lon + e / (kDeg2Rad * kEarthRadiusM * cos_lat0);
        return p;
    }
};

// GPS track projected to bridge coordinates; valid[i] marks samples inside
// the bbox and within the +-10% span tolerance.
struct BridgeTrack {
    std::vector<double> r;      // meters along axis
    std::vector<double> t;      // seconds
    std::vector<bool> valid;
    bool monotone = true;       // false flags stop-and-go / reversal trips

    double t_first() const { return t.front(); }
    double t_last() const { return t.back(); }
    std::size_t size() const { return t.size(); }
};

inline constexpr double kSpanTolerance = 0.10;

inline BridgeTrack to_bridge_coords(std::span<const GpsSample> gps, const BridgeFrame& frame) {
    if (gps.empty()) throw ValidationError("to_bridge_coords: empty GPS track");
    BridgeTrack track;
    track.r.reserve(gps.size());
    track.t.reserve(gps.size());
    track.valid.reserve(gps.size());
    const double lo = -kSpanTolerance * frame.length_m;
    const double hi = (1.0 + kSpanTolerance) * frame.length_m;
    for (const auto& s : gps) {
        check_latlon({s.lat, s.lon}, "to_bridge_coords");
        const double r = frame.along_axis({s.lat, s.lon});
        track.r.push_back(r);
        track.t.push_back(s.t);
        track.valid.push_back(frame.in_bbox({s.lat, s.lon}) && r >= lo && r <= hi);
    }
    return track;
}

// Invalid interior samples are replaced by linear interpolation in time;
// leading/trailing invalid samples are dropped. Idempotent.
inline BridgeTrack clean_track(const BridgeTrack& track, const BridgeFrame& frame) {
    (void)frame;
    const std::size_t n = track.size();
    std::size_t first = 0;
    while (first < n && !track.valid[first]) ++first;
    std::size_t last = n;
    while (last > first && !track.valid[last - 1]) --last;
    std::size_t n_valid = 0;
    for (std::size_t i = first; i < last; ++i)
        if (track.valid[i]) ++n_valid;
    if (n_valid < 2) throw ValidationError("clean_track: fewer than 2 valid GPS samples");

    BridgeTrack out;
    out.r.reserve(last - first);
    out.t.reserve(last - first);
    out.valid.assign(last - first, true);
    for (std::size_t i = first; i < last; ++i) {
        if (track.valid[i]) {
            out.r.push_back(track.r[i]);
        } else {
            std::size_t prev = i;
            while (!track.valid[prev]) --prev;
            std::size_t next = i;
            while (!track.valid[next]) ++next;
            const double w = (track.t[i] - track.t[prev]) / (track.t[next] - track.t[prev]);
            out.r.push_back(track.r[prev] + w * (track.r[next] - track.r[prev]));
        }
        out.t.push_back(track.t[i]);
    }

    out.monotone = true;
    for (std::size_t i = 1; i < out.r.size(); ++i)
        if (out.r[i] < out.r[i - 1] - 1e-9) out.monotone = false;
    return out;
}

// Linear interpolation of r at time t; t must lie within the track range.
inline double position_at(const BridgeTrack& track, double t) {
    if (track.size() < 2) throw ValidationError("position_at: track too short");
    if (t < track.t_first() || t > track.t_last())
        throw ValidationError("position_at: time outside track range");
    const auto it = std::upper_bound(track.t.begin(), track.t.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - track.t.begin());
    if (hi == track.t.size()) --hi;
    if (hi == 0) ++hi;
    const std::size_t lo = hi - 1;
    const double w = (t - track.t[lo]) / (track.t[hi] - track.t[lo]);
    return track.r[lo] + w * (track.r[hi] - track.r[lo]);
}

}  // namespace mpmf
