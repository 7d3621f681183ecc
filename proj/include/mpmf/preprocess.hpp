#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "mpmf/geo.hpp"
#include "mpmf/trip.hpp"

namespace mpmf {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// Unit quaternion (renormalized on construction; rejected when the input norm
// is off by more than 1e-3). rotate() is the active rotation device->world.
struct Quaternion {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    Quaternion() = default;
    Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        if (std::abs(n - 1.0) > 1e-3)
            throw ValidationError("Quaternion: norm deviates from 1 beyond tolerance");
        w /= n; x /= n; y /= n; z /= n;
    }

    static Quaternion axis_angle(Vec3 axis, double angle_rad) {
        const double n = axis.norm();
        const double s = std::sin(angle_rad / 2.0);
        return Quaternion(std::cos(angle_rad / 2.0), axis.x / n * s, axis.y / n * s, axis.z / n * s);
    }

    Vec3 rotate(const Vec3& v) const {
        // v' = v + 2*q_vec x (q_vec x v + w*v)
        const double tx = 2.0 * (y * v.z - z * v.y);
        const double ty = 2.0 * (z * v.x - x * v.z);
        const double tz = 2.0 * (x * v.y - y * v.x);
        return {v.x + w * tx + (y * tz - z * ty),
                v.y + w * ty + (z * tx - x * tz),
                v.z + w * tz + (x * ty - y * tx)};
    }
};

struct FilterSpec {
    double f_cut_hz = 0.5;
    double transition_hz = 0.1;
    double resample_fs_hz = 100.0;

    void validate() const {
        if (!(f_cut_hz > 0.0 && f_cut_hz < resample_fs_hz / 2.0))
            throw ValidationError("FilterSpec: need 0 < f_cut < resample_fs/2");
    }

    double output_fs() const { return 2.0 * f_cut_hz; }
};

// Linear-interpolation resampling onto the uniform grid starting at t[0] with
// step 1/fs_target; output length floor((t_last - t_first) * fs_target) + 1.
inline std::vector<double> resample_uniform(std::span<const double> t, std::span<const double> x,
                                            double fs_target) {
    if (t.size() != x.size()) throw ValidationError("resample_uniform: t/x length mismatch");
    if (t.size() < 2) throw ValidationError("resample_uniform: need at least 2 samples");
    if (fs_target <= 0.0) throw ValidationError("resample_uniform: fs_target must be positive");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i] == t[i - 1]) throw ValidationError("resample_uniform: duplicate timestamp");
        if (t[i] < t[i - 1]) throw ValidationError("resample_uniform: time not increasing");
    }
    const double t0 = t.front();
    const std::size_t n_out = static_cast<std::size_t>(std::floor((t.back() - t0) * fs_target)) + 1;
    std::vector<double> out(n_out);
    std::size_t seg = 0;
    for (std::size_t j = 0; j < n_out; ++j) {
        const double tj = t0 + static_cast<double>(j) / fs_target;
        while (seg + 2 < t.size() && t[seg + 1] < tj) ++seg;
        const double w = (tj - t[seg]) / (t[seg + 1] - t[seg]);
        out[j] = x[seg] + w * (x[seg + 1] - x[seg]);
    }
    return out;
}

namespace detail {

inline Vec3 mean_vector(const std::array<std::vector<double>, 3>& accel) {
    Vec3 m;
    const double n = static_cast<double>(accel[0].size());
    for (double v : accel[0]) m.x += v;
    for (double v : accel[1]) m.y += v;
    for (double v : accel[2]) m.z += v;
    m.x /= n; m.y /= n; m.z /= n;
    return m;
}

inline void remove_mean(std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    for (double& v : x) v -= m;
}

}  // namespace detail

// Gravity-mean reorientation: the long-window mean acceleration vector is
// taken as the gravity direction, every sample is rotated so it aligns with
// +z, and the mean-removed z channel is returned.
inline std::vector<double> reorient_gravity(const std::array<std::vector<double>, 3>& accel) {
    const std::size_t n = accel[0].size();
    if (n == 0 || accel[1].size() != n || accel[2].size() != n)
        throw ValidationError("reorient_gravity: channel length mismatch");
    const Vec3 g = detail::mean_vector(accel);
    const double gn = g.norm();
    if (gn < 1.0)
        throw ValidationError("reorient_gravity: mean acceleration too small to define gravity");

    // Rotation taking g/|g| to (0,0,1), about the axis g x z.
    const Vec3 u{g.x / gn, g.y / gn, g.z / gn};
    const double c = u.z;
    Vec3 axis{u.y, -u.x, 0.0};
    const double s = axis.norm();
    std::vector<double> out(n);
    if (s < 1e-12) {
        const double sign = c >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < n; ++i) out[i] = sign * accel[2][i];
    } else {
        const double angle = std::atan2(s, c);
        const Quaternion q = Quaternion::axis_angle(axis, angle);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = q.rotate({accel[0][i], accel[1][i], accel[2][i]}).z;
    }
    detail::remove_mean(out);
    return out;
}

// Quaternion reorientation: each acceleration vector is rotated into the
// world frame by the nearest-in-time quaternion; world-z, mean removed.
inline std::vector<double> reorient_quaternion(const std::array<std::vector<double>, 3>& accel,
                                               std::span<const double> t_accel,
                                               std::span<const RotationSample> rotation) {
    const std::size_t n = accel[0].size();
    if (n == 0 || accel[1].size() != n || accel[2].size() != n || t_accel.size() != n)
        throw ValidationError("reorient_quaternion: channel length mismatch");
    if (rotation.empty()) throw ValidationError("reorient_quaternion: empty quaternion series");

    std::vector<double> out(n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k + 1 < rotation.size() &&
               std::abs(rotation[k + 1].t - t_accel[i]) <= std::abs(rotation[k].t - t_accel[i]))
            ++k;
        const auto& rs = rotation[k];
        const Quaternion q(rs.w, rs.x, rs.y, rs.z);
        out[i] = q.rotate({accel[0][i], accel[1][i], accel[2][i]}).z;
    }
    detail::remove_mean(out);
    return out;
}

namespace detail {

struct Biquad {
    double b0, b1, b2, a1, a2;

    double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

// Butterworth low-pass of even order as a cascade of biquads via bilinear
// transform; each section normalized to unit DC gain.
inline std::vector<Biquad> butterworth_lowpass(int order, double f_cut, double fs) {
    if (order < 2 || order % 2 != 0)
        throw ValidationError("butterworth_lowpass: order must be even and >= 2");
    const double warped = 2.0 * fs * std::tan(std::numbers::pi * f_cut / fs);
    std::vector<Biquad> sections;
    for (int k = 0; k < order / 2; ++k) {
        const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order) + std::numbers::pi / 2.0;
        const std::complex<double> pole_s = warped * std::complex<double>(std::cos(theta), std::sin(theta));
        // Bilinear transform z = (2fs + s)/(2fs - s).
        const std::complex<double> pz = (2.0 * fs + pole_s) / (2.0 * fs - pole_s);
        const double a1 = -2.0 * pz.real();
        const double a2 = std::norm(pz);
        // Zeros at z = -1 (order 2); gain set for unit DC response.
        const double gain = (1.0 + a1 + a2) / 4.0;
        sections.push_back({gain, 2.0 * gain, gain, a1, a2});
    }
    return sections;
}

inline void filter_forward(const std::vector<Biquad>& sections, std::vector<double>& x) {
    double dc_in = 1.0;
    for (const auto& s : sections) {
        // DF2T with initial state matching the DC steady state of x[0].
        const double h1 = s.dc_gain();
        double z1 = (h1 - s.b0) * dc_in * x[0];
        double z2 = (s.b2 - s.a2 * h1) * dc_in * x[0];
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
        dc_in *= h1;
    }
}

// Zero-phase filtering: odd-reflection padding, forward pass, reversed pass.
inline std::vector<double> filtfilt(const std::vector<Biquad>& sections,
                                    std::span<const double> x, std::size_t pad) {
    const std::size_t n = x.size();
    pad = std::min(pad, n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    filter_forward(sections, ext);
    std::reverse(ext.begin(), ext.end());
    filter_forward(sections, ext);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                               ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace detail

inline constexpr int kAntiAliasOrder = 4;

// Zero-phase low-pass at f_cut followed by decimation to 2*f_cut (so the
// output Nyquist frequency equals f_cut). Output sample j sits at t0 + j/(2*f_cut).
inline std::vector<double> lowpass_decimate(std::span<const double> x, double fs,
                                            const FilterSpec& spec) {
    spec.validate();
    if (fs < 4.0 * spec.f_cut_hz) throw ValidationError("lowpass_decimate: fs must be >= 4*f_cut");
    const double flen = fs / spec.f_cut_hz;  // samples per cutoff period
    if (static_cast<double>(x.size()) < 4.0 * flen)
        throw ValidationError("lowpass_decimate: series shorter than 4 filter lengths");

    const auto sections = detail::butterworth_lowpass(kAntiAliasOrder, spec.f_cut_hz, fs);
    const std::size_t pad = static_cast<std::size_t>(std::ceil(6.0 * fs / spec.f_cut_hz));
    std::vector<double> filtered = detail::filtfilt(sections, x, pad);

    const double fs_out = spec.output_fs();
    const double step = fs / fs_out;
    const std::size_t n_out = static_cast<std::size_t>(std::floor(static_cast<double>(x.size() - 1) / step)) + 1;
    std::vector<double> out(n_out);
    const double int_step = std::round(step);
    if (std::abs(step - int_step) < 1e-9) {
        const std::size_t istep = static_cast<std::size_t>(int_step);
        for (std::size_t j = 0; j < n_out; ++j) out[j] = filtered[j * istep];
    } else {
        for (std::size_t j = 0; j < n_out; ++j) {
            const double pos = static_cast<double>(j) * step;
            const std::size_t lo = std::min(static_cast<std::size_t>(pos), filtered.size() - 2);
            const double w = pos - static_cast<double>(lo);
            out[j] = filtered[lo] + w * (filtered[lo + 1] - filtered[lo]);
        }
    }
    return out;
}

// Full per-trip preprocessing: resample each channel to the uniform rate,
// reorient per the trip's orientation source, low-pass + decimate, then trim
// to the cleaned track's time coverage and attach bridge coordinates.
inline VerticalTrace preprocess_trip(const TripRecord& trip, const BridgeTrack& track,
                                     const FilterSpec& spec) {
    spec.validate();
    const double fs = spec.resample_fs_hz;
    std::array<std::vector<double>, 3> uniform;
    for (int c = 0; c < 3; ++c) uniform[c] = resample_uniform(trip.t, trip.accel[c], fs);
    const double t0 = trip.t.front();

    std::vector<double> vertical;
    switch (trip.meta.orientation_source) {
        case OrientationSource::known_upright: {
            vertical = uniform[2];
            detail::remove_mean(vertical);
            break;
        }
        case OrientationSource::rotation_vector: {
            std::vector<double> tu(uniform[0].size());
            for (std::size_t i = 0; i < tu.size(); ++i) tu[i] = t0 + static_cast<double>(i) / fs;
            vertical = reorient_quaternion(uniform, tu, trip.rotation);
            break;
        }
        default:
            vertical = reorient_gravity(uniform);
    }

    std::vector<double> low = lowpass_decimate(vertical, fs, spec);
    const double fs_out = spec.output_fs();

    VerticalTrace trace;
    trace.trip_id = trip.trip_id;
    trace.fs = fs_out;
    for (std::size_t j = 0; j < low.size(); ++j) {
        const double tj = t0 + static_cast<double>(j) / fs_out;
        if (tj < track.t_first() || tj > track.t_last()) continue;
        if (trace.x.empty()) trace.t0 = tj;
        trace.x.push_back(low[j]);
        trace.r.push_back(position_at(track, tj));
    }
    if (trace.x.size() < 2)
        throw ValidationError("preprocess_trip: trip " + trip.trip_id +
                              " has no samples inside the GPS-covered window");
    return trace;
}

}  // namespace mpmf
