#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "mpmf/geo.hpp"
#include "mpmf/preprocess.hpp"
#include "mpmf/rng.hpp"
#include "mpmf/trip.hpp"

namespace mpmf {

inline constexpr double kGravity = 9.80665;

// One bridge mode: natural frequency, damping ratio, sinusoidal shape
// sin(2*pi*r/wavelength + phase), and a static response scale.
struct BridgeMode {
    double freq_hz = 0.0;
    double zeta = 0.01;
    double wavelength_m = 0.0;
    double phase_rad = 0.0;
    char shape_tag = 'S';  // 'S' symmetric / 'A' antisymmetric about midspan
    double amplitude = 1.0;
};

struct ModalModel {
    double length_m = 0.0;
    double grid_step_m = 10.0;
    std::vector<BridgeMode> modes;

    void validate() const {
        if (length_m <= 0.0) throw ValidationError("ModalModel: length must be positive");
        if (grid_step_m <= 0.0 || grid_step_m > length_m)
            throw ValidationError("ModalModel: bad grid step");
        if (modes.empty()) throw ValidationError("ModalModel: no modes");
        for (std::size_t d = 0; d < modes.size(); ++d) {
            if (!(modes[d].freq_hz > 0.0)) throw ValidationError("ModalModel: frequency must be positive");
            if (!(modes[d].zeta > 0.0 && modes[d].zeta < 0.2))
                throw ValidationError("ModalModel: damping ratio must be in (0, 0.2)");
            if (!(modes[d].wavelength_m > 0.0)) throw ValidationError("ModalModel: bad wavelength");
            if (d > 0 && !(modes[d].freq_hz > modes[d - 1].freq_hz))
                throw ValidationError("ModalModel: frequencies must be strictly increasing");
        }
    }

    double shape(std::size_t d, double r) const {
        const auto& m = modes[d];
        return std::sin(2.0 * std::numbers::pi * r / m.wavelength_m + m.phase_rad);
    }

    std::size_t n_nodes() const {
        return static_cast<std::size_t>(std::floor(length_m / grid_step_m + 1e-9)) + 1;
    }

    double max_freq() const { return modes.back().freq_hz; }

    // Builds the mode list from (frequency, shape tag, amplitude) triples.
    // Mode d (1-based) gets wavelength 2L/d; the phase is 0 when the parity of
    // sin(pi*d*r/L) already matches the tag (d odd -> symmetric) and a quarter
    // turn otherwise, so every shape honors its symmetric/antisymmetric tag.
    static ModalModel from_frequencies(double length_m, double grid_step_m,
                                       const std::vector<std::tuple<double, char, double>>& freq_tag_amp,
                                       double zeta = 0.01) {
        ModalModel model;
        model.length_m = length_m;
        model.grid_step_m = grid_step_m;
        for (std::size_t i = 0; i < freq_tag_amp.size(); ++i) {
            const auto& [f, tag, amp] = freq_tag_amp[i];
            BridgeMode mode;
            mode.freq_hz = f;
            mode.zeta = zeta;
            mode.shape_tag = tag;
            mode.amplitude = amp;
            const std::size_t d = i + 1;
            mode.wavelength_m = 2.0 * length_m / static_cast<double>(d);
            const bool odd = (d % 2) == 1;
            const bool symmetric = (tag == 'S' || tag == 's');
            if (odd == symmetric)
                mode.phase_rad = 0.0;
            else
                mode.phase_rad = odd ? -std::numbers::pi / 2.0 : std::numbers::pi / 2.0;
            model.modes.push_back(mode);
        }
        model.validate();
        return model;
    }
};

// Realized bridge motion: modal displacement histories q_d(t). The
// displacement field at any point is sum_d amplitude_d * Phi_d(r) * q_d(t);
// shapes are evaluated analytically, so the field is smooth in r.
struct BridgeField {
    ModalModel model;
    double fs = 0.0;
    std::size_t steps = 0;
    std::vector<std::vector<double>> q;  // per mode, length steps

    double duration_s() const { return static_cast<double>(steps - 1) / fs; }

    double displacement(double r, std::size_t k) const {
        double u = 0.0;
        for (std::size_t d = 0; d < model.modes.size(); ++d)
            u += model.modes[d].amplitude * model.shape(d, r) * q[d][k];
        return u;
    }

    std::vector<double> at_position(double r) const {
        std::vector<double> u(steps);
        for (std::size_t k = 0; k < steps; ++k) u[k] = displacement(r, k);
        return u;
    }
};

namespace detail {

// Exact discrete step of q'' + 2*zeta*w*q' + w^2*q = p with p held constant
// over the step (zero-order hold).
struct SdofStepper {
    double w, zeta, wd, e, cos_wd, sin_wd;

    SdofStepper(double freq_hz, double zeta_, double h) {
        w = 2.0 * std::numbers::pi * freq_hz;
        zeta = zeta_;
        wd = w * std::sqrt(1.0 - zeta * zeta);
        e = std::exp(-zeta * w * h);
        cos_wd = std::cos(wd * h);
        sin_wd = std::sin(wd * h);
    }

    void step(double& q, double& v, double p) const {
        const double q_static = p / (w * w);
        const double u = q - q_static;
        const double b = (v + zeta * w * u) / wd;
        const double q_new = q_static + e * (u * cos_wd + b * sin_wd);
        const double v_new = e * (-zeta * w * (u * cos_wd + b * sin_wd) +
                                  wd * (-u * sin_wd + b * cos_wd));
        q = q_new;
        v = v_new;
    }
};

}  // namespace detail

// Modal response to white spatio-temporal loading: independent Gaussian
// forces per (grid node, time step), projected onto each mode and integrated
// exactly through the damped modal oscillator. warmup_s of settling is run
// before recording so that the returned window is (statistically) stationary.
inline BridgeField bridge_response(const ModalModel& model, double load_intensity,
                                   double duration_s, double fs, Rng& rng,
                                   double warmup_s = 0.0) {
    model.validate();
    if (!(fs > 4.0 * model.max_freq()))
        throw ValidationError("bridge_response: fs must exceed 4x the highest modal frequency");
    if (!(duration_s > 0.0) || !(load_intensity >= 0.0) || warmup_s < 0.0)
        throw ValidationError("bridge_response: bad duration/intensity/warmup");

    const std::size_t n_modes = model.modes.size();
    const std::size_t n_nodes = model.n_nodes();
    const double h = 1.0 / fs;

    std::vector<detail::SdofStepper> steppers;
    steppers.reserve(n_modes);
    for (const auto& m : model.modes) steppers.emplace_back(m.freq_hz, m.zeta, h);

    // Mode shapes on the load grid and projection norms.
    std::vector<std::vector<double>> phi(n_modes, std::vector<double>(n_nodes));
    std::vector<double> inv_norm(n_modes);
    for (std::size_t d = 0; d < n_modes; ++d) {
        double norm = 0.0;
        for (std::size_t j = 0; j < n_nodes; ++j) {
            phi[d][j] = model.shape(d, static_cast<double>(j) * model.grid_step_m);
            norm += phi[d][j] * phi[d][j];
        }
        inv_norm[d] = norm > 0.0 ? 1.0 / norm : 0.0;
    }

    BridgeField field;
    field.model = model;
    field.fs = fs;
    field.steps = static_cast<std::size_t>(std::llround(duration_s * fs)) + 1;
    field.q.assign(n_modes, std::vector<double>(field.steps, 0.0));

    const std::size_t warmup_steps = static_cast<std::size_t>(std::llround(warmup_s * fs));
    std::vector<double> q(n_modes, 0.0), v(n_modes, 0.0);
    std::vector<double> force(n_nodes);
    for (std::size_t k = 0; k + 1 < warmup_steps + field.steps; ++k) {
        if (k >= warmup_steps)
            for (std::size_t d = 0; d < n_modes; ++d) field.q[d][k - warmup_steps] = q[d];
        for (std::size_t j = 0; j < n_nodes; ++j) force[j] = load_intensity * rng.normal();
        for (std::size_t d = 0; d < n_modes; ++d) {
            double p = 0.0;
            for (std::size_t j = 0; j < n_nodes; ++j) p += phi[d][j] * force[j];
            steppers[d].step(q[d], v[d], p * inv_norm[d]);
        }
    }
    for (std::size_t d = 0; d < n_modes; ++d) field.q[d][field.steps - 1] = q[d];
    return field;
}

// Homogeneous (load-free) response from initial modal displacements; used to
// exercise pure-tone behavior.
inline BridgeField free_vibration(const ModalModel& model, const std::vector<double>& q0,
                                  double duration_s, double fs) {
    model.validate();
    if (q0.size() != model.modes.size()) throw ValidationError("free_vibration: q0 size mismatch");
    if (!(fs > 4.0 * model.max_freq()))
        throw ValidationError("free_vibration: fs must exceed 4x the highest modal frequency");
    const double h = 1.0 / fs;
    BridgeField field;
    field.model = model;
    field.fs = fs;
    field.steps = static_cast<std::size_t>(std::llround(duration_s * fs)) + 1;
    field.q.assign(model.modes.size(), std::vector<double>(field.steps, 0.0));
    for (std::size_t d = 0; d < model.modes.size(); ++d) {
        detail::SdofStepper s(model.modes[d].freq_hz, model.modes[d].zeta, h);
        double q = q0[d], v = 0.0;
        for (std::size_t k = 0; k < field.steps; ++k) {
            field.q[d][k] = q;
            s.step(q, v, 0.0);
        }
    }
    return field;
}

// Two-degree-of-freedom quarter car with linear properties.
struct QuarterCar {
    double sprung_kg = 350.0;
    double unsprung_kg = 45.0;
    double suspension_n_per_m = 25'000.0;
    double suspension_damping = 1'500.0;  // N*s/m
    double tire_n_per_m = 200'000.0;

    void validate() const {
        if (!(sprung_kg > 0 && unsprung_kg > 0 && suspension_n_per_m > 0 &&
              suspension_damping > 0 && tire_n_per_m > 0))
            throw ValidationError("QuarterCar: all parameters must be positive");
    }

    // Undamped natural frequencies (Hz) of the 2-DOF system; the lower root
    // is the body bounce mode, the upper the wheel hop mode.
    std::pair<double, double> natural_frequencies() const {
        const double ms = sprung_kg, mu = unsprung_kg;
        const double ks = suspension_n_per_m, kt = tire_n_per_m;
        const double b = ms * (ks + kt) + mu * ks;
        const double disc = std::sqrt(b * b - 4.0 * ms * mu * ks * kt);
        const double w2_lo = (b - disc) / (2.0 * ms * mu);
        const double w2_hi = (b + disc) / (2.0 * ms * mu);
        const double two_pi = 2.0 * std::numbers::pi;
        return {std::sqrt(w2_lo) / two_pi, std::sqrt(w2_hi) / two_pi};
    }

    double bounce_hz() const { return natural_frequencies().first; }
};

struct VehicleDist {
    QuarterCar mean;
    double log_sigma = 0.2;
};

// Independent per-parameter log-normal draws with the configured means.
inline QuarterCar sample_vehicle(const VehicleDist& dist, Rng& rng) {
    dist.mean.validate();
    const double s = dist.log_sigma;
    if (s < 0.0) throw ValidationError("sample_vehicle: negative log sigma");
    auto draw = [&](double mean) {
        if (s == 0.0) return mean;
        return rng.lognormal(std::log(mean) - 0.5 * s * s, s);
    };
    QuarterCar car;
    car.sprung_kg = draw(dist.mean.sprung_kg);
    car.unsprung_kg = draw(dist.mean.unsprung_kg);
    car.suspension_n_per_m = draw(dist.mean.suspension_n_per_m);
    car.suspension_damping = draw(dist.mean.suspension_damping);
    car.tire_n_per_m = draw(dist.mean.tire_n_per_m);
    return car;
}

// Additive white Gaussian noise at the requested SNR (variance ratio in dB);
// +inf passes the signal through untouched.
inline std::vector<double> add_noise(std::span<const double> x, double snr_db, Rng& rng) {
    std::vector<double> out(x.begin(), x.end());
    if (std::isinf(snr_db) && snr_db > 0.0) return out;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    if (!(var > 0.0)) throw ValidationError("add_noise: zero-variance signal");
    const double sigma = std::sqrt(var / std::pow(10.0, snr_db / 10.0));
    for (double& v : out) v += sigma * rng.normal();
    return out;
}

struct VehicleRide {
    double fs = 0.0;
    std::vector<double> accel;      // sprung-mass vertical acceleration
    std::vector<double> r;          // contact position per sample, bridge meters
    std::vector<double> base_disp;  // bridge displacement under the contact point
};

// Decoupled ride: the moving contact point samples the bridge displacement
// (zero off-span), and the quarter car responds to it as base excitation.
// Integration uses average-acceleration Newmark on the relative coordinates
// z = x - u_b, forced by the base acceleration, which keeps the stiff-car
// limit exact: the measured output is then z_s'' + u_b''.
inline VehicleRide vehicle_ride(const BridgeField& field, const QuarterCar& car, double v,
                                double fs, double r_start = 0.0, double t_offset = 0.0,
                                double extra_s = 0.0,
                                double max_duration_s = std::numeric_limits<double>::infinity()) {
    car.validate();
    if (!(v > 0.0)) throw ValidationError("vehicle_ride: speed must be positive");
    if (std::abs(fs - field.fs) > 1e-9)
        throw ValidationError("vehicle_ride: ride rate must match the field rate");
    const double length = field.model.length_m;
    const double duration = std::min((length - r_start) / v + extra_s, max_duration_s);
    if (!(duration > 0.0)) throw ValidationError("vehicle_ride: empty trip");
    if (t_offset < 0.0 || t_offset + duration > field.duration_s() + 1e-9)
        throw ValidationError("vehicle_ride: trip exceeds the simulated field duration");

    const double h = 1.0 / fs;
    const std::size_t n = static_cast<std::size_t>(std::floor(duration * fs)) + 1;
    const std::size_t k0 = static_cast<std::size_t>(std::llround(t_offset * fs));

    VehicleRide ride;
    ride.fs = fs;
    ride.r.resize(n);
    ride.base_disp.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double rk = r_start + v * static_cast<double>(k) * h;
        ride.r[k] = rk;
        ride.base_disp[k] =
            (rk >= 0.0 && rk <= length) ? field.displacement(rk, std::min(k0 + k, field.steps - 1)) : 0.0;
    }

    // Base acceleration by central differences (one-sided copies at the ends).
    std::vector<double> base_acc(n);
    for (std::size_t k = 1; k + 1 < n; ++k)
        base_acc[k] = (ride.base_disp[k + 1] - 2.0 * ride.base_disp[k] + ride.base_disp[k - 1]) * fs * fs;
    if (n >= 3) {
        base_acc[0] = base_acc[1];
        base_acc[n - 1] = base_acc[n - 2];
    }

    const double ms = car.sprung_kg, mu = car.unsprung_kg;
    const double ks = car.suspension_n_per_m, cs = car.suspension_damping, kt = car.tire_n_per_m;
    const double a0 = 4.0 / (h * h), a1 = 2.0 / h;

    // K_eff = K + a1*C + a0*M for the relative 2-DOF system.
    const double k11 = ks + a1 * cs + a0 * ms;
    const double k12 = -ks - a1 * cs;
    const double k22 = ks + kt + a1 * cs + a0 * mu;
    const double det = k11 * k22 - k12 * k12;

    double zs = 0.0, zu = 0.0, vs = 0.0, vu = 0.0;
    double as = -base_acc[0], au = -base_acc[0];
    ride.accel.resize(n);
    ride.accel[0] = as + base_acc[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double f1 = -ms * base_acc[k] + ms * (a0 * zs + 2.0 * a1 * vs + as) +
                          cs * (a1 * (zs - zu) + (vs - vu));
        const double f2 = -mu * base_acc[k] + mu * (a0 * zu + 2.0 * a1 * vu + au) +
                          cs * (a1 * (zu - zs) + (vu - vs));
        const double zs_new = (f1 * k22 - f2 * k12) / det;
        const double zu_new = (k11 * f2 - k12 * f1) / det;
        const double as_new = a0 * (zs_new - zs) - 2.0 * a1 * vs - as;
        const double au_new = a0 * (zu_new - zu) - 2.0 * a1 * vu - au;
        vs += h * 0.5 * (as + as_new);
        vu += h * 0.5 * (au + au_new);
        zs = zs_new;
        zu = zu_new;
        as = as_new;
        au = au_new;
        ride.accel[k] = as + base_acc[k];
    }
    return ride;
}

enum class DeviceOrientation { upright, rotated, quaternion };

struct SimConfig {
    ModalModel modal;
    BridgeFrame frame;
    VehicleDist vehicle;
    std::vector<double> speeds_mps;
    double pad_s = 15.0;
    double warmup_s = 300.0;
    double load_intensity = 1.0;
    double snr_db = std::numeric_limits<double>::infinity();
    double fs = 100.0;
    double gps_rate_hz = 1.0;
    double gps_noise_m = 4.3;
    double jitter_s = 0.002;
    DeviceOrientation orientation = DeviceOrientation::upright;
    std::uint64_t seed = 1;
    std::string trip_prefix = "trip";

    void validate() const {
        modal.validate();
        vehicle.mean.validate();
        if (speeds_mps.empty()) throw ValidationError("SimConfig: no speeds");
        for (double v : speeds_mps)
            if (!(v > 0.0)) throw ValidationError("SimConfig: speeds must be positive");
        if (!(fs > 0.0 && gps_rate_hz > 0.0 && pad_s >= 0.0 && warmup_s >= 0.0))
            throw ValidationError("SimConfig: bad rates");
        if (jitter_s < 0.0 || jitter_s >= 0.5 / fs)
            throw ValidationError("SimConfig: jitter must be below half the sample period");
    }
};

struct TripTruth {
    std::string trip_id;
    double speed_mps = 0.0;
    QuarterCar vehicle;
};

struct CorpusTruth {
    std::vector<double> modes_hz;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    std::vector<TripTruth> trips;
};

// One independent trip: fresh load realization, sampled vehicle and speed,
// jittered accelerometer clock, GPS track with position noise. The RNG stream
// is keyed by (seed, index), so serial and parallel generation agree.
inline std::pair<TripRecord, TripTruth> simulate_trip(const SimConfig& cfg, std::size_t index) {
    cfg.validate();
    Rng rng = Rng::stream(cfg.seed, index);

    const double v = cfg.speeds_mps[rng.below(cfg.speeds_mps.size())];
    const QuarterCar car = sample_vehicle(cfg.vehicle, rng);
    const double r_start = -cfg.pad_s * v;
    const double trip_duration = (cfg.modal.length_m - r_start) / v + cfg.pad_s;

    const BridgeField field = bridge_response(cfg.modal, cfg.load_intensity,
                                              trip_duration + 2.0 / cfg.fs, cfg.fs, rng,
                                              cfg.warmup_s);
    // The ride keeps going pad_s past the far abutment (flat road there), so
    // the record carries off-bridge context on both sides.
    VehicleRide ride = vehicle_ride(field, car, v, cfg.fs, r_start, 0.0, cfg.pad_s);
    const std::size_t n = ride.accel.size();

    TripRecord trip;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "%s_%04zu", cfg.trip_prefix.c_str(), index);
    trip.trip_id = idbuf;

    trip.t.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double jitter = cfg.jitter_s > 0.0 ? rng.uniform(-cfg.jitter_s, cfg.jitter_s) : 0.0;
        trip.t[k] = static_cast<double>(k) / cfg.fs + (k == 0 || k + 1 == n ? 0.0 : jitter);
    }

    double sigma = 0.0;
    if (!std::isinf(cfg.snr_db)) {
        double mean = 0.0, var = 0.0;
        for (double a : ride.accel) mean += a;
        mean /= static_cast<double>(n);
        for (double a : ride.accel) var += (a - mean) * (a - mean);
        var /= static_cast<double>(n);
        if (var > 0.0) sigma = std::sqrt(var / std::pow(10.0, cfg.snr_db / 10.0));
    }

    Quaternion device_to_world;  // identity when upright
    if (cfg.orientation != DeviceOrientation::upright) {
        const double angle = rng.uniform(0.2, 1.2);
        Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
        if (axis.norm() < 1e-9) axis = {1.0, 0.0, 0.0};
        device_to_world = Quaternion::axis_angle(axis, angle);
    }
    const Quaternion world_to_device(device_to_world.w, -device_to_world.x, -device_to_world.y,
                                     -device_to_world.z);

    for (auto& ch : trip.accel) ch.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec3 world{0.0, 0.0, kGravity + ride.accel[k]};
        const Vec3 device = world_to_device.rotate(world);
        trip.accel[0][k] = device.x + sigma * rng.normal();
        trip.accel[1][k] = device.y + sigma * rng.normal();
        trip.accel[2][k] = device.z + sigma * rng.normal();
    }

    const double duration = trip.t.back();
    for (double tg = 0.0; tg <= duration + 1e-9; tg += 1.0 / cfg.gps_rate_hz) {
        const double rt = r_start + v * tg;
        const double along = rt + cfg.gps_noise_m * rng.normal();
        const double cross = cfg.gps_noise_m * rng.normal();
        GpsSample g;
        const LatLon p = cfg.frame.from_axis(along, cross);
        g.t = std::min(tg, duration);
        g.lat = p.lat;
        g.lon = p.lon;
        g.err = cfg.gps_noise_m;
        trip.gps.push_back(g);
    }

    trip.speed_mps = v;
    trip.meta.target_speed_mps = v;
    switch (cfg.orientation) {
        case DeviceOrientation::upright:
            trip.meta.controllability = Controllability::controlled;
            trip.meta.orientation_source = OrientationSource::known_upright;
            break;
        case DeviceOrientation::quaternion: {
            trip.meta.controllability = Controllability::partially_controlled;
            trip.meta.orientation_source = OrientationSource::rotation_vector;
            for (double tq = 0.0; tq <= duration + 1e-9; tq += 1.0) {
                RotationSample rs;
                rs.t = std::min(tq, duration);
                rs.w = device_to_world.w;
                rs.x = device_to_world.x;
                rs.y = device_to_world.y;
                rs.z = device_to_world.z;
                trip.rotation.push_back(rs);
            }
            break;
        }
        default:
            trip.meta.controllability = Controllability::uncontrolled;
            trip.meta.orientation_source = OrientationSource::unknown;
    }
    trip.validate();

    TripTruth truth;
    truth.trip_id = trip.trip_id;
    truth.speed_mps = v;
    truth.vehicle = car;
    return {std::move(trip), std::move(truth)};
}

inline std::pair<std::vector<TripRecord>, CorpusTruth> simulate_corpus(const SimConfig& cfg,
                                                                       std::size_t n_trips) {
    cfg.validate();
    std::vector<TripRecord> trips;
    CorpusTruth truth;
    for (const auto& m : cfg.modal.modes) truth.modes_hz.push_back(m.freq_hz);
    truth.snr_db = cfg.snr_db;
    truth.seed = cfg.seed;
    for (std::size_t i = 0; i < n_trips; ++i) {
        auto [trip, trip_truth] = simulate_trip(cfg, i);
        trips.push_back(std::move(trip));
        truth.trips.push_back(std::move(trip_truth));
    }
    return {std::move(trips), std::move(truth)};
}

}  // namespace mpmf
