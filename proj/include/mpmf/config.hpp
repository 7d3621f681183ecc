#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpmf/geo.hpp"
#include "mpmf/preprocess.hpp"
#include "mpmf/reliability.hpp"
#include "mpmf/simulator.hpp"
#include "mpmf/sswt.hpp"

namespace mpmf {

namespace detail {

inline nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
    return j;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<T>();
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_absolute()) return p;
    return base.parent_path() / p;
}

}  // namespace detail

inline BridgeFrame load_bridge_frame(const std::filesystem::path& path) {
    const auto j = detail::load_json(path);
    try {
        const LatLon a{j.at("point_a").at("lat").get<double>(), j.at("point_a").at("lon").get<double>()};
        const LatLon b{j.at("point_b").at("lat").get<double>(), j.at("point_b").at("lon").get<double>()};
        const LatLon bb_min{j.at("bbox").at("min").at("lat").get<double>(),
                            j.at("bbox").at("min").at("lon").get<double>()};
        const LatLon bb_max{j.at("bbox").at("max").at("lat").get<double>(),
                            j.at("bbox").at("max").at("lon").get<double>()};
        return BridgeFrame::create(j.at("name").get<std::string>(), a, b,
                                   j.at("length_m").get<double>(), bb_min, bb_max);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
}

struct AnalysisConfig {
    BridgeFrame frame;
    FilterSpec filter;              // f_cut + resample rate
    int n_v = 32;
    double gamma_rel = 1e-8;
    double morlet_omega0 = kMorletOmega0;
    double alpha = 0.05;
    int n_r = 5;
    double delta_s_m = 0.0;
    double c_m = 0.0;
    double bandwidth_frac = 0.01;   // of the (0, f_cut) range
    double cdf_threshold = 0.10;
    std::uint64_t seed = 1;
    std::vector<int> robustness_sizes;
    int robustness_repeats = 100;

    double bandwidth_hz() const { return bandwidth_frac * filter.f_cut_hz; }
};

// analysis.cfg. Segmentation accepts either absolute meters (delta_s_m, c_m)
// or span fractions (segments -> delta_s = L/segments, c_frac -> c = L*c_frac).
inline AnalysisConfig load_analysis_config(const std::filesystem::path& path) {
    const auto j = detail::load_json(path);
    AnalysisConfig cfg;
    try {
        cfg.frame = load_bridge_frame(detail::resolve(path, j.at("bridge").get<std::string>()));
        cfg.filter.f_cut_hz = detail::get_or(j, "f_cut_hz", 0.5);
        cfg.filter.resample_fs_hz = detail::get_or(j, "resample_fs_hz", 100.0);
        cfg.filter.validate();
        cfg.n_v = detail::get_or(j, "n_v", 32);
        cfg.gamma_rel = detail::get_or(j, "gamma_rel", 1e-8);
        cfg.morlet_omega0 = detail::get_or(j, "morlet_omega0", kMorletOmega0);
        cfg.alpha = detail::get_or(j, "alpha", 0.05);
        cfg.n_r = detail::get_or(j, "n_r", 5);
        if (j.contains("segments"))
            cfg.delta_s_m = cfg.frame.length_m / j["segments"].get<double>();
        else
            cfg.delta_s_m = j.at("delta_s_m").get<double>();
        if (j.contains("c_frac"))
            cfg.c_m = cfg.frame.length_m * j["c_frac"].get<double>();
        else
            cfg.c_m = j.at("c_m").get<double>();
        cfg.bandwidth_frac = detail::get_or(j, "bandwidth_frac", 0.01);
        cfg.cdf_threshold = detail::get_or(j, "cdf_threshold", 0.10);
        cfg.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
        if (j.contains("robustness")) {
            const auto& r = j["robustness"];
            if (r.contains("sizes"))
                cfg.robustness_sizes = r["sizes"].get<std::vector<int>>();
            cfg.robustness_repeats = detail::get_or(r, "repeats", 100);
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
    return cfg;
}

struct SimFileConfig {
    SimConfig sim;
    std::size_t n_trips = 0;
    std::vector<double> snr_sweep_db;  // optional; one corpus per entry
};

inline SimFileConfig load_sim_config(const std::filesystem::path& path) {
    const auto j = detail::load_json(path);
    SimFileConfig out;
    try {
        out.sim.frame = load_bridge_frame(detail::resolve(path, j.at("bridge").get<std::string>()));
        const double zeta = detail::get_or(j, "zeta", 0.01);
        std::vector<std::tuple<double, char, double>> modes;
        for (const auto& m : j.at("modes")) {
            const std::string tag = detail::get_or<std::string>(m, "shape", "S");
            modes.emplace_back(m.at("freq_hz").get<double>(), tag.empty() ? 'S' : tag[0],
                               detail::get_or(m, "amplitude", 1.0));
        }
        out.sim.modal = ModalModel::from_frequencies(out.sim.frame.length_m,
                                                     detail::get_or(j, "grid_step_m", 10.0), modes,
                                                     zeta);
        if (j.contains("vehicle")) {
            const auto& vj = j["vehicle"];
            auto& car = out.sim.vehicle.mean;
            car.sprung_kg = detail::get_or(vj, "sprung_kg", car.sprung_kg);
            car.unsprung_kg = detail::get_or(vj, "unsprung_kg", car.unsprung_kg);
            car.suspension_n_per_m = detail::get_or(vj, "suspension_n_per_m", car.suspension_n_per_m);
            car.suspension_damping = detail::get_or(vj, "suspension_damping", car.suspension_damping);
            car.tire_n_per_m = detail::get_or(vj, "tire_n_per_m", car.tire_n_per_m);
            out.sim.vehicle.log_sigma = detail::get_or(vj, "log_sigma", 0.2);
        }
        if (j.contains("speeds_kph"))
            for (double s : j["speeds_kph"].get<std::vector<double>>())
                out.sim.speeds_mps.push_back(s / 3.6);
        else
            out.sim.speeds_mps = j.at("speeds_mps").get<std::vector<double>>();
        out.sim.pad_s = detail::get_or(j, "pad_s", 15.0);
        out.sim.warmup_s = detail::get_or(j, "warmup_s", 300.0);
        out.sim.load_intensity = detail::get_or(j, "load_intensity", 1.0);
        out.sim.snr_db = detail::get_or(j, "snr_db", std::numeric_limits<double>::infinity());
        out.sim.fs = detail::get_or(j, "fs_hz", 100.0);
        out.sim.gps_rate_hz = detail::get_or(j, "gps_rate_hz", 1.0);
        out.sim.gps_noise_m = detail::get_or(j, "gps_noise_m", 4.3);
        out.sim.jitter_s = detail::get_or(j, "jitter_ms", 2.0) / 1000.0;
        const std::string orient = detail::get_or<std::string>(j, "orientation", "upright");
        if (orient == "upright")
            out.sim.orientation = DeviceOrientation::upright;
        else if (orient == "rotated")
            out.sim.orientation = DeviceOrientation::rotated;
        else if (orient == "quaternion")
            out.sim.orientation = DeviceOrientation::quaternion;
        else
            throw ParseError("unknown orientation: " + orient);
        out.sim.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
        out.sim.trip_prefix = detail::get_or<std::string>(j, "trip_prefix", "trip");
        out.n_trips = detail::get_or<std::size_t>(j, "n_trips", 10);
        if (j.contains("snr_sweep_db"))
            out.snr_sweep_db = j["snr_sweep_db"].get<std::vector<double>>();
        out.sim.validate();
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
    return out;
}

struct ReliabilityFileConfig {
    ArchetypeConfig archetype;
    PolicyConfig policy;  // traditional parameters; other policies derive from it
    double horizon_years = 120.0;
    int n = 10'000;
    std::uint64_t seed = 1;
};

inline ReliabilityFileConfig load_reliability_config(const std::filesystem::path& path) {
    const auto j = detail::load_json(path);
    ReliabilityFileConfig cfg;
    try {
        const std::string arch = detail::get_or<std::string>(j, "archetype", "typical");
        if (arch == "typical")
            cfg.archetype = ArchetypeConfig::typical();
        else if (arch == "new")
            cfg.archetype = ArchetypeConfig::fresh();
        else
            throw ParseError("unknown archetype: " + arch);
        auto dist = [&](const char* key, UniformDist fallback) {
            if (!j.contains(key)) return fallback;
            const auto v = j[key].get<std::vector<double>>();
            if (v.size() != 2) throw ParseError(std::string(key) + ": expected [lo, hi]");
            return UniformDist{v[0], v[1]};
        };
        cfg.archetype.beta0 = dist("beta0", cfg.archetype.beta0);
        cfg.archetype.rate = dist("rate", cfg.archetype.rate);
        cfg.archetype.improvement = dist("improvement", cfg.archetype.improvement);
        cfg.policy.pi_interval_years = detail::get_or(j, "pi_interval_years", 15.0);
        cfg.policy.apr = detail::get_or(j, "apr", 0.06);
        cfg.policy.service_limit = detail::get_or(j, "service_limit", 4.6);
        cfg.horizon_years = detail::get_or(j, "horizon_years", 120.0);
        cfg.n = detail::get_or(j, "n", 10'000);
        cfg.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
        cfg.archetype.validate();
        cfg.policy.validate();
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
    return cfg;
}

}  // namespace mpmf
