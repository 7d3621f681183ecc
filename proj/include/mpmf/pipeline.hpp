#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpmf/config.hpp"
#include "mpmf/mpmf.hpp"
#include "mpmf/parallel.hpp"
#include "mpmf/preprocess.hpp"
#include "mpmf/ridge.hpp"
#include "mpmf/simulator.hpp"
#include "mpmf/sswt.hpp"
#include "mpmf/trip.hpp"

namespace mpmf {

inline constexpr const char* kToolVersion = "0.1.0";

// Per-trip stage: GPS projection + cleaning, preprocessing, SSWT, ridge
// thresholding, remap to bridge space. Pure and deterministic per trip.
inline TripRidges process_trip(const TripRecord& trip, const AnalysisConfig& cfg) {
    const BridgeTrack raw = to_bridge_coords(trip.gps, cfg.frame);
    const BridgeTrack track = clean_track(raw, cfg.frame);
    const VerticalTrace trace = preprocess_trip(trip, track, cfg.filter);
    const TfrGrid tfr = sswt(trace.x, 1.0 / trace.fs, cfg.n_v, cfg.gamma_rel, cfg.morlet_omega0);
    RidgeSet ridges = threshold_ridges(extract_column_peaks(tfr), cfg.alpha, trip.trip_id);
    TripRidges spatial = remap_to_space(ridges, track, trace.t0, trace.fs, cfg.frame.length_m);
    if (spatial.points.empty())
        throw ValidationError("trip " + trip.trip_id + ": no on-bridge ridge points");
    return spatial;
}

struct TripStageResult {
    std::vector<TripRidges> ridges;                          // sorted by trip_id
    std::vector<std::pair<std::string, std::string>> errors; // (trip_id, message)
    double min_grid_f_hz = 0.0;                              // lowest per-trip grid frequency
};

// Runs the per-trip stage over a corpus with a worker pool; output order and
// contents do not depend on the worker count.
inline TripStageResult run_trip_stage(std::span<const TripRecord> trips, const AnalysisConfig& cfg,
                                      unsigned workers) {
    TripStageResult out;
    std::vector<TripRidges> results(trips.size());
    std::vector<std::string> errors(trips.size());
    parallel_for(trips.size(), workers, [&](std::size_t i) {
        try {
            results[i] = process_trip(trips[i], cfg);
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    });
    double f_min = cfg.filter.f_cut_hz;
    for (std::size_t i = 0; i < trips.size(); ++i) {
        if (!errors[i].empty()) {
            out.errors.emplace_back(trips[i].trip_id, errors[i]);
            continue;
        }
        out.ridges.push_back(std::move(results[i]));
    }
    std::sort(out.ridges.begin(), out.ridges.end(),
              [](const TripRidges& a, const TripRidges& b) { return a.trip_id < b.trip_id; });
    for (const auto& t : out.ridges)
        for (const auto& p : t.points) f_min = std::min(f_min, p.f_hz);
    out.min_grid_f_hz = f_min;
    return out;
}

inline AggregationParams make_aggregation_params(const AnalysisConfig& cfg, double f_min_hz) {
    AggregationParams params;
    params.seg = Segmentation::build(cfg.frame.length_m, cfg.delta_s_m, cfg.c_m);
    const double f_max = cfg.filter.f_cut_hz;
    params.grid = CommonGrid::cover(f_max, cfg.n_v, std::min(f_min_hz, f_max * 0.5) * 0.99);
    params.n_r = cfg.n_r;
    params.f_min = 0.0;
    params.f_max = f_max;
    params.bandwidth = cfg.bandwidth_hz();
    params.cdf_threshold = cfg.cdf_threshold;
    return params;
}

struct AnalyzeResult {
    AggregationParams params;
    ProminenceMatrix pn;
    CandidateSet candidates;
    MpmfReport report;
    std::vector<std::pair<std::string, std::string>> trip_errors;
    std::size_t n_trips_used = 0;
};

inline AnalyzeResult analyze_trips(std::span<const TripRecord> trips, const AnalysisConfig& cfg,
                                   unsigned workers = 1) {
    if (trips.empty()) throw ValidationError("analyze: no trips");
    TripStageResult stage = run_trip_stage(trips, cfg, workers);
    if (stage.ridges.empty())
        throw ValidationError("analyze: no trip survived the per-trip stage");

    AnalyzeResult result;
    result.params = make_aggregation_params(cfg, stage.min_grid_f_hz);
    result.pn = aggregate(stage.ridges, result.params.seg, result.params.grid);
    result.candidates = top_candidates(result.pn, cfg.n_r);
    if (result.candidates.f_hat_s.empty()) throw ValidationError("analyze: no frequency candidates");
    PdfCurve pdf = kde_pdf(result.candidates.f_hat_s, result.params.f_min, result.params.f_max,
                           result.params.bandwidth);
    result.report = pick_mpmfs(std::move(pdf), cfg.cdf_threshold);
    result.trip_errors = std::move(stage.errors);
    result.n_trips_used = stage.ridges.size();
    return result;
}

// ---------------------------------------------------------------------------
// Output files

inline void write_candidates_csv(const AnalyzeResult& result, const std::filesystem::path& path) {
    std::string buf = "segment,rank,f_hz,p\n";
    const auto& pn = result.pn;
    for (std::size_t m = 0; m < result.candidates.per_segment.size(); ++m) {
        const auto& freqs = result.candidates.per_segment[m];
        for (std::size_t rank = 0; rank < freqs.size(); ++rank) {
            buf += std::to_string(m + 1);
            buf.push_back(',');
            buf += std::to_string(rank + 1);
            buf.push_back(',');
            detail::format_double(buf, freqs[rank]);
            buf.push_back(',');
            const auto bin = pn.grid.snap(freqs[rank]);
            detail::format_double(buf, bin >= 0 ? pn.at(static_cast<std::size_t>(bin), m) : 0.0);
            buf.push_back('\n');
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out << buf;
}

inline void write_pdf_csv(const PdfCurve& pdf, const std::filesystem::path& path) {
    std::string buf = "f_hz,density\n";
    for (std::size_t g = 0; g < pdf.f.size(); ++g) {
        detail::format_double(buf, pdf.f[g]);
        buf.push_back(',');
        detail::format_double(buf, pdf.density[g]);
        buf.push_back('\n');
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out << buf;
}

inline void write_mpmf_json(const AnalyzeResult& result, const std::filesystem::path& path) {
    nlohmann::json j;
    j["bandwidth_hz"] = result.params.bandwidth;
    j["cdf_threshold"] = result.params.cdf_threshold;
    j["f_range_hz"] = {result.params.f_min, result.params.f_max};
    j["n_trips_used"] = result.n_trips_used;
    j["n_candidates"] = result.candidates.f_hat_s.size();
    auto peaks_json = [](const std::vector<MpmfPeak>& peaks) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : peaks)
            arr.push_back({{"f_hz", p.f_hz}, {"density", p.density}, {"cdf", p.cdf}});
        return arr;
    };
    j["peaks"] = peaks_json(result.report.peaks);
    j["mpmfs"] = peaks_json(result.report.mpmfs);
    nlohmann::json errs = nlohmann::json::object();
    for (const auto& [id, msg] : result.trip_errors) errs[id] = msg;
    j["trip_errors"] = errs;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

inline void write_robustness_csv(const RobustnessResult& result, const std::filesystem::path& path) {
    std::string buf = "n_s,mean_error,frac_under_5pct,failures\n";
    for (const auto& row : result.rows) {
        buf += std::to_string(row.n_s);
        buf.push_back(',');
        detail::format_double(buf, row.mean_error);
        buf.push_back(',');
        detail::format_double(buf, row.frac_under_5pct);
        buf.push_back(',');
        buf += std::to_string(row.failures);
        buf.push_back('\n');
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out << buf;
}

inline void write_truth_json(const CorpusTruth& truth, const std::filesystem::path& path) {
    nlohmann::json j;
    j["modes_hz"] = truth.modes_hz;
    if (std::isinf(truth.snr_db))
        j["snr_db"] = nullptr;
    else
        j["snr_db"] = truth.snr_db;
    j["seed"] = truth.seed;
    nlohmann::json trips = nlohmann::json::array();
    for (const auto& t : truth.trips) {
        trips.push_back({{"trip_id", t.trip_id},
                         {"speed_mps", t.speed_mps},
                         {"vehicle",
                          {{"sprung_kg", t.vehicle.sprung_kg},
                           {"unsprung_kg", t.vehicle.unsprung_kg},
                           {"suspension_n_per_m", t.vehicle.suspension_n_per_m},
                           {"suspension_damping", t.vehicle.suspension_damping},
                           {"tire_n_per_m", t.vehicle.tire_n_per_m}}}});
    }
    j["trips"] = trips;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

inline std::vector<double> load_truth_modes(const std::filesystem::path& path) {
    const auto j = detail::load_json(path);
    try {
        return j.at("modes_hz").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
}

// Writes a corpus (CSV + sidecar per trip, truth.json) into dir.
inline void write_corpus(const SimConfig& cfg, std::size_t n_trips,
                         const std::filesystem::path& dir, unsigned workers = 1) {
    std::filesystem::create_directories(dir);
    CorpusTruth truth;
    for (const auto& m : cfg.modal.modes) truth.modes_hz.push_back(m.freq_hz);
    truth.snr_db = cfg.snr_db;
    truth.seed = cfg.seed;
    truth.trips.resize(n_trips);
    parallel_for(n_trips, workers, [&](std::size_t i) {
        auto [trip, trip_truth] = simulate_trip(cfg, i);
        save_trip(trip, dir / (trip.trip_id + ".csv"));
        truth.trips[i] = trip_truth;
    });
    write_truth_json(truth, dir / "truth.json");
}

// ---------------------------------------------------------------------------
// Run manifest

inline std::uint64_t fnv1a_hash(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return 0;
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a_hash(data);
}

inline void write_manifest(const std::string& command, const std::filesystem::path& config_path,
                           std::uint64_t seed, std::vector<std::string> inputs,
                           const std::filesystem::path& out_dir) {
    std::sort(inputs.begin(), inputs.end());
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(file_hash(config_path)));
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));

    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = hash_hex;
    j["seed"] = seed;
    j["inputs"] = inputs;
    j["tool_version"] = kToolVersion;
    j["timestamp"] = stamp;
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    if (!out) throw ParseError("cannot write manifest in " + out_dir.string());
    out << j.dump(2) << '\n';
}

}  // namespace mpmf
