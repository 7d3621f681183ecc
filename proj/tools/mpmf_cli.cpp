// mpmf: extract most probable modal frequencies of a bridge from batches of
// smartphone-vehicle trip recordings, simulate ground-truth trip corpora,
// sweep estimation error versus trip count, and run service-life reliability
// Monte Carlo studies.
//
// Subcommands: simulate, analyze, robustness, reliability, inspect.
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mpmf/config.hpp"
#include "mpmf/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    bool seed_set = false;
    std::uint64_t seed = 0;
};

std::vector<mpmf::TripRecord> load_trips_or_die(const fs::path& dir,
                                                std::vector<std::string>& inputs) {
    const mpmf::CatalogResult cat = mpmf::catalog(dir);
    for (const auto& [path, msg] : cat.diagnostics)
        std::cerr << "warning: skipping " << path.string() << ": " << msg << '\n';
    std::vector<mpmf::TripRecord> trips;
    trips.reserve(cat.trips.size());
    for (const auto& summary : cat.trips) {
        trips.push_back(mpmf::load_trip(summary.path));
        inputs.push_back(summary.path.filename().string());
    }
    return trips;
}

int cmd_simulate(const fs::path& config_path, const fs::path& out_dir, const GlobalOpts& g,
                 long trips_override, const std::string& sweep_arg) {
    mpmf::SimFileConfig cfg = mpmf::load_sim_config(config_path);
    if (g.seed_set) cfg.sim.seed = g.seed;
    if (trips_override > 0) cfg.n_trips = static_cast<std::size_t>(trips_override);
    if (!sweep_arg.empty()) {
        cfg.snr_sweep_db.clear();
        std::stringstream ss(sweep_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.snr_sweep_db.push_back(std::stod(tok));
    }

    fs::create_directories(out_dir);
    if (cfg.snr_sweep_db.empty()) {
        mpmf::write_corpus(cfg.sim, cfg.n_trips, out_dir, g.workers);
        std::cerr << "simulate: wrote " << cfg.n_trips << " trips to " << out_dir.string() << '\n';
    } else {
        for (double snr : cfg.snr_sweep_db) {
            mpmf::SimConfig sim = cfg.sim;
            sim.snr_db = snr;
            char name[32];
            std::snprintf(name, sizeof(name), "snr_%+g_db", snr);
            const fs::path sub = out_dir / name;
            mpmf::write_corpus(sim, cfg.n_trips, sub, g.workers);
            std::cerr << "simulate: wrote " << cfg.n_trips << " trips to " << sub.string() << '\n';
        }
    }
    mpmf::write_manifest("simulate", config_path, cfg.sim.seed, {}, out_dir);
    return 0;
}

int cmd_analyze(const fs::path& config_path, const fs::path& trips_dir, const fs::path& out_dir,
                const GlobalOpts& g) {
    mpmf::AnalysisConfig cfg = mpmf::load_analysis_config(config_path);
    if (g.seed_set) cfg.seed = g.seed;

    std::vector<std::string> inputs;
    const auto trips = load_trips_or_die(trips_dir, inputs);
    if (trips.empty()) {
        std::cerr << "error: no trips in " << trips_dir.string() << '\n';
        return 2;
    }

    const mpmf::AnalyzeResult result = mpmf::analyze_trips(trips, cfg, g.workers);
    for (const auto& [id, msg] : result.trip_errors)
        std::cerr << "warning: trip " << id << " excluded: " << msg << '\n';

    fs::create_directories(out_dir);
    mpmf::write_candidates_csv(result, out_dir / "candidates.csv");
    mpmf::write_pdf_csv(result.report.pdf, out_dir / "pdf.csv");
    mpmf::write_mpmf_json(result, out_dir / "mpmf.json");
    mpmf::write_manifest("analyze", config_path, cfg.seed, std::move(inputs), out_dir);

    std::cerr << "analyze: " << result.n_trips_used << "/" << trips.size() << " trips, "
              << result.report.mpmfs.size() << " MPMFs\n";
    for (const auto& p : result.report.mpmfs) {
        char line[96];
        std::snprintf(line, sizeof(line), "  mpmf %.4f Hz  (cdf %.3f)", p.f_hz, p.cdf);
        std::cerr << line << '\n';
    }
    return 0;
}

int cmd_robustness(const fs::path& config_path, const fs::path& trips_dir, const fs::path& truth_path,
                   const fs::path& out_dir, const GlobalOpts& g, const std::string& sizes_arg,
                   long repeats_override) {
    mpmf::AnalysisConfig cfg = mpmf::load_analysis_config(config_path);
    if (g.seed_set) cfg.seed = g.seed;
    if (!fs::exists(truth_path)) {
        std::cerr << "error: truth file not found: " << truth_path.string() << '\n';
        return 2;
    }
    const std::vector<double> truth = mpmf::load_truth_modes(truth_path);

    std::vector<int> sizes = cfg.robustness_sizes;
    if (!sizes_arg.empty()) {
        sizes.clear();
        std::stringstream ss(sizes_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) sizes.push_back(std::stoi(tok));
    }
    int repeats = cfg.robustness_repeats;
    if (repeats_override > 0) repeats = static_cast<int>(repeats_override);

    std::vector<std::string> inputs;
    const auto trips = load_trips_or_die(trips_dir, inputs);
    if (trips.empty()) {
        std::cerr << "error: no trips in " << trips_dir.string() << '\n';
        return 2;
    }
    if (sizes.empty()) {
        std::cerr << "error: no subset sizes configured\n";
        return 2;
    }

    const mpmf::TripStageResult stage = mpmf::run_trip_stage(trips, cfg, g.workers);
    for (const auto& [id, msg] : stage.errors)
        std::cerr << "warning: trip " << id << " excluded: " << msg << '\n';
    if (stage.ridges.empty()) {
        std::cerr << "error: no trip survived the per-trip stage\n";
        return 1;
    }
    for (int& s : sizes) s = std::min<int>(s, static_cast<int>(stage.ridges.size()));

    const mpmf::AggregationParams params = mpmf::make_aggregation_params(cfg, stage.min_grid_f_hz);
    const mpmf::RobustnessResult result =
        mpmf::subset_error_curve(stage.ridges, params, truth, sizes, repeats, cfg.seed);

    fs::create_directories(out_dir);
    mpmf::write_robustness_csv(result, out_dir / "robustness.csv");
    inputs.push_back(truth_path.filename().string());
    mpmf::write_manifest("robustness", config_path, cfg.seed, std::move(inputs), out_dir);
    for (const auto& row : result.rows) {
        char line[96];
        std::snprintf(line, sizeof(line), "  N=%3d  mean_error %.4f  <5%% %.2f  failures %d",
                      row.n_s, row.mean_error, row.frac_under_5pct, row.failures);
        std::cerr << line << '\n';
    }
    return 0;
}

int cmd_reliability(const fs::path& config_path, const fs::path& out_dir, const GlobalOpts& g) {
    mpmf::ReliabilityFileConfig cfg = mpmf::load_reliability_config(config_path);
    if (g.seed_set) cfg.seed = g.seed;

    mpmf::PolicyConfig no_pi = cfg.policy;
    no_pi.kind = mpmf::MaintenancePolicy::no_pi;
    mpmf::PolicyConfig traditional = cfg.policy;
    traditional.kind = mpmf::MaintenancePolicy::traditional;
    const mpmf::PolicyConfig crowdsourced =
        mpmf::make_crowdsourced_policy(traditional, cfg.archetype, cfg.horizon_years);

    const std::vector<std::pair<std::string, mpmf::PolicyConfig>> policies = {
        {"no_pi", no_pi}, {"traditional", traditional}, {"crowdsourced", crowdsourced}};

    std::vector<mpmf::McSummary> summaries;
    for (const auto& [name, policy] : policies)
        summaries.push_back(
            mpmf::monte_carlo(cfg.archetype, policy, cfg.n, cfg.horizon_years, cfg.seed));

    fs::create_directories(out_dir);
    {
        std::string buf = "year";
        for (const auto& [name, policy] : policies) buf += "," + name + "_mean," + name + "_std";
        buf.push_back('\n');
        for (std::size_t y = 0; y < summaries.front().year.size(); ++y) {
            mpmf::detail::format_double(buf, summaries.front().year[y]);
            for (const auto& s : summaries) {
                buf.push_back(',');
                mpmf::detail::format_double(buf, s.mean_beta[y]);
                buf.push_back(',');
                mpmf::detail::format_double(buf, s.std_beta[y]);
            }
            buf.push_back('\n');
        }
        std::ofstream out(out_dir / "profiles.csv", std::ios::binary);
        out << buf;
    }
    {
        nlohmann::json j;
        for (std::size_t i = 0; i < policies.size(); ++i) {
            j[policies[i].first] = {{"expected_life_years", summaries[i].expected_life},
                                    {"censored", summaries[i].censored}};
        }
        j["gains"] = {{"crowdsourced_minus_no_pi",
                       summaries[2].expected_life - summaries[0].expected_life},
                      {"traditional_minus_no_pi",
                       summaries[1].expected_life - summaries[0].expected_life}};
        std::ofstream out(out_dir / "lives.json", std::ios::binary);
        out << j.dump(2) << '\n';
    }
    mpmf::write_manifest("reliability", config_path, cfg.seed, {}, out_dir);
    for (std::size_t i = 0; i < policies.size(); ++i) {
        char line[96];
        std::snprintf(line, sizeof(line), "  %-13s expected life %.1f years%s", policies[i].first.c_str(),
                      summaries[i].expected_life, summaries[i].censored ? " (censored)" : "");
        std::cerr << line << '\n';
    }
    return 0;
}

int cmd_inspect(const fs::path& trip_path) {
    const mpmf::TripRecord trip = mpmf::load_trip(trip_path);
    std::printf("trip_id:          %s\n", trip.trip_id.c_str());
    std::printf("samples:          %zu\n", trip.t.size());
    std::printf("duration:         %.2f s\n", trip.duration_s());
    std::printf("mean rate:        %.2f Hz\n",
                static_cast<double>(trip.t.size() - 1) / trip.duration_s());
    std::printf("gps points:       %zu\n", trip.gps.size());
    std::printf("controllability:  %s\n", mpmf::to_string(trip.meta.controllability));
    std::printf("orientation:      %s\n", mpmf::to_string(trip.meta.orientation_source));
    if (trip.speed_mps) std::printf("speed:            %.2f m/s\n", *trip.speed_mps);
    if (trip.meta.phone_model) std::printf("phone:            %s\n", trip.meta.phone_model->c_str());
    if (trip.meta.vehicle_model)
        std::printf("vehicle:          %s\n", trip.meta.vehicle_model->c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bridge modal frequencies from crowdsensed vehicle trips"};
    app.require_subcommand(1);
    app.set_version_flag("--version", mpmf::kToolVersion);

    GlobalOpts g;
    app.add_option("--workers", g.workers, "Worker threads for per-trip stages");
    std::uint64_t seed_opt = 0;
    auto* seed_flag = app.add_option("--seed", seed_opt, "Override the config seed");

    std::string config, trips_dir, out_dir = "out", truth, sizes_arg, sweep_arg;
    long trips_override = -1, repeats_override = -1;

    auto* sim = app.add_subcommand("simulate", "Generate a synthetic trip corpus");
    sim->add_option("--config", config, "sim config file")->required();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--trips", trips_override, "override trip count");
    sim->add_option("--snr-sweep", sweep_arg, "comma-separated SNR dB list, one corpus each");

    auto* ana = app.add_subcommand("analyze", "Extract MPMFs from a trip directory");
    ana->add_option("--config", config, "analysis config file")->required();
    ana->add_option("--trips", trips_dir, "trip directory")->required();
    ana->add_option("--out", out_dir, "output directory");

    auto* rob = app.add_subcommand("robustness", "Estimation error versus trip count");
    rob->add_option("--config", config, "analysis config file")->required();
    rob->add_option("--trips", trips_dir, "trip directory")->required();
    rob->add_option("--truth", truth, "truth.json with reference modes")->required();
    rob->add_option("--out", out_dir, "output directory");
    rob->add_option("--sizes", sizes_arg, "comma-separated subset sizes");
    rob->add_option("--repeats", repeats_override, "repeats per size");

    auto* rel = app.add_subcommand("reliability", "Service-life reliability Monte Carlo");
    rel->add_option("--config", config, "reliability config file")->required();
    rel->add_option("--out", out_dir, "output directory");

    std::string inspect_path;
    auto* ins = app.add_subcommand("inspect", "Print a trip summary");
    ins->add_option("trip", inspect_path, "trip CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    g.seed_set = seed_flag->count() > 0;
    g.seed = seed_opt;

    try {
        if (sim->parsed()) return cmd_simulate(config, out_dir, g, trips_override, sweep_arg);
        if (ana->parsed()) return cmd_analyze(config, trips_dir, out_dir, g);
        if (rob->parsed())
            return cmd_robustness(config, trips_dir, truth, out_dir, g, sizes_arg, repeats_override);
        if (rel->parsed()) return cmd_reliability(config, out_dir, g);
        if (ins->parsed()) return cmd_inspect(inspect_path);
    } catch (const mpmf::ParseError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    } catch (const mpmf::ValidationError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 2;
}
