#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "adcal/campaign.hpp"
#include "json.hpp"

namespace {

int status_code(const std::string& status) {
    if (status == "complete") return 0;
    if (status == "budget_exhausted") return 2;
    if (status == "infeasible_limits") return 3;
    return 1;
}

void print_summary(const adcal::CampaignResult& result) {
    const auto& r = result.report;
    std::cout << "status:             " << r.status << "\n";
    std::cout << "oracle evaluations: " << r.oracle_evaluations << "\n";
    std::cout << "stored points:      " << r.stored_points << " (" << r.imported_points
              << " imported)\n";
    std::cout << "reduced points:     " << r.reduced_points << "\n";
    std::cout << "plans:              " << r.plans << " (" << r.aborted_plans << " aborted)\n";
    std::cout << "splits:             " << r.splits_symmetric << " symmetric, "
              << r.splits_asymmetric << " asymmetric (" << r.cross_measurements
              << " cross-measurements)\n";
    std::cout << "ilp solves:         " << r.ilp_solves << " (objective " << r.ilp_objective
              << ")\n";
    std::cout << "cells:              " << r.cells_chosen << " measured, " << r.cells_synthetic
              << " synthetic, " << r.cells_empty << " empty\n";
    for (std::size_t e = 0; e < r.pollutant_names.size(); ++e) {
        if (e < r.emission_mg_per_km.size())
            std::cout << "  " << r.pollutant_names[e] << ": " << r.emission_mg_per_km[e]
                      << " mg/km (slack " << r.emission_slack_g[e] << " g)\n";
    }
    std::printf("dataset checksum:   %016llx\n",
                static_cast<unsigned long long>(r.dataset_checksum));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive engine calibration toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, import_path, snapshot_path, ratio_path;
    std::uint64_t seed = 0;
    bool has_seed = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "campaign configuration file")->required();
        sub->add_option("--out", out_dir, "output directory for run artifacts");
        sub->add_option("--seed", seed, "override the configured seed")
            ->each([&](const std::string&) { has_seed = true; });
    };

    auto* calibrate = app.add_subcommand("calibrate", "run the adaptive calibration campaign");
    add_common(calibrate);
    calibrate->add_option("--import", import_path, "seed the dataset from a dataset.jsonl");

    auto* baseline = app.add_subcommand("baseline", "run the uniform-grid baseline");
    add_common(baseline);

    auto* resume = app.add_subcommand("resume", "continue a campaign from a snapshot");
    resume->add_option("--snapshot", snapshot_path, "snapshot.json of a previous run")
        ->required();
    resume->add_option("--out", out_dir, "output directory for run artifacts");

    auto* verify = app.add_subcommand("verify", "re-check the solution stored in a snapshot");
    verify->add_option("--snapshot", snapshot_path, "snapshot.json of a previous run")
        ->required();

    auto* exporter = app.add_subcommand("export", "write solution maps from a snapshot");
    exporter->add_option("--snapshot", snapshot_path, "snapshot.json of a previous run")
        ->required();
    exporter->add_option("--out", out_dir, "output directory")->required();
    exporter->add_option("--ratio", ratio_path, "second snapshot for cellwise ratio maps");

    CLI11_PARSE(app, argc, argv);

    try {
        if (calibrate->parsed() || baseline->parsed()) {
            adcal::CampaignConfig cfg = adcal::CampaignConfig::load(config_path);
            if (has_seed) cfg.seed = seed;
            if (!import_path.empty()) cfg.import_dataset = import_path;
            const auto result = calibrate->parsed() ? adcal::run_campaign(cfg, out_dir)
                                                    : adcal::run_uniform_baseline(cfg, out_dir);
            print_summary(result);
            return status_code(result.report.status);
        }
        if (resume->parsed()) {
            const auto result = adcal::resume_campaign(snapshot_path, out_dir);
            print_summary(result);
            return status_code(result.report.status);
        }
        if (verify->parsed()) {
            const auto rep = adcal::verify_snapshot(snapshot_path);
            std::cout << "equalities violated:   " << rep.equality_violations << "\n";
            std::cout << "conflicts violated:    " << rep.conflict_violations << "\n";
            std::cout << "drivability violated:  " << rep.drivability_violations << "\n";
            for (std::size_t e = 0; e < rep.emission_slack.size(); ++e)
                std::cout << "emission slack [" << e << "]: " << rep.emission_slack[e]
                          << " g\n";
            std::cout << (rep.ok ? "solution verified" : "solution INVALID") << "\n";
            return rep.ok ? 0 : 1;
        }
        if (exporter->parsed()) {
            using nlohmann::json;
            const auto load_snapshot_result = [](const std::string& path) {
                // minimal re-load: solution + config geometry
                std::ifstream in(path);
                if (!in) throw std::runtime_error("cannot open " + path);
                json snap;
                in >> snap;
                return snap;
            };
            const json snap = load_snapshot_result(snapshot_path);
            const auto cfg = adcal::CampaignConfig::from_json_text(
                snap.at("config").get<std::string>(),
                std::filesystem::path(snapshot_path).parent_path().string());
            const auto solution =
                adcal::SolutionMap::from_json_text(snap.at("solution").dump());
            adcal::KOperationField field(cfg.k, cfg.op_freq, cfg.op_torq);
            const auto profile = adcal::OperationalProfile::load(cfg.profile_path);
            const auto weights = adcal::trace_to_weights(
                adcal::profile_to_trace(profile, cfg.vehicle, cfg.profile_dt), field,
                profile.name);
            adcal::export_maps(solution, field, weights, cfg.engine, out_dir);
            if (!ratio_path.empty()) {
                const json other = load_snapshot_result(ratio_path);
                const auto sol_b =
                    adcal::SolutionMap::from_json_text(other.at("solution").dump());
                adcal::export_ratio(solution, sol_b, field, cfg.engine, out_dir);
            }
            std::cout << "maps written to " << out_dir << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
