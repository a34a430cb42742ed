#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adcal/engine_model.hpp"
#include "adcal/grid.hpp"
#include "adcal/ilp.hpp"
#include "adcal/measurement.hpp"
#include "adcal/opfield.hpp"
#include "adcal/solution_map.hpp"

namespace adcal {

/// One row of the bundled emission limit table (mg/km per pollutant).
struct EuroLimits {
    std::string norm;
    std::map<std::string, double> mg_per_km;  // keyed by measurand name
};

std::vector<EuroLimits> load_euro_table(const std::string& path);

struct CampaignConfig {
    int schema_version = 1;
    std::string name;
    EngineConfig engine;

    int k = 8;
    int ell = 10;
    int initial_subdivisions = 2;
    Interval op_freq{1000.0, 2600.0};
    Interval op_torq{0.0, 230.0};

    double relevance_frac = 0.01;
    Vec refinement_thresholds;  // absolute per measurand, inf = ignored
    double compressor_c = 0.5;
    double safety_margin_frac = 0.05;
    int predict_horizon = 3;
    int min_frequency_gap = 4;
    double cross_step_frac = 0.02;
    double min_box_unit_edge = 1.0 / 512.0;

    Vec deltas;  // drivability bound per actuator, absolute

    std::vector<std::string> pollutant_names;  // subset of measurand names
    std::map<std::string, double> limits_mg_per_km;
    double limit_scale = 1.0;

    std::string profile_path;
    double profile_dt = 1.0;
    VehicleParams vehicle;

    std::uint64_t budget = 20000;
    std::uint64_t seed = 1;
    int ilp_every_n_plans = 5;
    double ilp_time_limit_s = 120.0;
    std::size_t max_candidates_per_stack = 0;
    int snapshot_every_plans = 0;  // 0 = only at the end
    std::string import_dataset;

    int baseline_initial_resolution = 3;
    int baseline_max_resolution = 65;

    static CampaignConfig load(const std::string& path);
    static CampaignConfig from_json_text(const std::string& text, const std::string& base_dir);
    std::string raw_json;  // original text, embedded in snapshots
};

struct CampaignReport {
    std::string status;  // complete | budget_exhausted | infeasible_limits
    std::uint64_t oracle_evaluations = 0;
    std::size_t stored_points = 0;
    std::size_t imported_points = 0;
    std::size_t reduced_points = 0;
    std::size_t plans = 0;
    std::size_t aborted_plans = 0;
    std::size_t splits_symmetric = 0;
    std::size_t splits_asymmetric = 0;
    std::size_t cross_measurements = 0;
    std::size_t compressor_removed = 0;
    std::size_t ilp_solves = 0;
    double ilp_objective = 0.0;
    std::vector<std::string> pollutant_names;
    Vec emission_total_g;
    Vec emission_slack_g;
    Vec emission_mg_per_km;
    int violated_pollutant = -1;
    std::size_t cells_chosen = 0;
    std::size_t cells_synthetic = 0;
    std::size_t cells_empty = 0;
    std::uint64_t dataset_checksum = 0;
    std::string to_json_text() const;
};

struct CampaignResult {
    CampaignReport report;
    SolutionMap solution;
    Dataset dataset;
    std::vector<std::uint64_t> reduced;
    DrivingCycleWeights weights;
    KOperationField field;          // stacks over the reduced set
    IlpInstance instance;           // last solved instance
    IlpSolution ilp;                // last assignment
    std::string grid_json;
};

/// Algorithm-1 loop: plan, measure (with step-V/VI refinement), clean, solve
/// the ILP, fill gaps, repeat until a conforming complete map exists or the
/// evaluation budget runs out. Writes artifacts when out_dir is nonempty.
CampaignResult run_campaign(const CampaignConfig& config, const std::string& out_dir = "");

/// Uniform-grid baseline: full-factorial ramp sweeps at increasing
/// resolution through the same cleaning/ILP/gap pipeline.
CampaignResult run_uniform_baseline(const CampaignConfig& config,
                                    const std::string& out_dir = "");

/// Resumes a campaign from a snapshot file.
CampaignResult resume_campaign(const std::string& snapshot_path, const std::string& out_dir = "");

/// Re-checks the solution stored in a snapshot; returns the verify report.
VerifyReport verify_snapshot(const std::string& snapshot_path);

/// Writes per-actuator maps, pollutant-rate maps and the weighting table as
/// delimited text. Empty cells are exported as a sentinel token.
void export_maps(const SolutionMap& solution, const KOperationField& field,
                 const DrivingCycleWeights& weights, const EngineConfig& engine,
                 const std::string& out_dir);

/// Cellwise ratio matrices between two solutions of equal k.
void export_ratio(const SolutionMap& a, const SolutionMap& b, const KOperationField& field,
                  const EngineConfig& engine, const std::string& out_dir);

std::uint64_t fnv1a64_file(const std::string& path);

}  // namespace adcal
