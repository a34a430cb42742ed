#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adcal/measurement.hpp"
#include "adcal/opfield.hpp"
#include "adcal/solution_map.hpp"
#include "adcal/types.hpp"

namespace adcal {

/// Pollutant set E with per-pollutant noncritical upper bounds (penalty
/// rates for uncovered cells) and accumulated-emission limits. The unit
/// factor converts omega * rate into limit units (seconds * g/h -> grams).
struct EmissionModel {
    std::vector<std::size_t> pollutants;  // measurand indices
    std::vector<std::string> names;
    Vec upper;  // rate units
    Vec limit;  // accumulated units
    double unit_factor = 1.0 / 3600.0;

    std::size_t size() const { return pollutants.size(); }
};

/// prey(q) = min fuel over q's stack / fuel(q), in (0, 1].
std::vector<double> prey_values(const KOperationField& field, const Dataset& dataset,
                                std::size_t fuel_measurand);

struct IlpInstance {
    int k = 0;
    struct Candidate {
        std::uint64_t seq;
        int cell;
        double prey;
        double fuel;
        Vec u;
        Vec rates;  // one per pollutant
    };
    std::vector<Candidate> points;             // decision variable order
    std::vector<std::vector<int>> stack_vars;  // per cell -> variable indices
    Vec cell_omega;                            // resistance seconds per cell
    std::vector<std::pair<int, int>> conflicts;
    EmissionModel emissions;
    std::size_t num_pruned = 0;

    std::size_t num_cells() const { return static_cast<std::size_t>(k) * k; }
    double emission_coeff(int var, std::size_t p) const {
        const auto& c = points[static_cast<std::size_t>(var)];
        return cell_omega[static_cast<std::size_t>(c.cell)] * c.rates[p] *
               emissions.unit_factor;
    }
    double penalty_coeff(int cell, std::size_t p) const {
        return cell_omega[static_cast<std::size_t>(cell)] * emissions.upper[p] *
               emissions.unit_factor;
    }
    std::string to_json_text() const;
};

struct BuildOptions {
    bool prune_dominated = true;
    std::size_t max_candidates_per_stack = 0;  // 0 = unlimited
};

/// Assembles the integer program: maximize sum of prey values over chosen
/// points, one choice (or penalty) per stack, pairwise conflicts between
/// edge-adjacent stacks where any actuator jumps by >= delta, and one
/// accumulated-emission row per pollutant.
IlpInstance build_instance(const KOperationField& field, const Dataset& dataset,
                           const DrivingCycleWeights& weights, const Vec& deltas,
                           const EmissionModel& emissions, std::size_t fuel_measurand,
                           const BuildOptions& options = {});

enum class IlpStatus { optimal, feasible, infeasible, timeout };

struct IlpSolution {
    IlpStatus status = IlpStatus::timeout;
    std::vector<char> point_assign;
    std::vector<char> cell_assign;
    double objective = 0.0;
    double bound = 0.0;
    int violated_pollutant = -1;  // diagnostic when infeasible
    std::size_t nodes = 0;
    std::size_t lp_iterations = 0;
};

/// Branch and bound over the binaries with LP-relaxation bounding
/// (in-repo simplex), most-fractional branching, deterministic order.
IlpSolution solve(const IlpInstance& instance, double time_limit_s = 60.0);

struct VerifyReport {
    bool ok = false;
    std::size_t equality_violations = 0;
    std::size_t conflict_violations = 0;
    std::size_t drivability_violations = 0;  // re-derived from raw actuator values
    Vec emission_total;                      // accumulated per pollutant
    Vec emission_slack;                      // limit - total
    std::string detail;
};

/// Independent re-check of every stack equality, conflict pair, drivability
/// bound, and emission row for a full assignment.
VerifyReport verify_solution(const IlpInstance& instance, const std::vector<char>& point_assign,
                             const std::vector<char>& cell_assign, const Vec& deltas);

/// Solution map induced by a solved instance.
SolutionMap solution_from_ilp(const IlpInstance& instance, const IlpSolution& solution,
                              const Dataset& dataset);

}  // namespace adcal
