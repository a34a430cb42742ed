#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "adcal/engine_model.hpp"
#include "adcal/grid.hpp"
#include "adcal/measurement.hpp"
#include "adcal/opfield.hpp"
#include "adcal/solution_map.hpp"
#include "adcal/types.hpp"

namespace adcal {

/// Interpolation points needed by a full quadratic in `dim` variables.
constexpr std::size_t quadratic_fit_size(std::size_t dim) {
    return (dim + 1) * (dim + 2) / 2;
}

struct NeighborQueryStats {
    std::size_t distance_evals = 0;
    std::size_t comparisons = 0;
};

/// Positions of the n_select points closest to points[query] (squared
/// Euclidean distance, ties by lower index), via the two-sweep selection:
/// one sweep computing distances, a selection of the n-th smallest, and one
/// sweep gathering the winners. No full sort.
std::vector<int> nearest_neighbors(const std::vector<Vec>& points, std::size_t query,
                                   std::size_t n_select, NeighborQueryStats* stats = nullptr);

/// Local polynomial fit of total degree <= 2, exact on its interpolation
/// points when they are poised.
struct LocalFit {
    std::size_t dim = 0;
    Vec shift;          // site centroid, subtracted before the basis
    double scale = 1.0; // site radius, divides the shifted coordinates
    std::vector<Vec> coeffs;  // per output column, over the quadratic basis
    bool poised = false;
    bool approximate = false;  // least-squares over an expanded neighbor set

    Vec evaluate(const Vec& x) const;
    double evaluate_one(const Vec& x, std::size_t col) const;
};

/// Fits all output columns at once. sites.size() == quadratic_fit_size(dim)
/// requests exact interpolation (poised flags the result); more sites give a
/// least-squares fit marked approximate.
LocalFit newton_fit(const std::vector<Vec>& sites, const std::vector<Vec>& values,
                    std::size_t dim);

struct RefineDecision {
    bool fitted = false;
    bool split = false;
    bool approximate = false;
    Vec residual;  // per measurand, when fitted
};

/// Step V: compare the local fit at a reduced-set point against its measured
/// value; split the containing box symmetrically when any finite threshold
/// is exceeded. Boxes at or below `min_unit_edge` are left alone.
RefineDecision refine_symmetric_if_needed(AdaptiveGrid& grid, const Dataset& dataset,
                                          const std::vector<std::uint64_t>& reduced,
                                          std::uint64_t q_seq, const Vec& thresholds,
                                          double min_unit_edge = 0.0);

struct CrossMeasureResult {
    std::size_t axis = 0;   // dynamic-axis index with the biggest impact
    bool split_applied = false;
    std::uint64_t evaluations = 0;
};

/// Step VI: probe each dynamic actuator around uM (clamped to the domain,
/// one-sided at boundaries) and split the containing box along the axis with
/// the biggest impact on pollutant `p`. Returns nothing when a probe leaves
/// the noncritical range.
std::optional<CrossMeasureResult> cross_measure_and_refine(AdaptiveGrid& grid,
                                                           EngineOracle& oracle, const Vec& uM,
                                                           std::size_t pollutant,
                                                           const Vec& probe_steps,
                                                           double min_unit_edge = 0.0);

struct GapFillReport {
    std::size_t filled_interior = 0;
    std::size_t filled_boundary = 0;
    std::vector<int> remaining;  // cell indices still empty
};

/// Fills empty interior cells by quadratic interpolation over data points
/// from neighboring stacks and boundary cells by linear secant extrapolation
/// from the two nearest populated cells along the inward direction. Filled
/// entries are flagged synthetic.
GapFillReport fill_gaps(SolutionMap& solution, const KOperationField& field,
                        const Dataset& dataset, const std::vector<std::uint64_t>& reduced,
                        std::size_t freq_actuator, std::size_t torq_measurand);

}  // namespace adcal
