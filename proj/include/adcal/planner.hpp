#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adcal/grid.hpp"
#include "adcal/rng.hpp"
#include "adcal/types.hpp"

namespace adcal {

/// Prospective measurement route: one waypoint per box on the shortest path,
/// consecutive waypoints joined by a measurement ramp of `ell` points.
struct MeasurementPlan {
    std::vector<int> path_boxes;  // B_0 .. B_s
    std::vector<Vec> waypoints;   // u^M .. u^{M+s}, physical coordinates
    int ell = 0;

    std::size_t num_ramps() const { return waypoints.empty() ? 0 : waypoints.size() - 1; }
    std::string to_json_text() const;
};

/// Box drawn with probability w(B) / sum of node weights.
int sample_target_box(const AdaptiveGrid& grid, Rng& rng);

/// Minimum-edge-weight path via Dijkstra; from == to gives the singleton.
std::vector<int> shortest_path(const AdaptiveGrid& grid, int from, int to);

/// { u^q + i * (u^r - u^q) / (ell - 1) : i = 0..ell-1 }, endpoints exact.
std::vector<Vec> build_ramp(const Vec& uq, const Vec& ur, int ell);

/// Full plan: start at last_point's box (or a uniformly random domain point),
/// route to a weight-sampled target, one uniform waypoint per path box.
/// `full_domain` supplies every actuator interval; static axes stay at their
/// fixed value.
MeasurementPlan make_plan(const AdaptiveGrid& grid, const std::optional<Vec>& last_point,
                          int ell, Rng& rng, const std::vector<Interval>& full_domain);

}  // namespace adcal
