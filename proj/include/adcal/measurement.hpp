#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adcal/engine_model.hpp"
#include "adcal/planner.hpp"
#include "adcal/types.hpp"

namespace adcal {

/// An actuator setting paired with its measured outputs.
struct DataPoint {
    Vec u;
    Vec y;
    std::uint64_t seq = 0;  // global measurement ordinal
};

struct Dataset {
    std::vector<DataPoint> points;

    std::uint64_t append(Vec u, Vec y) {
        const std::uint64_t seq = points.size();
        points.push_back({std::move(u), std::move(y), seq});
        return seq;
    }
    std::size_t size() const { return points.size(); }
    const DataPoint& operator[](std::size_t i) const { return points[i]; }
};

struct MeasurementParams {
    Vec relevance_thresholds;      // per measurand, absolute
    int min_frequency_gap = 4;     // store after this many consecutive omissions
    double safety_margin_frac = 0.05;
    int predict_horizon = 3;
};

enum class PointAction { stored, skipped, aborted_critical, aborted_predicted };

struct MeasurementEvent {
    std::size_t ramp;
    int index;  // position within the ramp
    Vec u;
    PointAction action;
};

struct RampOutcome {
    std::vector<std::uint64_t> stored;  // sequence numbers
    bool aborted = false;
    std::optional<Vec> abort_point;
};

struct PlanExecution {
    std::vector<RampOutcome> ramps;
    bool aborted = false;
    std::optional<Vec> abort_point;
    std::optional<Vec> last_valid;  // where the driver continues from
    std::vector<std::uint64_t> stored;
    std::vector<MeasurementEvent> events;
    std::uint64_t evaluations = 0;
};

/// True iff |y_new[j] - y_last[j]| >= threshold[j] for at least one j.
bool relevance_filter(const Vec& y_new, const Vec& y_last_stored, const Vec& thresholds);

/// Linear extrapolation of each lagged measurand over `horizon` steps; true
/// if it exits the noncritical interval shrunk by the safety margin.
/// `history` holds the most recent measurements, oldest first.
bool predict_critical(const std::vector<Vec>& history, const Vec& lag_alpha,
                      const std::vector<MeasurandSpec>& measurands, double margin_frac,
                      int horizon);

/// Runs every ramp of the plan against the oracle. Points are stored when
/// they pass the relevance filter or the minimal measurement frequency rule;
/// a critical (or predicted-critical) value aborts the whole plan. The
/// optional hook fires right after each point is stored.
PlanExecution execute_plan(const MeasurementPlan& plan, EngineOracle& oracle, Dataset& dataset,
                           const MeasurementParams& params,
                           const std::function<void(std::uint64_t)>& on_stored = nullptr,
                           std::uint64_t max_evaluations = UINT64_MAX);

}  // namespace adcal
