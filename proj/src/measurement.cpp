#include "adcal/measurement.hpp"

#include <cmath>
#include <stdexcept>

namespace adcal {

bool relevance_filter(const Vec& y_new, const Vec& y_last_stored, const Vec& thresholds) {
    for (std::size_t j = 0; j < y_new.size(); ++j)
        if (std::abs(y_new[j] - y_last_stored[j]) >= thresholds[j]) return true;
    return false;
}

bool predict_critical(const std::vector<Vec>& history, const Vec& lag_alpha,
                      const std::vector<MeasurandSpec>& measurands, double margin_frac,
                      int horizon) {
    if (history.size() < 2) return false;
    const Vec& prev = history[history.size() - 2];
    const Vec& last = history.back();
    for (std::size_t j = 0; j < measurands.size(); ++j) {
        if (lag_alpha[j] >= 1.0) continue;  // only observables with latency
        const double slope = last[j] - prev[j];
        const double predicted = last[j] + slope * horizon;
        const Interval& iv = measurands[j].noncritical;
        const double margin = margin_frac * iv.width();
        if (predicted < iv.lo + margin || predicted > iv.hi - margin) return true;
    }
    return false;
}

PlanExecution execute_plan(const MeasurementPlan& plan, EngineOracle& oracle, Dataset& dataset,
                           const MeasurementParams& params,
                           const std::function<void(std::uint64_t)>& on_stored,
                           std::uint64_t max_evaluations) {
    if (params.relevance_thresholds.size() != oracle.num_measurands())
        throw std::invalid_argument("execute_plan: relevance threshold size mismatch");
    if (params.min_frequency_gap < 1)
        throw std::invalid_argument("execute_plan: min_frequency_gap must be >= 1");

    PlanExecution exec;
    Vec last_stored_y;
    std::vector<Vec> history;  // for latency extrapolation, within this plan
    const bool watch_latency = oracle.has_lagged_measurands();

    for (std::size_t r = 0; r + 1 < plan.waypoints.size(); ++r) {
        const std::vector<Vec> ramp = build_ramp(plan.waypoints[r], plan.waypoints[r + 1], plan.ell);
        RampOutcome outcome;
        int last_stored_index = 0;
        for (int i = 0; i < plan.ell; ++i) {
            if (exec.evaluations >= max_evaluations) {
                outcome.aborted = true;
                exec.aborted = true;
                break;
            }
            const Vec& u = ramp[static_cast<std::size_t>(i)];
            Vec y;
            try {
                y = oracle.evaluate(u);
            } catch (const std::domain_error&) {
                // should be impossible for in-box ramps
                outcome.aborted = true;
                outcome.abort_point = u;
                exec.aborted = true;
                exec.abort_point = u;
                exec.events.push_back({r, i, u, PointAction::aborted_critical});
                break;
            }
            ++exec.evaluations;

            if (!oracle.in_range(y)) {
                outcome.aborted = true;
                outcome.abort_point = u;
                exec.aborted = true;
                exec.abort_point = u;
                exec.events.push_back({r, i, u, PointAction::aborted_critical});
                break;
            }

            bool store = (i == 0);  // the ramp's first point anchors the filter
            if (!store && relevance_filter(y, last_stored_y, params.relevance_thresholds))
                store = true;
            if (!store && i - last_stored_index >= params.min_frequency_gap) store = true;

            if (store) {
                const std::uint64_t seq = dataset.append(u, y);
                outcome.stored.push_back(seq);
                exec.stored.push_back(seq);
                last_stored_y = y;
                last_stored_index = i;
                exec.events.push_back({r, i, u, PointAction::stored});
                if (on_stored) on_stored(seq);
            } else {
                exec.events.push_back({r, i, u, PointAction::skipped});
            }
            exec.last_valid = u;

            if (watch_latency) {
                history.push_back(y);
                if (history.size() > 2) history.erase(history.begin());
                if (predict_critical(history, oracle.lag_alpha(), oracle.config().measurands,
                                     params.safety_margin_frac, params.predict_horizon)) {
                    outcome.aborted = true;
                    outcome.abort_point = u;
                    exec.aborted = true;
                    exec.abort_point = u;
                    exec.events.push_back({r, i, u, PointAction::aborted_predicted});
                    break;
                }
            }
        }
        exec.ramps.push_back(std::move(outcome));
        if (exec.aborted) break;
    }
    return exec;
}

}  // namespace adcal
