#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adcal/types.hpp"

namespace adcal {

/// One controllable input of the engine. An actuator whose interval has
/// zero width is static for the current run.
struct ActuatorSpec {
    std::string name;
    std::string unit;
    Interval range;

    bool is_static() const { return range.degenerate(); }
};

/// One sensed output with its interval of noncritical values.
struct MeasurandSpec {
    std::string name;
    std::string unit;
    Interval noncritical;
};

/// Nonsmooth term added to one measurand:
///   amplitude * max(0, sum_i coeffs[i] * z_i - offset)
/// where z is the actuator vector in reference-normalized coordinates.
/// The locus { z : coeffs . z == offset } is where second-order fits fail.
struct RidgeSpec {
    std::size_t measurand = 0;
    double amplitude = 0.0;
    Vec coeffs;  // one per actuator, reference-normalized
    double offset = 0.0;

    double hinge_arg(const Vec& z) const {
        double s = -offset;
        for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * z[i];
        return s;
    }
};

struct EngineConfig {
    int schema_version = 1;
    std::vector<ActuatorSpec> actuators;    // m >= 8, fixed order RF..PT
    std::vector<MeasurandSpec> measurands;  // n >= 14
    std::vector<RidgeSpec> ridges;
    Vec lag_alpha;  // per measurand, 1.0 = lag disabled

    static EngineConfig defaults();
    static EngineConfig from_json_text(const std::string& text);
    static EngineConfig load(const std::string& path);
    std::string to_json_text() const;
    void save(const std::string& path) const;

    std::size_t actuator_index(const std::string& name) const;
    std::size_t measurand_index(const std::string& name) const;
    std::vector<std::size_t> dynamic_axes() const;
};

// Fixed actuator order used by the response formulas.
enum ActuatorId : std::size_t { RF = 0, IF, RP, AF, TG, MT, PI, PT, kNumActuators };

// Fixed measurand order.
enum MeasurandId : std::size_t {
    M_TORQUE = 0,
    M_FUEL_FLOW,
    M_CO,
    M_HC,
    M_NOX,
    M_SOOT,
    M_CO_PPM,
    M_HC_PPM,
    M_NOX_PPM,
    M_SOOT_PPM,
    M_IMEP,
    M_LAMBDA,
    M_MANIFOLD_PRESSURE,
    M_BOOST_PRESSURE,
    M_MAX_CYL_PRESSURE,
    M_MANIFOLD_TEMP,
    M_CRITICAL_TEMP,
    M_SFC,
    kNumMeasurands
};

/// Evaluation oracle standing in for the test bench. Deterministic ideal
/// response plus an optional per-measurand first-order lag
///   y_t = alpha * F(u_t) + (1 - alpha) * y_{t-1}
/// that emulates observables with pronounced latency. Single writer:
/// evaluate() mutates the lag state, so one campaign owns one oracle.
class EngineOracle {
public:
    explicit EngineOracle(EngineConfig cfg);

    const EngineConfig& config() const { return cfg_; }
    std::size_t num_actuators() const { return cfg_.actuators.size(); }
    std::size_t num_measurands() const { return cfg_.measurands.size(); }

    std::size_t freq_index() const { return RF; }
    std::size_t torque_index() const { return M_TORQUE; }
    std::size_t fuel_index() const { return M_FUEL_FLOW; }

    bool in_domain(const Vec& u) const;
    bool in_range(const Vec& y) const;

    /// Measured value at u (lag-filtered). Throws std::domain_error when any
    /// coordinate leaves its interval; a rejected input changes no state.
    Vec evaluate(const Vec& u);

    /// Ideal response F(u): no domain check, no lag, no counting.
    Vec response(const Vec& u) const;

    void reset_lag() { lag_state_.reset(); }
    bool has_lagged_measurands() const;
    const Vec& lag_alpha() const { return cfg_.lag_alpha; }

    std::uint64_t evaluations() const { return eval_count_; }

    /// Actuator vector mapped to reference-normalized coordinates
    /// (Table-2-style full ranges, independent of the run's intervals).
    static Vec reference_normalize(const Vec& u);

private:
    EngineConfig cfg_;
    std::optional<Vec> lag_state_;
    std::uint64_t eval_count_ = 0;
};

}  // namespace adcal
