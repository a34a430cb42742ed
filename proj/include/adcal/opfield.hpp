#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adcal/measurement.hpp"
#include "adcal/types.hpp"

namespace adcal {

/// The operation field discretized into k x k congruent rectangles.
/// Cell (f, t) covers the f-th frequency column and t-th torque row,
/// half-open except along the upper boundary. Linear index = f * k + t.
struct KOperationField {
    int k = 0;
    Interval freq_range;
    Interval torq_range;
    std::vector<std::vector<std::uint64_t>> stacks;  // k*k lists of sequence numbers
    std::size_t excluded = 0;                        // points outside OP

    KOperationField() = default;
    KOperationField(int k_, Interval freq, Interval torq);

    int cell_index(int f, int t) const { return f * k + t; }
    /// Cell containing the pair, or -1 when outside OP.
    int cell_of(double freq, double torq) const;
    /// Cell with the pair clamped onto OP (never -1).
    int clamped_cell_of(double freq, double torq) const;
    double cell_center_freq(int f) const;
    double cell_center_torq(int t) const;
};

/// Partitions the given points into stacks by (u_freq, y_torq).
KOperationField assign_stacks(const Dataset& dataset, const std::vector<std::uint64_t>& subset,
                              int k, Interval freq_range, Interval torq_range,
                              std::size_t freq_actuator, std::size_t torq_measurand);

struct VehicleParams {
    double mass_kg = 1400.0;
    double rolling_coeff = 0.012;
    double drag_area_m2 = 0.65;  // c_d * A
    double air_density = 1.20;   // kg/m^3
    double wheel_radius_m = 0.31;
    double final_drive = 3.9;
    std::vector<double> gear_ratios = {3.5, 2.1, 1.4, 1.0, 0.8};

    void validate() const;
};

/// Operational profile: time series of (gear, velocity). Text format:
/// one header line, then comma-separated rows time_s,gear,velocity_kmh.
struct OperationalProfile {
    std::string name;
    std::vector<double> time_s;
    std::vector<int> gear;
    std::vector<double> velocity_kmh;

    static OperationalProfile load(const std::string& path);
};

/// Uniformly resampled (frequency, torque) trace derived from a profile via
/// the vehicle's longitudinal dynamics.
struct CycleTrace {
    std::vector<std::pair<double, double>> samples;  // (rpm, Nm)
    double dt = 1.0;
    double total_time = 0.0;
    double distance_km = 0.0;
};

CycleTrace profile_to_trace(const OperationalProfile& profile, const VehicleParams& params,
                            double dt);

/// Resistance times per rectangle; out-of-range samples are attributed to
/// the nearest boundary cell so the total time is conserved.
struct DrivingCycleWeights {
    std::vector<double> omega;  // k*k seconds
    std::string cycle_name;
    double total_time = 0.0;
    double distance_km = 0.0;

    std::size_t coverage() const {
        std::size_t c = 0;
        for (double w : omega)
            if (w > 0.0) ++c;
        return c;
    }
};

DrivingCycleWeights trace_to_weights(const CycleTrace& trace, const KOperationField& field,
                                     const std::string& cycle_name = "");

}  // namespace adcal
