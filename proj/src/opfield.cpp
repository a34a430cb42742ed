#include "adcal/opfield.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace adcal {

namespace {
constexpr double kGravity = 9.81;
}

KOperationField::KOperationField(int k_, Interval freq, Interval torq)
    : k(k_), freq_range(freq), torq_range(torq) {
    if (k < 1) throw std::invalid_argument("operation field: k must be >= 1");
    if (freq_range.width() <= 0.0 || torq_range.width() <= 0.0)
        throw std::invalid_argument("operation field: degenerate ranges");
    stacks.assign(static_cast<std::size_t>(k) * k, {});
}

namespace {
int axis_cell(double v, const Interval& range, int k) {
    if (v < range.lo || v > range.hi) return -1;
    int c = static_cast<int>(std::floor((v - range.lo) / range.width() * k));
    if (c >= k) c = k - 1;  // upper boundary closed
    return c;
}
}  // namespace

int KOperationField::cell_of(double freq, double torq) const {
    const int f = axis_cell(freq, freq_range, k);
    const int t = axis_cell(torq, torq_range, k);
    if (f < 0 || t < 0) return -1;
    return cell_index(f, t);
}

int KOperationField::clamped_cell_of(double freq, double torq) const {
    const int f = axis_cell(freq_range.clamp(freq), freq_range, k);
    const int t = axis_cell(torq_range.clamp(torq), torq_range, k);
    return cell_index(f, t);
}

double KOperationField::cell_center_freq(int f) const {
    return freq_range.lo + (f + 0.5) * freq_range.width() / k;
}

double KOperationField::cell_center_torq(int t) const {
    return torq_range.lo + (t + 0.5) * torq_range.width() / k;
}

KOperationField assign_stacks(const Dataset& dataset, const std::vector<std::uint64_t>& subset,
                              int k, Interval freq_range, Interval torq_range,
                              std::size_t freq_actuator, std::size_t torq_measurand) {
    KOperationField field(k, freq_range, torq_range);
    for (std::uint64_t seq : subset) {
        const DataPoint& p = dataset[seq];
        const int cell = field.cell_of(p.u[freq_actuator], p.y[torq_measurand]);
        if (cell < 0)
            ++field.excluded;
        else
            field.stacks[cell].push_back(seq);
    }
    return field;
}

void VehicleParams::validate() const {
    if (mass_kg <= 0 || rolling_coeff <= 0 || drag_area_m2 <= 0 || air_density <= 0 ||
        wheel_radius_m <= 0 || final_drive <= 0 || gear_ratios.empty())
        throw std::invalid_argument("vehicle params must be positive");
    for (double g : gear_ratios)
        if (g <= 0) throw std::invalid_argument("vehicle params must be positive");
}

OperationalProfile OperationalProfile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile: " + path);
    OperationalProfile p;
    {
        auto slash = path.find_last_of('/');
        p.name = slash == std::string::npos ? path : path.substr(slash + 1);
    }
    std::string line;
    bool header_skipped = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_skipped) {
            header_skipped = true;  // first non-comment line is the header
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        double t, v;
        int g;
        try {
            std::getline(ss, cell, ',');
            t = std::stod(cell);
            std::getline(ss, cell, ',');
            g = std::stoi(cell);
            std::getline(ss, cell, ',');
            v = std::stod(cell);
        } catch (const std::exception&) {
            throw std::runtime_error("profile " + path + ": bad row at line " +
                                     std::to_string(lineno));
        }
        if (!p.time_s.empty() && t <= p.time_s.back())
            throw std::runtime_error("profile " + path + ": time must increase");
        if (v < 0.0) throw std::runtime_error("profile " + path + ": negative velocity");
        p.time_s.push_back(t);
        p.gear.push_back(g);
        p.velocity_kmh.push_back(v);
    }
    if (p.time_s.size() < 2) throw std::runtime_error("profile " + path + ": too short");
    return p;
}

CycleTrace profile_to_trace(const OperationalProfile& profile, const VehicleParams& params,
                            double dt) {
    params.validate();
    if (dt <= 0.0) throw std::invalid_argument("profile_to_trace: dt must be positive");

    const double t_end = profile.time_s.back();
    const std::size_t n = static_cast<std::size_t>(std::floor(t_end / dt)) + 1;

    // Piecewise-linear velocity, stepwise gear (row active until the next).
    auto velocity_at = [&](double t) {
        const auto& ts = profile.time_s;
        auto it = std::upper_bound(ts.begin(), ts.end(), t);
        if (it == ts.begin()) return profile.velocity_kmh.front();
        if (it == ts.end()) return profile.velocity_kmh.back();
        const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
        const std::size_t lo = hi - 1;
        const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
        return profile.velocity_kmh[lo] + w * (profile.velocity_kmh[hi] - profile.velocity_kmh[lo]);
    };
    auto gear_at = [&](double t) {
        const auto& ts = profile.time_s;
        auto it = std::upper_bound(ts.begin(), ts.end(), t);
        const std::size_t idx = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
        return profile.gear[idx];
    };

    std::vector<double> v_ms(n);
    std::vector<int> gears(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        v_ms[i] = velocity_at(t) / 3.6;
        gears[i] = gear_at(t);
    }

    CycleTrace trace;
    trace.dt = dt;
    trace.total_time = static_cast<double>(n) * dt;
    trace.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int g = gears[i];
        if (g < 1 || static_cast<std::size_t>(g) > params.gear_ratios.size())
            throw std::invalid_argument("profile_to_trace: unknown gear " + std::to_string(g));
        const double ratio = params.gear_ratios[static_cast<std::size_t>(g - 1)] *
                             params.final_drive;
        const double v = v_ms[i];
        const double accel = i + 1 < n ? (v_ms[i + 1] - v_ms[i]) / dt : 0.0;

        const double freq_rpm = v / (2.0 * M_PI * params.wheel_radius_m) * ratio * 60.0;
        const double wheel_force = params.mass_kg * accel +
                                   params.mass_kg * kGravity * params.rolling_coeff +
                                   0.5 * params.air_density * params.drag_area_m2 * v * v;
        const double torque = wheel_force * params.wheel_radius_m / ratio;
        trace.samples.emplace_back(freq_rpm, torque);
        trace.distance_km += v * dt / 1000.0;
    }
    return trace;
}

DrivingCycleWeights trace_to_weights(const CycleTrace& trace, const KOperationField& field,
                                     const std::string& cycle_name) {
    DrivingCycleWeights w;
    w.cycle_name = cycle_name;
    w.omega.assign(field.stacks.size(), 0.0);
    for (const auto& [freq, torq] : trace.samples)
        w.omega[static_cast<std::size_t>(field.clamped_cell_of(freq, torq))] += trace.dt;
    w.total_time = trace.total_time;
    w.distance_km = trace.distance_km;
    return w;
}

}  // namespace adcal
