#include "adcal/engine_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace adcal {

namespace {

using nlohmann::json;

// Reference ranges for normalized coordinates. These are a fixed property of
// the model (the physics does not change when a run narrows its window).
constexpr std::array<double, kNumActuators> kRefLo = {1000.0, 6.0,  295677.0, 275.0,
                                                      30.0,   0.0,  1.0,      1540.0};
constexpr std::array<double, kNumActuators> kRefHi = {2600.0, 60.0, 1126537.0, 991.0,
                                                      85.0,   10.0, 1.0,       2565.0};

constexpr double kDieselDensity = 0.832;  // mg per mm^3
constexpr double kStoichRatio = 14.5;

const std::array<const char*, kNumActuators> kActuatorNames = {"RF", "IF", "RP", "AF",
                                                               "TG", "MT", "PI", "PT"};
const std::array<const char*, kNumActuators> kActuatorUnits = {
    "1/min", "mm3/cycle", "hPa", "mg/stroke", "int", "degCA", "mm3/cycle", "us"};

struct MeasurandDef {
    const char* name;
    const char* unit;
    double lo;
    double hi;
};

const std::array<MeasurandDef, kNumMeasurands> kMeasurandDefs = {{
    {"torque", "Nm", -60.0, 300.0},
    {"fuel_flow", "g/h", 1.0, 5000.0},
    {"co", "g/h", 0.0, 17.0},
    {"hc", "g/h", 0.0, 5.0},
    {"nox", "g/h", 0.0, 55.0},
    {"soot", "g/h", 0.0, 6.0},
    {"co_ppm", "ppm", 0.0, 2200.0},
    {"hc_ppm", "ppm", 0.0, 800.0},
    {"nox_ppm", "ppm", 0.0, 7000.0},
    {"soot_ppm", "ppm", 0.0, 700.0},
    {"imep", "bar", 0.0, 25.0},
    {"lambda", "-", 0.15, 20.0},
    {"manifold_pressure", "hPa", 800.0, 3200.0},
    {"boost_pressure", "hPa", 0.0, 2600.0},
    {"max_cylinder_pressure", "bar", 0.0, 160.0},
    {"manifold_temperature", "K", 250.0, 420.0},
    {"critical_temperature", "K", 400.0, 1150.0},
    {"sfc", "g/kWh", 0.0, 400.0},
}};

}  // namespace

EngineConfig EngineConfig::defaults() {
    EngineConfig cfg;
    for (std::size_t a = 0; a < kNumActuators; ++a) {
        cfg.actuators.push_back(
            {kActuatorNames[a], kActuatorUnits[a], Interval(kRefLo[a], kRefHi[a])});
    }
    for (const auto& d : kMeasurandDefs) {
        cfg.measurands.push_back({d.name, d.unit, Interval(d.lo, d.hi)});
    }
    cfg.lag_alpha.assign(kNumMeasurands, 1.0);

    auto ridge = [](std::size_t m, double amp, std::initializer_list<std::pair<std::size_t, double>> cs,
                    double offset) {
        RidgeSpec r;
        r.measurand = m;
        r.amplitude = amp;
        r.coeffs.assign(kNumActuators, 0.0);
        for (auto [a, c] : cs) r.coeffs[a] = c;
        r.offset = offset;
        return r;
    };
    // Combustion resonance band at mid-high revolution frequency.
    cfg.ridges.push_back(ridge(M_NOX, 40.0, {{RF, 1.0}}, 0.55));
    // Smoke limit kink once the mixture turns rich.
    cfg.ridges.push_back(ridge(M_SOOT, 6.0, {{IF, 0.8}, {AF, -1.0}}, 0.25));
    // Incomplete combustion at low boost.
    cfg.ridges.push_back(ridge(M_CO, 14.0, {{TG, -1.0}, {RP, -0.35}}, -0.55));
    // Exhaust flames with big, late injection.
    cfg.ridges.push_back(ridge(M_CRITICAL_TEMP, 240.0, {{MT, 1.0}, {IF, 1.0}}, 1.55));
    return cfg;
}

std::size_t EngineConfig::actuator_index(const std::string& name) const {
    for (std::size_t i = 0; i < actuators.size(); ++i)
        if (actuators[i].name == name) return i;
    throw std::invalid_argument("unknown actuator: " + name);
}

std::size_t EngineConfig::measurand_index(const std::string& name) const {
    for (std::size_t i = 0; i < measurands.size(); ++i)
        if (measurands[i].name == name) return i;
    throw std::invalid_argument("unknown measurand: " + name);
}

std::vector<std::size_t> EngineConfig::dynamic_axes() const {
    std::vector<std::size_t> axes;
    for (std::size_t i = 0; i < actuators.size(); ++i)
        if (!actuators[i].is_static()) axes.push_back(i);
    return axes;
}

EngineConfig EngineConfig::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    EngineConfig cfg = defaults();
    if (j.contains("schema_version")) cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
        throw std::runtime_error("engine config: unsupported schema_version");

    if (j.contains("actuators")) {
        for (const auto& ja : j.at("actuators")) {
            const auto idx = cfg.actuator_index(ja.at("name").get<std::string>());
            auto& a = cfg.actuators[idx];
            if (ja.contains("unit")) a.unit = ja.at("unit").get<std::string>();
            if (ja.contains("value")) {
                const double v = ja.at("value").get<double>();
                a.range = Interval(v, v);
            } else {
                a.range = Interval(ja.at("lo").get<double>(), ja.at("hi").get<double>());
            }
        }
    }
    if (j.contains("measurands")) {
        for (const auto& jm : j.at("measurands")) {
            const auto idx = cfg.measurand_index(jm.at("name").get<std::string>());
            auto& m = cfg.measurands[idx];
            if (jm.contains("unit")) m.unit = jm.at("unit").get<std::string>();
            m.noncritical = Interval(jm.at("lo").get<double>(), jm.at("hi").get<double>());
        }
    }
    if (j.contains("ridges")) {
        cfg.ridges.clear();
        for (const auto& jr : j.at("ridges")) {
            RidgeSpec r;
            r.measurand = cfg.measurand_index(jr.at("measurand").get<std::string>());
            r.amplitude = jr.at("amplitude").get<double>();
            r.offset = jr.at("offset").get<double>();
            r.coeffs.assign(cfg.actuators.size(), 0.0);
            for (const auto& [name, c] : jr.at("coeffs").items())
                r.coeffs[cfg.actuator_index(name)] = c.get<double>();
            cfg.ridges.push_back(std::move(r));
        }
    }
    if (j.contains("lag_alpha")) {
        for (const auto& [name, a] : j.at("lag_alpha").items()) {
            const double alpha = a.get<double>();
            if (alpha <= 0.0 || alpha > 1.0)
                throw std::runtime_error("engine config: lag alpha must be in (0, 1]");
            cfg.lag_alpha[cfg.measurand_index(name)] = alpha;
        }
    }
    return cfg;
}

std::string EngineConfig::to_json_text() const {
    json j;
    j["schema_version"] = schema_version;
    for (const auto& a : actuators) {
        json ja{{"name", a.name}, {"unit", a.unit}};
        if (a.is_static()) {
            ja["value"] = a.range.lo;
        } else {
            ja["lo"] = a.range.lo;
            ja["hi"] = a.range.hi;
        }
        j["actuators"].push_back(ja);
    }
    for (const auto& m : measurands) {
        j["measurands"].push_back(
            {{"name", m.name}, {"unit", m.unit}, {"lo", m.noncritical.lo}, {"hi", m.noncritical.hi}});
    }
    for (const auto& r : ridges) {
        json coeffs = json::object();
        for (std::size_t a = 0; a < r.coeffs.size(); ++a)
            if (r.coeffs[a] != 0.0) coeffs[actuators[a].name] = r.coeffs[a];
        j["ridges"].push_back({{"measurand", measurands[r.measurand].name},
                               {"amplitude", r.amplitude},
                               {"coeffs", coeffs},
                               {"offset", r.offset}});
    }
    json lag = json::object();
    for (std::size_t m = 0; m < lag_alpha.size(); ++m)
        if (lag_alpha[m] != 1.0) lag[measurands[m].name] = lag_alpha[m];
    if (!lag.empty()) j["lag_alpha"] = lag;
    return j.dump(2);
}

EngineConfig EngineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open engine config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

void EngineConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write engine config: " + path);
    out << to_json_text() << "\n";
}

EngineOracle::EngineOracle(EngineConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.actuators.size() != kNumActuators)
        throw std::invalid_argument("engine model expects exactly 8 actuators");
    for (std::size_t a = 0; a < kNumActuators; ++a)
        if (cfg_.actuators[a].name != kActuatorNames[a])
            throw std::invalid_argument("actuator order must be RF, IF, RP, AF, TG, MT, PI, PT");
    if (cfg_.measurands.size() != kNumMeasurands)
        throw std::invalid_argument("engine model expects exactly 18 measurands");
    if (cfg_.lag_alpha.size() != kNumMeasurands)
        throw std::invalid_argument("lag_alpha size mismatch");
    for (const auto& r : cfg_.ridges) {
        if (r.measurand >= kNumMeasurands || r.coeffs.size() != kNumActuators)
            throw std::invalid_argument("bad ridge spec");
    }
}

Vec EngineOracle::reference_normalize(const Vec& u) {
    Vec z(kNumActuators);
    for (std::size_t a = 0; a < kNumActuators; ++a) {
        const double w = kRefHi[a] - kRefLo[a];
        z[a] = w > 0.0 ? (u[a] - kRefLo[a]) / w : 0.0;
    }
    return z;
}

bool EngineOracle::in_domain(const Vec& u) const {
    if (u.size() != cfg_.actuators.size()) return false;
    for (std::size_t a = 0; a < u.size(); ++a)
        if (!cfg_.actuators[a].range.contains(u[a])) return false;
    return true;
}

bool EngineOracle::in_range(const Vec& y) const {
    if (y.size() != cfg_.measurands.size()) return false;
    for (std::size_t m = 0; m < y.size(); ++m)
        if (!cfg_.measurands[m].noncritical.contains(y[m])) return false;
    return true;
}

bool EngineOracle::has_lagged_measurands() const {
    return std::any_of(cfg_.lag_alpha.begin(), cfg_.lag_alpha.end(),
                       [](double a) { return a < 1.0; });
}

Vec EngineOracle::response(const Vec& u) const {
    const Vec z = reference_normalize(u);
    const double zrf = z[RF], zif = z[IF], zrp = z[RP], zaf = z[AF];
    const double ztg = z[TG], zmt = z[MT];
    const double amount_if = u[IF], amount_pi = u[PI], rf = u[RF], af = u[AF];

    Vec y(kNumMeasurands, 0.0);

    const double eff = (0.74 + 0.24 * zrf * (1.0 - zrf)) * (1.0 - 0.10 * sq(zmt - 0.4)) *
                       (1.0 + 0.05 * zrp) * (1.0 - 0.08 * zaf);
    const double drag = 8.0 + 7.0 * zrf;
    const double torque = 4.6 * amount_if * eff - drag;
    y[M_TORQUE] = torque;

    // 4-stroke: RF/2 cycles per minute.
    const double cycles_per_hour = 30.0 * rf;
    const double fuel = (amount_if + amount_pi) * kDieselDensity * cycles_per_hour / 1000.0;
    y[M_FUEL_FLOW] = fuel;

    const double burn_temp = 0.2 + 0.6 * zif + 0.3 * zmt + 0.15 * zrp - 0.55 * zaf + 0.1 * ztg;
    y[M_NOX] = 15.0 * (0.05 + sq(burn_temp)) * (0.65 + 0.35 * zrf) * (1.3 - 0.9 * zaf);

    const double richness = zif - 0.8 * zaf + 0.15;
    y[M_CO] = 6.0 * (0.10 + 0.9 * sq(richness)) * (0.55 + 0.45 * zrf);

    y[M_HC] = 3.2 * (0.12 + 0.55 * sq(0.75 - zrp) +
                     0.30 * (1.0 - zmt) * (0.35 + 0.65 * (1.0 - zrf)));

    const double soot_rich = 0.85 * zif - zaf + 0.18;
    y[M_SOOT] = 2.4 * (0.06 + 0.75 * sq(soot_rich)) * (0.6 + 0.4 * zrf);

    const double crit_temp =
        585.0 + 310.0 * zif + 150.0 * zmt * zif + 55.0 * (1.0 - zrp) * zif - 85.0 * zaf;
    y[M_CRITICAL_TEMP] = crit_temp;

    for (const auto& r : cfg_.ridges) {
        const double h = r.hinge_arg(z);
        if (h > 0.0) y[r.measurand] += r.amplitude * h;
    }

    const double exhaust_kgph =
        rf * 30.0 * (af + kDieselDensity * (amount_if + amount_pi)) / 1.0e6;
    y[M_CO_PPM] = y[M_CO] / exhaust_kgph * 1000.0;
    y[M_HC_PPM] = y[M_HC] / exhaust_kgph * 1000.0;
    y[M_NOX_PPM] = y[M_NOX] / exhaust_kgph * 1000.0;
    y[M_SOOT_PPM] = y[M_SOOT] / exhaust_kgph * 1000.0;

    y[M_IMEP] = 1.0 + 0.082 * (torque + drag);
    y[M_LAMBDA] = af / (kStoichRatio * kDieselDensity * (amount_if + amount_pi));

    const double boost = 150.0 + 1900.0 * ztg * (0.25 + 0.75 * zrf) + 150.0 * zrp +
                         100.0 * zif * zrf;
    y[M_BOOST_PRESSURE] = boost;
    y[M_MANIFOLD_PRESSURE] = 980.0 + 0.85 * boost;
    y[M_MAX_CYL_PRESSURE] =
        42.0 + 68.0 * zif + 26.0 * zrp + 22.0 * zmt * (0.3 + 0.7 * zif) + 0.009 * boost;
    y[M_MANIFOLD_TEMP] = 295.0 + 55.0 * ztg * (0.3 + 0.7 * zrf) + 18.0 * zrp + 8.0 * zif;

    const double power_kw = torque * rf * 2.0 * M_PI / 60.0 / 1000.0;
    y[M_SFC] = fuel / std::sqrt(sq(power_kw) + 2.25);

    return y;
}

Vec EngineOracle::evaluate(const Vec& u) {
    if (u.size() != cfg_.actuators.size())
        throw std::domain_error("evaluate: actuator vector has wrong size");
    for (std::size_t a = 0; a < u.size(); ++a) {
        if (!cfg_.actuators[a].range.contains(u[a]))
            throw std::domain_error("evaluate: actuator " + cfg_.actuators[a].name +
                                    " outside its interval");
    }
    Vec ideal = response(u);
    ++eval_count_;
    if (!lag_state_.has_value()) {
        lag_state_ = ideal;
        return ideal;
    }
    Vec& prev = *lag_state_;
    for (std::size_t m = 0; m < ideal.size(); ++m) {
        const double a = cfg_.lag_alpha[m];
        prev[m] = a * ideal[m] + (1.0 - a) * prev[m];
    }
    return prev;
}

}  // namespace adcal
