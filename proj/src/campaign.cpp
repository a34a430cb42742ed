#include "adcal/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "adcal/cleaning.hpp"
#include "adcal/interpolation.hpp"
#include "adcal/planner.hpp"
#include "adcal/rng.hpp"
#include "json.hpp"

namespace adcal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base_dir) / path).string();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct Fnv1a64 {
    std::uint64_t h = 1469598103934665603ULL;
    void update(const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    }
};

std::string dataset_line(const DataPoint& p) {
    json j;
    j["seq"] = p.seq;
    j["u"] = p.u;
    j["y"] = p.y;
    return j.dump();
}

}  // namespace

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    Fnv1a64 h;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h.update(std::string(buf, static_cast<std::size_t>(in.gcount())));
    return h.h;
}

std::vector<EuroLimits> load_euro_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open emission limit table: " + path);
    std::vector<EuroLimits> table;
    std::string line;
    std::vector<std::string> columns;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (columns.empty()) {
            columns = cells;  // header: norm,<name>_mg_per_km,...
            continue;
        }
        EuroLimits row;
        row.norm = cells.at(0);
        for (std::size_t i = 1; i < cells.size(); ++i) {
            std::string name = columns.at(i);
            const auto suffix = name.find("_mg_per_km");
            if (suffix != std::string::npos) name = name.substr(0, suffix);
            row.mg_per_km[name] = std::stod(cells[i]);
        }
        table.push_back(std::move(row));
    }
    if (table.empty()) throw std::runtime_error("empty emission limit table: " + path);
    return table;
}

CampaignConfig CampaignConfig::load(const std::string& path) {
    return from_json_text(read_file(path), fs::path(path).parent_path().string());
}

CampaignConfig CampaignConfig::from_json_text(const std::string& text,
                                              const std::string& base_dir) {
    json j = json::parse(text);
    CampaignConfig cfg;
    if (j.contains("schema_version")) cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
        throw std::runtime_error("campaign config: unsupported schema_version");
    cfg.name = j.value("name", std::string("campaign"));

    if (j.at("engine").is_string()) {
        const std::string engine_text =
            read_file(resolve(base_dir, j.at("engine").get<std::string>()));
        cfg.engine = EngineConfig::from_json_text(engine_text);
        j["engine"] = json::parse(engine_text);  // keep snapshots path-independent
    } else {
        cfg.engine = EngineConfig::from_json_text(j.at("engine").dump());
    }

    if (j.contains("actuator_overrides")) {
        for (const auto& jo : j.at("actuator_overrides")) {
            auto& a = cfg.engine.actuators[cfg.engine.actuator_index(
                jo.at("name").get<std::string>())];
            if (jo.contains("value")) {
                const double v = jo.at("value").get<double>();
                a.range = Interval(v, v);
            } else {
                a.range = Interval(jo.at("lo").get<double>(), jo.at("hi").get<double>());
            }
        }
    }

    cfg.k = j.value("k", 8);
    cfg.ell = j.value("ell", 10);
    cfg.initial_subdivisions = j.value("initial_subdivisions", 2);
    if (cfg.k < 2) throw std::runtime_error("campaign config: k must be >= 2");
    if (cfg.ell < 2) throw std::runtime_error("campaign config: ell must be >= 2");

    if (j.contains("op")) {
        const auto& jo = j.at("op");
        cfg.op_freq = Interval(jo.at("freq_lo").get<double>(), jo.at("freq_hi").get<double>());
        cfg.op_torq = Interval(jo.at("torq_lo").get<double>(), jo.at("torq_hi").get<double>());
    }

    const auto& meas = cfg.engine.measurands;
    cfg.refinement_thresholds.assign(meas.size(), std::numeric_limits<double>::infinity());
    if (j.contains("thresholds")) {
        const auto& jt = j.at("thresholds");
        cfg.relevance_frac = jt.value("relevance_frac", 0.01);
        cfg.compressor_c = jt.value("compressor_c", 0.5);
        cfg.safety_margin_frac = jt.value("safety_margin_frac", 0.05);
        cfg.predict_horizon = jt.value("predict_horizon", 3);
        cfg.min_frequency_gap = jt.value("min_frequency_gap", 4);
        cfg.cross_step_frac = jt.value("cross_step_frac", 0.02);
        cfg.min_box_unit_edge = jt.value("min_box_unit_edge", 1.0 / 512.0);
        if (jt.contains("refinement_frac")) {
            for (const auto& [name, frac] : jt.at("refinement_frac").items()) {
                const auto m = cfg.engine.measurand_index(name);
                cfg.refinement_thresholds[m] = frac.get<double>() * meas[m].noncritical.width();
            }
        }
    }

    cfg.deltas.assign(cfg.engine.actuators.size(), std::numeric_limits<double>::infinity());
    if (j.contains("drivability")) {
        const auto& jd = j.at("drivability");
        const double frac = jd.value("default_frac", 0.35);
        for (std::size_t a = 0; a < cfg.engine.actuators.size(); ++a) {
            const double w = cfg.engine.actuators[a].range.width();
            if (w > 0.0) cfg.deltas[a] = frac * w;
        }
        if (jd.contains("abs"))
            for (const auto& [name, v] : jd.at("abs").items())
                cfg.deltas[cfg.engine.actuator_index(name)] = v.get<double>();
    }

    if (j.contains("emissions")) {
        const auto& je = j.at("emissions");
        cfg.pollutant_names = je.at("pollutants").get<std::vector<std::string>>();
        cfg.limit_scale = je.value("scale", 1.0);
        if (je.contains("mg_per_km")) {
            for (const auto& [name, v] : je.at("mg_per_km").items())
                cfg.limits_mg_per_km[name] = v.get<double>();
        } else {
            const auto table =
                load_euro_table(resolve(base_dir, je.at("table").get<std::string>()));
            const auto norm = je.at("norm").get<std::string>();
            bool found = false;
            for (const auto& row : table) {
                if (row.norm == norm) {
                    cfg.limits_mg_per_km = row.mg_per_km;
                    found = true;
                }
            }
            if (!found) throw std::runtime_error("unknown emission norm: " + norm);
            json baked = json::object();
            for (const auto& [name, v] : cfg.limits_mg_per_km) baked[name] = v;
            j["emissions"].erase("table");
            j["emissions"].erase("norm");
            j["emissions"]["mg_per_km"] = baked;
        }
        for (const auto& name : cfg.pollutant_names) {
            cfg.engine.measurand_index(name);  // must exist
            if (!cfg.limits_mg_per_km.count(name))
                throw std::runtime_error("missing emission limit for pollutant: " + name);
        }
    }

    cfg.profile_path = fs::absolute(resolve(base_dir, j.at("profile").get<std::string>())).string();
    j["profile"] = cfg.profile_path;
    cfg.profile_dt = j.value("profile_dt", 1.0);
    if (j.contains("vehicle")) {
        const auto& jv = j.at("vehicle");
        cfg.vehicle.mass_kg = jv.value("mass_kg", cfg.vehicle.mass_kg);
        cfg.vehicle.rolling_coeff = jv.value("rolling_coeff", cfg.vehicle.rolling_coeff);
        cfg.vehicle.drag_area_m2 = jv.value("drag_area_m2", cfg.vehicle.drag_area_m2);
        cfg.vehicle.air_density = jv.value("air_density", cfg.vehicle.air_density);
        cfg.vehicle.wheel_radius_m = jv.value("wheel_radius_m", cfg.vehicle.wheel_radius_m);
        cfg.vehicle.final_drive = jv.value("final_drive", cfg.vehicle.final_drive);
        if (jv.contains("gear_ratios"))
            cfg.vehicle.gear_ratios = jv.at("gear_ratios").get<std::vector<double>>();
    }

    cfg.budget = j.value("budget", std::uint64_t{20000});
    cfg.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("ilp")) {
        const auto& ji = j.at("ilp");
        cfg.ilp_every_n_plans = ji.value("every_n_plans", 5);
        cfg.ilp_time_limit_s = ji.value("time_limit_s", 120.0);
        cfg.max_candidates_per_stack = ji.value("max_candidates_per_stack", std::size_t{0});
    }
    cfg.snapshot_every_plans = j.value("snapshot_every_plans", 0);
    if (j.contains("import_dataset") && j.at("import_dataset").is_string()) {
        const auto p = j.at("import_dataset").get<std::string>();
        if (!p.empty()) cfg.import_dataset = resolve(base_dir, p);
    }
    j["import_dataset"] = "";
    if (j.contains("baseline")) {
        const auto& jb = j.at("baseline");
        cfg.baseline_initial_resolution = jb.value("initial_resolution", 3);
        cfg.baseline_max_resolution = jb.value("max_resolution", 65);
    }
    cfg.raw_json = j.dump();
    return cfg;
}

std::string CampaignReport::to_json_text() const {
    json j;
    j["status"] = status;
    j["oracle_evaluations"] = oracle_evaluations;
    j["stored_points"] = stored_points;
    j["imported_points"] = imported_points;
    j["reduced_points"] = reduced_points;
    j["plans"] = plans;
    j["aborted_plans"] = aborted_plans;
    j["splits_symmetric"] = splits_symmetric;
    j["splits_asymmetric"] = splits_asymmetric;
    j["cross_measurements"] = cross_measurements;
    j["compressor_removed"] = compressor_removed;
    j["ilp_solves"] = ilp_solves;
    j["ilp_objective"] = ilp_objective;
    j["pollutants"] = pollutant_names;
    j["emission_total_g"] = emission_total_g;
    j["emission_slack_g"] = emission_slack_g;
    j["emission_mg_per_km"] = emission_mg_per_km;
    j["violated_pollutant"] = violated_pollutant;
    j["cells_chosen"] = cells_chosen;
    j["cells_synthetic"] = cells_synthetic;
    j["cells_empty"] = cells_empty;
    j["dataset_checksum"] = dataset_checksum;
    return j.dump(2);
}

namespace {

class Runner {
public:
    Runner(CampaignConfig cfg, std::string out_dir)
        : cfg_(std::move(cfg)),
          out_dir_(std::move(out_dir)),
          oracle_(cfg_.engine),
          rng_(cfg_.seed),
          geometry_(cfg_.k, cfg_.op_freq, cfg_.op_torq),
          grid_(make_grid(cfg_)) {
        const auto& meas = cfg_.engine.measurands;
        mparams_.relevance_thresholds.resize(meas.size());
        for (std::size_t m = 0; m < meas.size(); ++m)
            mparams_.relevance_thresholds[m] = cfg_.relevance_frac * meas[m].noncritical.width();
        mparams_.min_frequency_gap = cfg_.min_frequency_gap;
        mparams_.safety_margin_frac = cfg_.safety_margin_frac;
        mparams_.predict_horizon = cfg_.predict_horizon;

        for (const auto& a : cfg_.engine.actuators) domain_.push_back(a.range);

        const auto profile = OperationalProfile::load(cfg_.profile_path);
        const CycleTrace trace = profile_to_trace(profile, cfg_.vehicle, cfg_.profile_dt);
        weights_ = trace_to_weights(trace, geometry_, profile.name);

        for (const auto& name : cfg_.pollutant_names) {
            const auto m = cfg_.engine.measurand_index(name);
            emissions_.pollutants.push_back(m);
            emissions_.names.push_back(name);
            emissions_.upper.push_back(meas[m].noncritical.hi);
            emissions_.limit.push_back(cfg_.limits_mg_per_km.at(name) * cfg_.limit_scale *
                                       weights_.distance_km / 1000.0);
        }
        emissions_.unit_factor = 1.0 / 3600.0;

        cross_steps_.resize(grid_.dim());
        for (std::size_t i = 0; i < grid_.dim(); ++i)
            cross_steps_[i] = cfg_.cross_step_frac * grid_.scaler().intervals[i].width();

        stack_min_.assign(geometry_.stacks.size(), Vec(emissions_.size(),
                                                       std::numeric_limits<double>::infinity()));
        stack_count_.assign(geometry_.stacks.size(), 0);

        if (!out_dir_.empty()) {
            fs::create_directories(out_dir_);
            dataset_log_.open(out_dir_ + "/dataset.jsonl", std::ios::trunc);
            events_log_.open(out_dir_ + "/events.jsonl", std::ios::trunc);
        }
        if (!cfg_.import_dataset.empty()) import_points(cfg_.import_dataset);
    }

    static AdaptiveGrid make_grid(const CampaignConfig& cfg) {
        DomainScaler scaler;
        for (std::size_t a = 0; a < cfg.engine.actuators.size(); ++a) {
            if (cfg.engine.actuators[a].is_static()) continue;
            scaler.axes.push_back(a);
            scaler.intervals.push_back(cfg.engine.actuators[a].range);
        }
        return AdaptiveGrid(scaler,
                            std::vector<int>(scaler.dim(), cfg.initial_subdivisions));
    }

    CampaignResult run_adaptive() {
        bool complete = false;
        while (total_evals() < cfg_.budget) {
            const MeasurementPlan plan = make_plan(grid_, last_point_, cfg_.ell, rng_, domain_);
            const std::uint64_t left = cfg_.budget - total_evals();
            const PlanExecution exec = execute_plan(
                plan, oracle_, dataset_, mparams_,
                [this](std::uint64_t seq) { on_stored(seq, true); }, left);
            log_events(exec);
            ++report_.plans;
            if (exec.aborted) ++report_.aborted_plans;
            if (exec.last_valid) last_point_ = *exec.last_valid;

            refine_fresh(exec.stored);

            if (report_.plans % static_cast<std::size_t>(cfg_.ilp_every_n_plans) == 0) {
                if (ilp_cycle()) {
                    complete = true;
                    break;
                }
            }
            if (cfg_.snapshot_every_plans > 0 &&
                report_.plans % static_cast<std::size_t>(cfg_.snapshot_every_plans) == 0)
                save_snapshot();
        }
        if (!complete) complete = ilp_cycle();
        finalize(complete);
        return std::move(result_);
    }

    CampaignResult run_baseline() {
        bool complete = false;
        MeasurementParams store_all = mparams_;
        store_all.relevance_thresholds.assign(mparams_.relevance_thresholds.size(), 0.0);

        for (int r = cfg_.baseline_initial_resolution;
             r <= cfg_.baseline_max_resolution && !complete; r = 2 * r - 1) {
            if (total_evals() >= cfg_.budget) break;
            sweep_resolution(r, store_all);
            // resolution-matched uniform grid: the compressor reduces to an
            // exact duplicate filter, box scales follow the lattice spacing
            DomainScaler scaler = grid_.scaler();
            AdaptiveGrid uniform(scaler, std::vector<int>(scaler.dim(), std::max(1, r - 1)));
            for (std::size_t i = 0; i < dataset_.size(); ++i)
                uniform.add_point(static_cast<int>(i), dataset_[i].u);
            grid_ = std::move(uniform);
            complete = ilp_cycle();
        }
        finalize(complete);
        return std::move(result_);
    }

    CampaignResult resume(const json& snap) {
        load_snapshot(snap);
        return run_adaptive();
    }

    void load_snapshot(const json& snap) {
        rng_.load_state(snap.at("rng").get<std::string>());
        report_.plans = snap.at("plans").get<std::size_t>();
        if (snap.contains("last_point") && !snap.at("last_point").is_null())
            last_point_ = snap.at("last_point").get<Vec>();
        grid_ = AdaptiveGrid::from_json_text(snap.at("grid").dump());
        for (const auto& jp : snap.at("dataset")) {
            Vec u = jp.at("u").get<Vec>();
            Vec y = jp.at("y").get<Vec>();
            const std::uint64_t seq = dataset_.append(std::move(u), std::move(y));
            on_stored(seq, false);
        }
        // replayed evaluations are not repeated on the oracle; the budget
        // keeps counting fresh ones only (recorded separately in the report)
        evals_offset_ = snap.at("oracle_evaluations").get<std::uint64_t>();
    }

private:
    std::uint64_t total_evals() const { return evals_offset_ + oracle_.evaluations(); }

    void import_points(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open dataset import: " + path);
        std::string line;
        std::size_t skipped = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            Vec u = j.at("u").get<Vec>();
            Vec y = j.at("y").get<Vec>();
            if (!oracle_.in_domain(u)) {
                ++skipped;
                continue;
            }
            const std::uint64_t seq = dataset_.append(std::move(u), std::move(y));
            on_stored(seq, false);
        }
        imported_ = dataset_.size();
        (void)skipped;
    }

    // registers a stored point; cross measurements only fire on live points
    void on_stored(std::uint64_t seq, bool live) {
        const DataPoint& p = dataset_[seq];
        grid_.add_point(static_cast<int>(seq), p.u);
        hash_.update(dataset_line(p));
        hash_.update("\n");
        if (dataset_log_.is_open()) dataset_log_ << dataset_line(p) << "\n";

        const int cell = geometry_.cell_of(p.u[oracle_.freq_index()],
                                           p.y[oracle_.torque_index()]);
        if (cell < 0) return;
        const auto c = static_cast<std::size_t>(cell);
        const bool first = stack_count_[c]++ == 0;
        int trigger = -1;
        for (std::size_t e = 0; e < emissions_.size(); ++e) {
            const double v = p.y[emissions_.pollutants[e]];
            if (!first && trigger < 0 && v < stack_min_[c][e]) trigger = static_cast<int>(e);
            stack_min_[c][e] = std::min(stack_min_[c][e], v);
        }
        if (!live || trigger < 0) return;
        // step VI: a new stack minimum prompts a cross-measurement
        if (total_evals() + 2 * grid_.dim() > cfg_.budget) return;
        const auto res =
            cross_measure_and_refine(grid_, oracle_, p.u,
                                     emissions_.pollutants[static_cast<std::size_t>(trigger)],
                                     cross_steps_, cfg_.min_box_unit_edge);
        ++report_.cross_measurements;
        if (res && res->split_applied) ++report_.splits_asymmetric;
    }

    void refine_fresh(const std::vector<std::uint64_t>& fresh) {
        if (fresh.empty()) return;
        const CompressResult comp = compress(dataset_, grid_, cfg_.compressor_c);
        report_.compressor_removed = comp.removals.size();
        for (std::uint64_t seq : fresh) {
            if (!std::binary_search(comp.kept.begin(), comp.kept.end(), seq)) continue;
            const auto dec =
                refine_symmetric_if_needed(grid_, dataset_, comp.kept, seq,
                                           cfg_.refinement_thresholds, cfg_.min_box_unit_edge);
            if (dec.split) ++report_.splits_symmetric;
        }
    }

    bool ilp_cycle() {
        const CompressResult comp = compress(dataset_, grid_, cfg_.compressor_c);
        report_.compressor_removed = comp.removals.size();
        result_.reduced = comp.kept;
        result_.field = assign_stacks(dataset_, comp.kept, cfg_.k, cfg_.op_freq, cfg_.op_torq,
                                      oracle_.freq_index(), oracle_.torque_index());
        BuildOptions opts;
        opts.prune_dominated = true;
        opts.max_candidates_per_stack = cfg_.max_candidates_per_stack;
        result_.instance = build_instance(result_.field, dataset_, weights_, cfg_.deltas,
                                          emissions_, oracle_.fuel_index(), opts);
        result_.ilp = solve(result_.instance, cfg_.ilp_time_limit_s);
        ++report_.ilp_solves;
        if (result_.ilp.status != IlpStatus::optimal &&
            result_.ilp.status != IlpStatus::feasible)
            return false;

        result_.solution = solution_from_ilp(result_.instance, result_.ilp, dataset_);
        fill_gaps(result_.solution, result_.field, dataset_, comp.kept, oracle_.freq_index(),
                  oracle_.torque_index());
        const VerifyReport verify = verify_solution(result_.instance, result_.ilp.point_assign,
                                                    result_.ilp.cell_assign, cfg_.deltas);
        report_.ilp_objective = result_.ilp.objective;
        report_.emission_total_g = verify.emission_total;
        report_.emission_slack_g = verify.emission_slack;
        report_.emission_mg_per_km.assign(emissions_.size(), 0.0);
        for (std::size_t e = 0; e < emissions_.size(); ++e)
            report_.emission_mg_per_km[e] =
                verify.emission_total[e] * 1000.0 / weights_.distance_km;
        return result_.solution.complete() && verify.ok;
    }

    void log_events(const PlanExecution& exec) {
        if (!events_log_.is_open()) return;
        for (const auto& ev : exec.events) {
            json j;
            j["ramp"] = ev.ramp;
            j["i"] = ev.index;
            switch (ev.action) {
                case PointAction::stored: j["action"] = "stored"; break;
                case PointAction::skipped: j["action"] = "skipped"; break;
                case PointAction::aborted_critical: j["action"] = "aborted_critical"; break;
                case PointAction::aborted_predicted: j["action"] = "aborted_predicted"; break;
            }
            j["u"] = ev.u;
            events_log_ << j.dump() << "\n";
        }
    }

    void sweep_resolution(int r, const MeasurementParams& params) {
        const std::size_t d = grid_.dim();
        const auto& scaler = grid_.scaler();
        // full-factorial lattice visited as ramps along the last axis
        std::vector<int> idx(d, 0);
        const std::size_t lines = [&] {
            std::size_t n = 1;
            for (std::size_t a = 0; a + 1 < d; ++a) n *= static_cast<std::size_t>(r);
            return n;
        }();
        auto lattice_value = [&](std::size_t axis, int i) {
            const Interval& iv = scaler.intervals[axis];
            return r == 1 ? iv.mid() : iv.lo + iv.width() * i / (r - 1);
        };
        for (std::size_t line = 0; line < lines; ++line) {
            if (total_evals() >= cfg_.budget) return;
            Vec from(domain_.size());
            for (std::size_t a = 0; a < domain_.size(); ++a) from[a] = domain_[a].lo;
            for (std::size_t a = 0; a + 1 < d; ++a)
                from[scaler.axes[a]] = lattice_value(a, idx[a]);
            Vec to = from;
            from[scaler.axes[d - 1]] = lattice_value(d - 1, 0);
            to[scaler.axes[d - 1]] = lattice_value(d - 1, r - 1);

            MeasurementPlan plan;
            plan.ell = r;
            plan.waypoints = {from, to};
            plan.path_boxes = {0, 0};
            const std::uint64_t left = cfg_.budget - total_evals();
            const PlanExecution exec = execute_plan(
                plan, oracle_, dataset_, params,
                [this](std::uint64_t seq) { on_stored(seq, false); }, left);
            log_events(exec);
            ++report_.plans;
            if (exec.aborted) ++report_.aborted_plans;

            for (std::size_t a = d - 1; a-- > 0;) {
                if (++idx[a] < r) break;
                idx[a] = 0;
            }
        }
    }

    void finalize(bool complete) {
        if (complete) {
            report_.status = "complete";
        } else if (result_.ilp.status == IlpStatus::infeasible) {
            report_.status = "infeasible_limits";
            report_.violated_pollutant = result_.ilp.violated_pollutant;
        } else {
            report_.status = "budget_exhausted";
        }
        report_.oracle_evaluations = evals_offset_ + oracle_.evaluations();
        report_.stored_points = dataset_.size();
        report_.imported_points = imported_;
        report_.reduced_points = result_.reduced.size();
        report_.pollutant_names = emissions_.names;
        const std::size_t total_cells = static_cast<std::size_t>(cfg_.k) * cfg_.k;
        report_.cells_chosen = result_.solution.count(SolutionCell::State::chosen);
        report_.cells_synthetic = result_.solution.count(SolutionCell::State::synthetic);
        report_.cells_empty = total_cells - report_.cells_chosen - report_.cells_synthetic;
        report_.dataset_checksum = hash_.h;

        result_.report = report_;
        result_.dataset = std::move(dataset_);
        result_.weights = weights_;
        result_.grid_json = grid_.to_json_text();

        if (!out_dir_.empty()) {
            dataset_log_.close();
            events_log_.close();
            std::ofstream(out_dir_ + "/report.json") << result_.report.to_json_text() << "\n";
            std::ofstream(out_dir_ + "/solution.json")
                << result_.solution.to_json_text() << "\n";
            save_snapshot();
            export_maps(result_.solution, geometry_, weights_, cfg_.engine,
                        out_dir_ + "/maps");
        }
    }

    void save_snapshot() {
        if (out_dir_.empty()) return;
        json snap;
        snap["schema_version"] = 1;
        snap["config"] = cfg_.raw_json;
        snap["rng"] = rng_.save_state();
        snap["plans"] = report_.plans;
        snap["oracle_evaluations"] = evals_offset_ + oracle_.evaluations();
        if (last_point_)
            snap["last_point"] = *last_point_;
        else
            snap["last_point"] = nullptr;
        snap["grid"] = json::parse(grid_.to_json_text());
        json ds = json::array();
        for (const auto& p : dataset_.points) ds.push_back({{"u", p.u}, {"y", p.y}});
        snap["dataset"] = ds;
        snap["reduced"] = result_.reduced;
        snap["solution"] = json::parse(result_.solution.k > 0
                                           ? result_.solution.to_json_text()
                                           : std::string("{\"k\":0,\"cells\":[]}"));
        snap["assignment"] = {{"points", result_.ilp.point_assign},
                              {"cells", result_.ilp.cell_assign}};
        std::ofstream(out_dir_ + "/snapshot.json") << snap.dump() << "\n";
    }

    CampaignConfig cfg_;
    std::string out_dir_;
    EngineOracle oracle_;
    Dataset dataset_;
    Rng rng_;
    KOperationField geometry_;  // cell geometry only; stacks stay empty
    AdaptiveGrid grid_;
    MeasurementParams mparams_;
    std::vector<Interval> domain_;
    DrivingCycleWeights weights_;
    EmissionModel emissions_;
    Vec cross_steps_;
    std::optional<Vec> last_point_;
    std::vector<Vec> stack_min_;
    std::vector<std::size_t> stack_count_;
    std::size_t imported_ = 0;
    std::uint64_t evals_offset_ = 0;
    CampaignReport report_;
    CampaignResult result_;
    Fnv1a64 hash_;
    std::ofstream dataset_log_;
    std::ofstream events_log_;
};

}  // namespace

CampaignResult run_campaign(const CampaignConfig& config, const std::string& out_dir) {
    Runner runner(config, out_dir);
    return runner.run_adaptive();
}

CampaignResult run_uniform_baseline(const CampaignConfig& config, const std::string& out_dir) {
    Runner runner(config, out_dir);
    return runner.run_baseline();
}

CampaignResult resume_campaign(const std::string& snapshot_path, const std::string& out_dir) {
    const json snap = json::parse(read_file(snapshot_path));
    const CampaignConfig cfg = CampaignConfig::from_json_text(
        snap.at("config").get<std::string>(),
        fs::path(snapshot_path).parent_path().string());
    Runner runner(cfg, out_dir);
    return runner.resume(snap);
}

VerifyReport verify_snapshot(const std::string& snapshot_path) {
    const json snap = json::parse(read_file(snapshot_path));
    const CampaignConfig cfg = CampaignConfig::from_json_text(
        snap.at("config").get<std::string>(),
        fs::path(snapshot_path).parent_path().string());

    Dataset dataset;
    for (const auto& jp : snap.at("dataset"))
        dataset.append(jp.at("u").get<Vec>(), jp.at("y").get<Vec>());
    const auto reduced = snap.at("reduced").get<std::vector<std::uint64_t>>();

    EngineOracle oracle(cfg.engine);
    const KOperationField field =
        assign_stacks(dataset, reduced, cfg.k, cfg.op_freq, cfg.op_torq, oracle.freq_index(),
                      oracle.torque_index());
    const OperationalProfile profile = OperationalProfile::load(cfg.profile_path);
    const DrivingCycleWeights weights =
        trace_to_weights(profile_to_trace(profile, cfg.vehicle, cfg.profile_dt), field,
                         profile.name);
    EmissionModel em;
    for (const auto& name : cfg.pollutant_names) {
        const auto m = cfg.engine.measurand_index(name);
        em.pollutants.push_back(m);
        em.names.push_back(name);
        em.upper.push_back(cfg.engine.measurands[m].noncritical.hi);
        em.limit.push_back(cfg.limits_mg_per_km.at(name) * cfg.limit_scale *
                           weights.distance_km / 1000.0);
    }
    BuildOptions opts;
    opts.max_candidates_per_stack = cfg.max_candidates_per_stack;
    const IlpInstance instance =
        build_instance(field, dataset, weights, cfg.deltas, em, oracle.fuel_index(), opts);

    const auto points = snap.at("assignment").at("points").get<std::vector<char>>();
    const auto cells = snap.at("assignment").at("cells").get<std::vector<char>>();
    if (points.size() != instance.points.size())
        throw std::runtime_error("snapshot assignment does not match the rebuilt instance");
    return verify_solution(instance, points, cells, cfg.deltas);
}

namespace {

void write_matrix(const std::string& path, const std::string& title, const std::string& unit,
                  const KOperationField& field,
                  const std::function<std::optional<double>(int, int)>& value) {
    std::ofstream out(path);
    out << "# " << title << " [" << unit
        << "]; rows = torque cell centers, columns = frequency cell centers\n";
    out << "torque_Nm\\freq_1_min";
    for (int f = 0; f < field.k; ++f) out << "\t" << format_double(field.cell_center_freq(f));
    out << "\n";
    for (int t = field.k - 1; t >= 0; --t) {
        out << format_double(field.cell_center_torq(t));
        for (int f = 0; f < field.k; ++f) {
            const auto v = value(f, t);
            out << "\t" << (v ? format_double(*v) : std::string("NA"));
        }
        out << "\n";
    }
}

}  // namespace

void export_maps(const SolutionMap& solution, const KOperationField& field,
                 const DrivingCycleWeights& weights, const EngineConfig& engine,
                 const std::string& out_dir) {
    fs::create_directories(out_dir);
    for (std::size_t a = 0; a < engine.actuators.size(); ++a) {
        const auto& spec = engine.actuators[a];
        write_matrix(out_dir + "/actuator_" + spec.name + ".tsv", "actuator " + spec.name,
                     spec.unit, field, [&](int f, int t) -> std::optional<double> {
                         const auto& c = solution.cell(f, t);
                         if (c.state == SolutionCell::State::empty) return std::nullopt;
                         return c.u[a];
                     });
    }
    for (std::size_t m = 0; m < engine.measurands.size(); ++m) {
        const auto& spec = engine.measurands[m];
        if (spec.name != "co" && spec.name != "hc" && spec.name != "nox" &&
            spec.name != "soot" && spec.name != "fuel_flow")
            continue;
        write_matrix(out_dir + "/rate_" + spec.name + ".tsv", "measurand " + spec.name,
                     spec.unit, field, [&](int f, int t) -> std::optional<double> {
                         const auto& c = solution.cell(f, t);
                         if (c.state == SolutionCell::State::empty) return std::nullopt;
                         return c.y[m];
                     });
    }
    write_matrix(out_dir + "/weights.tsv", "driving-cycle resistance time", "s", field,
                 [&](int f, int t) -> std::optional<double> {
                     return weights.omega[static_cast<std::size_t>(field.cell_index(f, t))];
                 });
    write_matrix(out_dir + "/flags.tsv", "cell provenance (1 measured, 2 synthetic)", "-",
                 field, [&](int f, int t) -> std::optional<double> {
                     const auto& c = solution.cell(f, t);
                     if (c.state == SolutionCell::State::empty) return std::nullopt;
                     return c.state == SolutionCell::State::chosen ? 1.0 : 2.0;
                 });
}

void export_ratio(const SolutionMap& a, const SolutionMap& b, const KOperationField& field,
                  const EngineConfig& engine, const std::string& out_dir) {
    if (a.k != b.k || a.k != field.k) throw std::invalid_argument("export_ratio: k mismatch");
    fs::create_directories(out_dir);
    for (std::size_t ax = 0; ax < engine.actuators.size(); ++ax) {
        const auto& spec = engine.actuators[ax];
        write_matrix(out_dir + "/ratio_actuator_" + spec.name + ".tsv",
                     "actuator ratio " + spec.name, "-", field,
                     [&](int f, int t) -> std::optional<double> {
                         const auto& ca = a.cell(f, t);
                         const auto& cb = b.cell(f, t);
                         if (ca.state == SolutionCell::State::empty ||
                             cb.state == SolutionCell::State::empty || cb.u[ax] == 0.0)
                             return std::nullopt;
                         return ca.u[ax] / cb.u[ax];
                     });
    }
}

}  // namespace adcal
