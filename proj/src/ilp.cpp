#include "adcal/ilp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "adcal/simplex.hpp"
#include "json.hpp"

namespace adcal {

std::vector<double> prey_values(const KOperationField& field, const Dataset& dataset,
                                std::size_t fuel_measurand) {
    std::vector<double> prey(dataset.size(), 0.0);
    for (const auto& stack : field.stacks) {
        if (stack.empty()) continue;
        double min_fuel = std::numeric_limits<double>::infinity();
        for (std::uint64_t seq : stack) {
            const double fuel = dataset[seq].y[fuel_measurand];
            if (fuel <= 0.0)
                throw std::invalid_argument("prey_values: fuel must be strictly positive");
            min_fuel = std::min(min_fuel, fuel);
        }
        for (std::uint64_t seq : stack) prey[seq] = min_fuel / dataset[seq].y[fuel_measurand];
    }
    return prey;
}

namespace {

bool in_conflict(const Vec& uq, const Vec& ur, const Vec& deltas) {
    for (std::size_t a = 0; a < deltas.size(); ++a)
        if (std::abs(uq[a] - ur[a]) >= deltas[a]) return true;
    return false;
}

}  // namespace

IlpInstance build_instance(const KOperationField& field, const Dataset& dataset,
                           const DrivingCycleWeights& weights, const Vec& deltas,
                           const EmissionModel& emissions, std::size_t fuel_measurand,
                           const BuildOptions& options) {
    if (static_cast<int>(weights.omega.size()) != field.k * field.k)
        throw std::invalid_argument("build_instance: weights and field disagree on k");
    if (emissions.size() != emissions.upper.size() || emissions.size() != emissions.limit.size())
        throw std::invalid_argument("build_instance: missing pollutant limit");

    IlpInstance inst;
    inst.k = field.k;
    inst.cell_omega = weights.omega;
    inst.emissions = emissions;
    inst.stack_vars.assign(inst.num_cells(), {});

    const std::vector<double> prey = prey_values(field, dataset, fuel_measurand);

    for (std::size_t cell = 0; cell < inst.num_cells(); ++cell) {
        for (std::uint64_t seq : field.stacks[cell]) {
            const DataPoint& p = dataset[seq];
            IlpInstance::Candidate c;
            c.seq = seq;
            c.cell = static_cast<int>(cell);
            c.prey = prey[seq];
            c.fuel = p.y[fuel_measurand];
            c.u = p.u;
            c.rates.resize(emissions.size());
            for (std::size_t e = 0; e < emissions.size(); ++e)
                c.rates[e] = p.y[emissions.pollutants[e]];
            inst.stack_vars[cell].push_back(static_cast<int>(inst.points.size()));
            inst.points.push_back(std::move(c));
        }
    }

    auto enumerate_conflicts = [&](std::vector<std::pair<int, int>>& out) {
        const int k = inst.k;
        out.clear();
        for (int f = 0; f < k; ++f) {
            for (int t = 0; t < k; ++t) {
                const int cell = f * k + t;
                for (int side = 0; side < 2; ++side) {
                    const int ff = f + (side == 0 ? 1 : 0);
                    const int tt = t + (side == 0 ? 0 : 1);
                    if (ff >= k || tt >= k) continue;
                    const int other = ff * k + tt;
                    for (int vq : inst.stack_vars[static_cast<std::size_t>(cell)])
                        for (int vr : inst.stack_vars[static_cast<std::size_t>(other)])
                            if (in_conflict(inst.points[static_cast<std::size_t>(vq)].u,
                                            inst.points[static_cast<std::size_t>(vr)].u, deltas))
                                out.emplace_back(vq, vr);
                }
            }
        }
    };
    enumerate_conflicts(inst.conflicts);

    if (options.prune_dominated || options.max_candidates_per_stack > 0) {
        // conflict sets per variable, for the dominance test
        std::vector<std::vector<int>> conf(inst.points.size());
        for (const auto& [a, b] : inst.conflicts) {
            conf[static_cast<std::size_t>(a)].push_back(b);
            conf[static_cast<std::size_t>(b)].push_back(a);
        }
        for (auto& c : conf) std::sort(c.begin(), c.end());

        std::vector<char> pruned(inst.points.size(), 0);
        if (options.prune_dominated) {
            auto dominates = [&](int r, int q) {
                // r can replace q in any solution: no worse fuel, no worse
                // rates, and conflicts(r) a subset of conflicts(q)
                const auto& pr = inst.points[static_cast<std::size_t>(r)];
                const auto& pq = inst.points[static_cast<std::size_t>(q)];
                if (pr.fuel > pq.fuel) return false;
                for (std::size_t e = 0; e < pr.rates.size(); ++e)
                    if (pr.rates[e] > pq.rates[e]) return false;
                if (!std::includes(conf[static_cast<std::size_t>(q)].begin(),
                                   conf[static_cast<std::size_t>(q)].end(),
                                   conf[static_cast<std::size_t>(r)].begin(),
                                   conf[static_cast<std::size_t>(r)].end()))
                    return false;
                // acyclic tie rule: equal records fall to the lower sequence
                if (pr.fuel == pq.fuel && pr.rates == pq.rates &&
                    conf[static_cast<std::size_t>(r)] == conf[static_cast<std::size_t>(q)])
                    return pr.seq < pq.seq;
                return true;
            };
            for (const auto& stack : inst.stack_vars) {
                for (int q : stack) {
                    for (int r : stack) {
                        if (r == q || pruned[static_cast<std::size_t>(r)]) continue;
                        if (dominates(r, q)) {
                            pruned[static_cast<std::size_t>(q)] = 1;
                            break;
                        }
                    }
                }
            }
        }
        if (options.max_candidates_per_stack > 0) {
            // keep the best prey values plus the cleanest points per
            // pollutant, so the cap never discards the emission-feasible side
            for (const auto& stack : inst.stack_vars) {
                std::vector<int> alive;
                for (int v : stack)
                    if (!pruned[static_cast<std::size_t>(v)]) alive.push_back(v);
                if (alive.size() <= options.max_candidates_per_stack) continue;
                std::vector<char> keep_flag(alive.size(), 0);
                std::size_t kept_count = 0;
                auto keep_top = [&](std::size_t count, auto better) {
                    std::vector<std::size_t> order(alive.size());
                    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                    std::stable_sort(order.begin(), order.end(), better);
                    for (std::size_t i = 0; i < order.size() && count > 0; ++i) {
                        if (keep_flag[order[i]]) continue;
                        keep_flag[order[i]] = 1;
                        ++kept_count;
                        --count;
                    }
                };
                const std::size_t n_poll = std::max<std::size_t>(emissions.size(), 1);
                const std::size_t per_poll =
                    std::max<std::size_t>(1, options.max_candidates_per_stack / (2 * n_poll));
                for (std::size_t p = 0; p < emissions.size(); ++p) {
                    keep_top(per_poll, [&](std::size_t a, std::size_t b) {
                        const auto& pa = inst.points[static_cast<std::size_t>(alive[a])];
                        const auto& pb = inst.points[static_cast<std::size_t>(alive[b])];
                        if (pa.rates[p] != pb.rates[p]) return pa.rates[p] < pb.rates[p];
                        return pa.seq < pb.seq;
                    });
                }
                if (options.max_candidates_per_stack > kept_count)
                    keep_top(options.max_candidates_per_stack - kept_count,
                             [&](std::size_t a, std::size_t b) {
                                 const auto& pa =
                                     inst.points[static_cast<std::size_t>(alive[a])];
                                 const auto& pb =
                                     inst.points[static_cast<std::size_t>(alive[b])];
                                 if (pa.prey != pb.prey) return pa.prey > pb.prey;
                                 return pa.seq < pb.seq;
                             });
                for (std::size_t i = 0; i < alive.size(); ++i)
                    if (!keep_flag[i]) pruned[static_cast<std::size_t>(alive[i])] = 1;
            }
        }

        IlpInstance kept;
        kept.k = inst.k;
        kept.cell_omega = inst.cell_omega;
        kept.emissions = inst.emissions;
        kept.stack_vars.assign(inst.num_cells(), {});
        for (std::size_t v = 0; v < inst.points.size(); ++v) {
            if (pruned[v]) continue;
            kept.stack_vars[static_cast<std::size_t>(inst.points[v].cell)].push_back(
                static_cast<int>(kept.points.size()));
            kept.points.push_back(inst.points[v]);
        }
        kept.num_pruned = inst.points.size() - kept.points.size();
        std::swap(inst, kept);
        enumerate_conflicts(inst.conflicts);  // the lambda reads through inst
    }
    return inst;
}

std::string IlpInstance::to_json_text() const {
    nlohmann::json j;
    j["k"] = k;
    j["num_pruned"] = num_pruned;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points)
        pts.push_back({{"seq", p.seq},
                       {"cell", p.cell},
                       {"prey", p.prey},
                       {"fuel", p.fuel},
                       {"rates", p.rates}});
    j["points"] = pts;
    j["cell_omega"] = cell_omega;
    nlohmann::json confs = nlohmann::json::array();
    for (const auto& [a, b] : conflicts) confs.push_back({a, b});
    j["conflicts"] = confs;
    j["emissions"] = {{"names", emissions.names},
                      {"upper", emissions.upper},
                      {"limit", emissions.limit},
                      {"unit_factor", emissions.unit_factor}};
    return j.dump();
}

namespace {

struct Fixing {
    std::vector<signed char> value;  // -1 free, 0, 1

    explicit Fixing(std::size_t n_points, std::size_t n_cells)
        : value(n_points + n_cells, -1) {}
};

// var layout: [0, P) point vars, [P, P + cells) cell vars
class BranchAndBound {
public:
    BranchAndBound(const IlpInstance& inst, double time_limit_s)
        : inst_(inst),
          n_points_(inst.points.size()),
          n_cells_(inst.num_cells()),
          deadline_(std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(time_limit_s))) {
        conflict_of_.assign(n_points_, {});
        for (std::size_t i = 0; i < inst_.conflicts.size(); ++i) {
            conflict_of_[static_cast<std::size_t>(inst_.conflicts[i].first)].push_back(
                static_cast<int>(i));
            conflict_of_[static_cast<std::size_t>(inst_.conflicts[i].second)].push_back(
                static_cast<int>(i));
        }
    }

    IlpSolution run() {
        IlpSolution sol;
        Fixing root(n_points_, n_cells_);
        bool timed_out = false;
        double root_bound = std::numeric_limits<double>::infinity();
        explore(root, timed_out, root_bound, true);
        sol.bound = have_incumbent_ ? std::max(root_bound, best_obj_) : root_bound;
        sol.nodes = nodes_;
        sol.lp_iterations = lp_iterations_;
        if (have_incumbent_) {
            sol.status = timed_out ? IlpStatus::feasible : IlpStatus::optimal;
            sol.objective = best_obj_;
            sol.point_assign = best_points_;
            sol.cell_assign = best_cells_;
        } else if (timed_out) {
            sol.status = IlpStatus::timeout;
        } else {
            sol.status = IlpStatus::infeasible;
            sol.violated_pollutant = infeasibility_diagnostic();
        }
        return sol;
    }

private:
    bool expired() const { return std::chrono::steady_clock::now() > deadline_; }

    int infeasibility_diagnostic() const {
        // pollutant whose per-cell best case already exceeds the limit
        int worst = -1;
        double worst_gap = 0.0;
        for (std::size_t p = 0; p < inst_.emissions.size(); ++p) {
            double lhs = 0.0;
            for (std::size_t cell = 0; cell < n_cells_; ++cell) {
                double best = inst_.penalty_coeff(static_cast<int>(cell), p);
                for (int v : inst_.stack_vars[cell])
                    best = std::min(best, inst_.emission_coeff(v, p));
                lhs += best;
            }
            const double gap = lhs - inst_.emissions.limit[p];
            if (gap > worst_gap) {
                worst_gap = gap;
                worst = static_cast<int>(p);
            }
        }
        return worst;
    }

    // Fixes var to val with implication propagation; false on contradiction.
    bool fix(Fixing& f, std::size_t var, signed char val) {
        if (f.value[var] == val) return true;
        if (f.value[var] != -1) return false;
        f.value[var] = val;
        if (val == 1) {
            const std::size_t cell =
                var < n_points_ ? static_cast<std::size_t>(inst_.points[var].cell)
                                : var - n_points_;
            // everything else in the stack equality drops to zero
            for (int w : inst_.stack_vars[cell])
                if (static_cast<std::size_t>(w) != var)
                    if (!fix(f, static_cast<std::size_t>(w), 0)) return false;
            if (var != n_points_ + cell)
                if (!fix(f, n_points_ + cell, 0)) return false;
            if (var < n_points_)
                for (int ci : conflict_of_[var]) {
                    const auto& [a, b] = inst_.conflicts[static_cast<std::size_t>(ci)];
                    const std::size_t other =
                        static_cast<std::size_t>(a) == var ? static_cast<std::size_t>(b)
                                                           : static_cast<std::size_t>(a);
                    if (!fix(f, other, 0)) return false;
                }
        } else {
            // last remaining variable of a stack equality must be chosen
            const std::size_t cell =
                var < n_points_ ? static_cast<std::size_t>(inst_.points[var].cell)
                                : var - n_points_;
            int free_count = 0;
            std::size_t free_var = 0;
            bool satisfied = false;
            auto visit = [&](std::size_t w) {
                if (f.value[w] == 1) satisfied = true;
                if (f.value[w] == -1) {
                    ++free_count;
                    free_var = w;
                }
            };
            for (int w : inst_.stack_vars[cell]) visit(static_cast<std::size_t>(w));
            visit(n_points_ + cell);
            if (!satisfied) {
                if (free_count == 0) return false;
                if (free_count == 1)
                    if (!fix(f, free_var, 1)) return false;
            }
        }
        return true;
    }

    struct NodeLp {
        std::vector<std::size_t> cols;  // free var per LP column
        LpResult res;
    };

    // LP relaxation over the free variables, growing the active conflict
    // pool until no violated conflict remains.
    bool node_lp(const Fixing& f, NodeLp& out) {
        std::vector<int> col_of(n_points_ + n_cells_, -1);
        out.cols.clear();
        for (std::size_t v = 0; v < n_points_ + n_cells_; ++v) {
            if (f.value[v] == -1) {
                col_of[v] = static_cast<int>(out.cols.size());
                out.cols.push_back(v);
            }
        }
        const std::size_t n = out.cols.size();

        LpProblem lp;
        lp.n = n;
        lp.c.assign(n, 0.0);
        for (std::size_t c = 0; c < n; ++c)
            if (out.cols[c] < n_points_) lp.c[c] = inst_.points[out.cols[c]].prey;

        // stack equalities with unresolved variables
        for (std::size_t cell = 0; cell < n_cells_; ++cell) {
            double rhs = 1.0;
            bool satisfied = false;
            LpRow row;
            row.a.assign(n, 0.0);
            row.type = 'E';
            bool any_free = false;
            auto visit = [&](std::size_t w) {
                if (f.value[w] == 1) satisfied = true;
                if (f.value[w] == -1) {
                    row.a[static_cast<std::size_t>(col_of[w])] = 1.0;
                    any_free = true;
                }
            };
            for (int w : inst_.stack_vars[cell]) visit(static_cast<std::size_t>(w));
            visit(n_points_ + cell);
            if (satisfied) continue;  // propagation zeroed the rest
            if (!any_free) return false;
            row.rhs = rhs;
            lp.rows.push_back(std::move(row));
        }

        // emission rows with fixed contributions folded into the rhs
        for (std::size_t p = 0; p < inst_.emissions.size(); ++p) {
            LpRow row;
            row.a.assign(n, 0.0);
            row.type = 'L';
            double rhs = inst_.emissions.limit[p];
            for (std::size_t v = 0; v < n_points_; ++v) {
                const double coeff = inst_.emission_coeff(static_cast<int>(v), p);
                if (f.value[v] == 1)
                    rhs -= coeff;
                else if (f.value[v] == -1)
                    row.a[static_cast<std::size_t>(col_of[v])] = coeff;
            }
            for (std::size_t cell = 0; cell < n_cells_; ++cell) {
                const std::size_t v = n_points_ + cell;
                const double coeff = inst_.penalty_coeff(static_cast<int>(cell), p);
                if (f.value[v] == 1)
                    rhs -= coeff;
                else if (f.value[v] == -1)
                    row.a[static_cast<std::size_t>(col_of[v])] = coeff;
            }
            row.rhs = rhs;
            lp.rows.push_back(std::move(row));
        }

        const std::size_t base_rows = lp.rows.size();
        std::vector<int> active(active_conflicts_.begin(), active_conflicts_.end());
        while (true) {
            lp.rows.resize(base_rows);
            for (int ci : active) {
                const auto& [a, b] = inst_.conflicts[static_cast<std::size_t>(ci)];
                const std::size_t va = static_cast<std::size_t>(a);
                const std::size_t vb = static_cast<std::size_t>(b);
                if (f.value[va] != -1 || f.value[vb] != -1) continue;  // propagation covers it
                LpRow row;
                row.a.assign(n, 0.0);
                row.type = 'L';
                row.rhs = 1.0;
                row.a[static_cast<std::size_t>(col_of[va])] = 1.0;
                row.a[static_cast<std::size_t>(col_of[vb])] = 1.0;
                lp.rows.push_back(std::move(row));
            }
            out.res = solve_lp(lp);
            lp_iterations_ += out.res.iterations;
            if (out.res.status == LpStatus::infeasible) return false;
            if (out.res.status == LpStatus::unbounded)
                throw std::runtime_error("node LP unbounded; instance malformed");

            // separate violated conflicts
            std::size_t added = 0;
            for (std::size_t ci = 0; ci < inst_.conflicts.size() && added < 64; ++ci) {
                if (active_conflicts_.count(static_cast<int>(ci))) continue;
                const auto& [a, b] = inst_.conflicts[ci];
                const std::size_t va = static_cast<std::size_t>(a);
                const std::size_t vb = static_cast<std::size_t>(b);
                double xa = f.value[va] == -1 ? out.res.x[static_cast<std::size_t>(col_of[va])]
                                              : f.value[va];
                double xb = f.value[vb] == -1 ? out.res.x[static_cast<std::size_t>(col_of[vb])]
                                              : f.value[vb];
                if (xa + xb > 1.0 + 1e-7) {
                    active_conflicts_.insert(static_cast<int>(ci));
                    active.push_back(static_cast<int>(ci));
                    ++added;
                }
            }
            if (added == 0) return true;
        }
    }

    void explore(Fixing f, bool& timed_out, double& bound_out, bool is_root) {
        ++nodes_;
        if (expired()) {
            timed_out = true;
            return;
        }
        NodeLp lp;
        if (!node_lp(f, lp)) {
            if (is_root) bound_out = -std::numeric_limits<double>::infinity();
            return;  // infeasible subtree
        }
        // node bound = free-variable LP value plus the prey already locked in
        double fixed_obj = 0.0;
        for (std::size_t v = 0; v < n_points_; ++v)
            if (f.value[v] == 1) fixed_obj += inst_.points[v].prey;
        const double bound = lp.res.objective + fixed_obj;
        if (is_root) bound_out = bound;
        if (have_incumbent_ && bound <= best_obj_ + 1e-9) return;

        // most fractional free variable; ties to higher prey, then lower index
        std::size_t branch_var = SIZE_MAX;
        double best_frac = 1e-7;
        for (std::size_t c = 0; c < lp.cols.size(); ++c) {
            const double x = lp.res.x[c];
            const double frac = std::min(x - std::floor(x), std::ceil(x) - x);
            const double dist = std::abs(x - 0.5);
            if (frac <= 1e-7) continue;
            const std::size_t v = lp.cols[c];
            if (branch_var == SIZE_MAX) {
                branch_var = v;
                best_frac = dist;
                continue;
            }
            const double prey_v = v < n_points_ ? inst_.points[v].prey : 0.0;
            const double prey_b =
                branch_var < n_points_ ? inst_.points[branch_var].prey : 0.0;
            if (dist < best_frac - 1e-12 ||
                (std::abs(dist - best_frac) <= 1e-12 &&
                 (prey_v > prey_b || (prey_v == prey_b && v < branch_var)))) {
                branch_var = v;
                best_frac = dist;
            }
        }

        if (branch_var == SIZE_MAX) {
            // integral: round, complete the assignment and check it exactly
            Fixing full = f;
            bool ok = true;
            for (std::size_t c = 0; c < lp.cols.size() && ok; ++c) {
                const signed char v = lp.res.x[c] > 0.5 ? 1 : 0;
                ok = fix(full, lp.cols[c], v);
            }
            if (!ok) return;
            accept_candidate(full);
            return;
        }

        Fixing one = f;
        if (fix(one, branch_var, 1)) explore(std::move(one), timed_out, bound_out, false);
        Fixing zero = std::move(f);
        if (fix(zero, branch_var, 0)) explore(std::move(zero), timed_out, bound_out, false);
    }

    void accept_candidate(const Fixing& f) {
        std::vector<char> pts(n_points_, 0), cells(n_cells_, 0);
        for (std::size_t v = 0; v < n_points_; ++v) pts[v] = f.value[v] == 1 ? 1 : 0;
        for (std::size_t c = 0; c < n_cells_; ++c)
            cells[c] = f.value[n_points_ + c] == 1 ? 1 : 0;

        // exact feasibility: equalities, every conflict, every emission row
        for (std::size_t cell = 0; cell < n_cells_; ++cell) {
            int sum = cells[cell];
            for (int w : inst_.stack_vars[cell]) sum += pts[static_cast<std::size_t>(w)];
            if (sum != 1) return;
        }
        for (const auto& [a, b] : inst_.conflicts)
            if (pts[static_cast<std::size_t>(a)] + pts[static_cast<std::size_t>(b)] > 1) return;
        for (std::size_t p = 0; p < inst_.emissions.size(); ++p) {
            double lhs = 0.0;
            for (std::size_t v = 0; v < n_points_; ++v)
                if (pts[v]) lhs += inst_.emission_coeff(static_cast<int>(v), p);
            for (std::size_t cell = 0; cell < n_cells_; ++cell)
                if (cells[cell]) lhs += inst_.penalty_coeff(static_cast<int>(cell), p);
            if (lhs > inst_.emissions.limit[p] + 1e-9) return;
        }

        double obj = 0.0;
        for (std::size_t v = 0; v < n_points_; ++v)
            if (pts[v]) obj += inst_.points[v].prey;
        if (!have_incumbent_ || obj > best_obj_ + 1e-12) {
            have_incumbent_ = true;
            best_obj_ = obj;
            best_points_ = std::move(pts);
            best_cells_ = std::move(cells);
        }
    }

    const IlpInstance& inst_;
    std::size_t n_points_;
    std::size_t n_cells_;
    std::chrono::steady_clock::time_point deadline_;
    std::vector<std::vector<int>> conflict_of_;
    std::set<int> active_conflicts_;
    bool have_incumbent_ = false;
    double best_obj_ = 0.0;
    std::vector<char> best_points_;
    std::vector<char> best_cells_;
    std::size_t nodes_ = 0;
    std::size_t lp_iterations_ = 0;
};

}  // namespace

IlpSolution solve(const IlpInstance& instance, double time_limit_s) {
    BranchAndBound bb(instance, time_limit_s);
    return bb.run();
}

VerifyReport verify_solution(const IlpInstance& instance, const std::vector<char>& point_assign,
                             const std::vector<char>& cell_assign, const Vec& deltas) {
    VerifyReport rep;
    if (point_assign.size() != instance.points.size() ||
        cell_assign.size() != instance.num_cells())
        throw std::invalid_argument("verify_solution: assignment size mismatch");

    for (std::size_t cell = 0; cell < instance.num_cells(); ++cell) {
        int sum = cell_assign[cell];
        for (int w : instance.stack_vars[cell]) sum += point_assign[static_cast<std::size_t>(w)];
        if (sum != 1) ++rep.equality_violations;
    }
    for (const auto& [a, b] : instance.conflicts)
        if (point_assign[static_cast<std::size_t>(a)] +
                point_assign[static_cast<std::size_t>(b)] >
            1)
            ++rep.conflict_violations;

    // drivability re-derived from the raw actuator values
    const int k = instance.k;
    std::vector<int> chosen(instance.num_cells(), -1);
    for (std::size_t v = 0; v < instance.points.size(); ++v)
        if (point_assign[v]) chosen[static_cast<std::size_t>(instance.points[v].cell)] =
            static_cast<int>(v);
    for (int f = 0; f < k; ++f) {
        for (int t = 0; t < k; ++t) {
            const int v1 = chosen[static_cast<std::size_t>(f * k + t)];
            if (v1 < 0) continue;
            for (int side = 0; side < 2; ++side) {
                const int ff = f + (side == 0 ? 1 : 0);
                const int tt = t + (side == 0 ? 0 : 1);
                if (ff >= k || tt >= k) continue;
                const int v2 = chosen[static_cast<std::size_t>(ff * k + tt)];
                if (v2 < 0) continue;
                const Vec& uq = instance.points[static_cast<std::size_t>(v1)].u;
                const Vec& ur = instance.points[static_cast<std::size_t>(v2)].u;
                for (std::size_t a = 0; a < deltas.size(); ++a)
                    if (std::abs(uq[a] - ur[a]) >= deltas[a]) {
                        ++rep.drivability_violations;
                        break;
                    }
            }
        }
    }

    rep.emission_total.assign(instance.emissions.size(), 0.0);
    rep.emission_slack.assign(instance.emissions.size(), 0.0);
    for (std::size_t p = 0; p < instance.emissions.size(); ++p) {
        double lhs = 0.0;
        for (std::size_t v = 0; v < instance.points.size(); ++v)
            if (point_assign[v]) lhs += instance.emission_coeff(static_cast<int>(v), p);
        for (std::size_t cell = 0; cell < instance.num_cells(); ++cell)
            if (cell_assign[cell]) lhs += instance.penalty_coeff(static_cast<int>(cell), p);
        rep.emission_total[p] = lhs;
        rep.emission_slack[p] = instance.emissions.limit[p] - lhs;
    }

    bool emissions_ok = true;
    for (double s : rep.emission_slack)
        if (s < -1e-9) emissions_ok = false;
    rep.ok = rep.equality_violations == 0 && rep.conflict_violations == 0 &&
             rep.drivability_violations == 0 && emissions_ok;
    return rep;
}

SolutionMap solution_from_ilp(const IlpInstance& instance, const IlpSolution& solution,
                              const Dataset& dataset) {
    SolutionMap map(instance.k);
    for (std::size_t v = 0; v < instance.points.size(); ++v) {
        if (!solution.point_assign.empty() && solution.point_assign[v]) {
            const auto& c = instance.points[v];
            SolutionCell& cell = map.cells[static_cast<std::size_t>(c.cell)];
            cell.state = SolutionCell::State::chosen;
            cell.seq = c.seq;
            cell.u = dataset[c.seq].u;
            cell.y = dataset[c.seq].y;
        }
    }
    return map;
}

}  // namespace adcal
