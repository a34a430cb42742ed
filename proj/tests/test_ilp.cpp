#include <algorithm>
#include <cmath>
#include <functional>

#include "adcal/ilp.hpp"
#include "adcal/rng.hpp"
#include "doctest.h"

using namespace adcal;

namespace {

// measurand layout for these tests: y = (torque, fuel, rateA, rateB)
constexpr std::size_t kTorq = 0, kFuel = 1;

struct RandomInstance {
    Dataset dataset;
    KOperationField field;
    DrivingCycleWeights weights;
    Vec deltas;
    EmissionModel emissions;

    RandomInstance() : field(3, Interval(0, 3), Interval(0, 3)) {}
};

RandomInstance make_random_instance(Rng& rng, int k = 3, std::size_t max_per_stack = 4) {
    RandomInstance ri;
    ri.field = KOperationField(k, Interval(0, k), Interval(0, k));
    std::vector<std::uint64_t> all;
    double max_rate_a = 0.0, max_rate_b = 0.0;
    for (int f = 0; f < k; ++f) {
        for (int t = 0; t < k; ++t) {
            const std::size_t n = rng.uniform_index(max_per_stack + 1);
            for (std::size_t i = 0; i < n; ++i) {
                Vec u = {f + rng.uniform01(), rng.uniform01(), rng.uniform01()};
                Vec y = {t + rng.uniform01(), 0.5 + rng.uniform01(),  // fuel > 0
                         rng.uniform01(), rng.uniform01()};
                max_rate_a = std::max(max_rate_a, y[2]);
                max_rate_b = std::max(max_rate_b, y[3]);
                all.push_back(ri.dataset.append(std::move(u), std::move(y)));
            }
        }
    }
    ri.field = assign_stacks(ri.dataset, all, k, Interval(0, k), Interval(0, k), 0, kTorq);

    ri.weights.omega.assign(static_cast<std::size_t>(k) * k, 0.0);
    for (double& w : ri.weights.omega)
        if (rng.uniform01() > 0.25) w = rng.uniform(0.0, 10.0);
    ri.weights.total_time = 0.0;

    ri.deltas = {rng.uniform(0.8, 3.5), rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5)};

    ri.emissions.pollutants = {2, 3};
    ri.emissions.names = {"rateA", "rateB"};
    ri.emissions.upper = {max_rate_a * 1.1 + 0.3, max_rate_b * 1.1 + 0.3};
    ri.emissions.unit_factor = 1.0;

    // place limits across the interesting band
    Vec all_penalty(2, 0.0), best_case(2, 0.0);
    for (std::size_t p = 0; p < 2; ++p) {
        for (std::size_t cell = 0; cell < ri.weights.omega.size(); ++cell) {
            const double pen = ri.weights.omega[cell] * ri.emissions.upper[p];
            double best = pen;
            for (std::uint64_t seq : ri.field.stacks[cell])
                best = std::min(best,
                                ri.weights.omega[cell] * ri.dataset[seq].y[2 + p]);
            all_penalty[p] += pen;
            best_case[p] += best;
        }
        const double lam = rng.uniform(-0.05, 1.1);
        ri.emissions.limit.push_back(best_case[p] +
                                     lam * (all_penalty[p] - best_case[p]));
    }
    return ri;
}

struct BruteResult {
    bool feasible = false;
    double objective = 0.0;
};

// exhaustive enumeration over all per-stack choices, independent of the solver
BruteResult brute_force(const IlpInstance& inst) {
    const std::size_t cells = inst.num_cells();
    BruteResult best;

    std::vector<int> choice(cells, -1);  // -1 penalty, else var index
    std::vector<std::vector<int>> conf(inst.points.size());
    for (const auto& [a, b] : inst.conflicts) {
        conf[static_cast<std::size_t>(a)].push_back(b);
        conf[static_cast<std::size_t>(b)].push_back(a);
    }

    Vec lhs(inst.emissions.size(), 0.0);
    std::function<void(std::size_t, double)> dfs = [&](std::size_t cell, double obj) {
        if (cell == cells) {
            for (std::size_t p = 0; p < lhs.size(); ++p)
                if (lhs[p] > inst.emissions.limit[p] + 1e-12) return;
            if (!best.feasible || obj > best.objective) {
                best.feasible = true;
                best.objective = obj;
            }
            return;
        }
        auto try_choice = [&](int var) {
            Vec delta(lhs.size());
            for (std::size_t p = 0; p < lhs.size(); ++p) {
                delta[p] = var < 0 ? inst.penalty_coeff(static_cast<int>(cell), p)
                                   : inst.emission_coeff(var, p);
                lhs[p] += delta[p];
            }
            bool over = false;  // coefficients are nonnegative; prune early
            for (std::size_t p = 0; p < lhs.size(); ++p)
                if (lhs[p] > inst.emissions.limit[p] + 1e-12) over = true;
            bool conflicted = false;
            if (var >= 0) {
                for (int other : conf[static_cast<std::size_t>(var)]) {
                    const int oc = inst.points[static_cast<std::size_t>(other)].cell;
                    // only cells already assigned (row-major order)
                    if (oc < static_cast<int>(cell) &&
                        choice[static_cast<std::size_t>(oc)] == other) {
                        conflicted = true;
                        break;
                    }
                }
            }
            if (!over && !conflicted) {
                choice[cell] = var;
                dfs(cell + 1,
                    obj + (var >= 0 ? inst.points[static_cast<std::size_t>(var)].prey : 0.0));
                choice[cell] = -2;
            }
            for (std::size_t p = 0; p < lhs.size(); ++p) lhs[p] -= delta[p];
        };

        try_choice(-1);
        for (int var : inst.stack_vars[cell]) try_choice(var);
    };
    dfs(0, 0.0);
    return best;
}

}  // namespace

TEST_CASE("prey values") {
    Dataset dataset;
    // two points in one stack with fuel 5 and 10
    dataset.append({0.5, 0.0, 0.0}, {0.5, 5.0, 0.1, 0.1});
    dataset.append({0.6, 0.0, 0.0}, {0.6, 10.0, 0.1, 0.1});
    dataset.append({1.5, 0.0, 0.0}, {0.5, 7.0, 0.1, 0.1});  // singleton stack
    const KOperationField field =
        assign_stacks(dataset, {0, 1, 2}, 2, Interval(0, 2), Interval(0, 2), 0, kTorq);
    const auto prey = prey_values(field, dataset, kFuel);
    CHECK(prey[0] == 1.0);
    CHECK(prey[1] == 0.5);
    CHECK(prey[2] == 1.0);

    // scaling all fuel in a stack leaves prey unchanged
    Dataset scaled;
    scaled.append({0.5, 0.0, 0.0}, {0.5, 50.0, 0.1, 0.1});
    scaled.append({0.6, 0.0, 0.0}, {0.6, 100.0, 0.1, 0.1});
    scaled.append({1.5, 0.0, 0.0}, {0.5, 70.0, 0.1, 0.1});
    const auto prey2 = prey_values(field, scaled, kFuel);
    CHECK(prey2 == prey);

    Dataset bad;
    bad.append({0.5, 0.0, 0.0}, {0.5, -1.0, 0.1, 0.1});
    const KOperationField bf =
        assign_stacks(bad, {0}, 2, Interval(0, 2), Interval(0, 2), 0, kTorq);
    CHECK_THROWS_AS(prey_values(bf, bad, kFuel), std::invalid_argument);
}

TEST_CASE("instance structure") {
    Rng rng(71);
    RandomInstance ri = make_random_instance(rng);

    SUBCASE("infinite deltas produce no conflicts") {
        const Vec loose(3, std::numeric_limits<double>::infinity());
        const auto inst = build_instance(ri.field, ri.dataset, ri.weights, loose, ri.emissions,
                                         kFuel, {false, 0});
        CHECK(inst.conflicts.empty());
    }

    SUBCASE("conflict rows match brute-force pair enumeration") {
        const auto inst = build_instance(ri.field, ri.dataset, ri.weights, ri.deltas,
                                         ri.emissions, kFuel, {false, 0});
        std::size_t expected = 0;
        const int k = inst.k;
        for (std::size_t va = 0; va < inst.points.size(); ++va) {
            for (std::size_t vb = va + 1; vb < inst.points.size(); ++vb) {
                const int ca = inst.points[va].cell, cb = inst.points[vb].cell;
                const int dist = std::abs(ca / k - cb / k) + std::abs(ca % k - cb % k);
                if (dist != 1) continue;
                bool hit = false;
                for (std::size_t a = 0; a < ri.deltas.size(); ++a)
                    if (std::abs(inst.points[va].u[a] - inst.points[vb].u[a]) >= ri.deltas[a])
                        hit = true;
                if (hit) ++expected;
            }
        }
        CHECK(inst.conflicts.size() == expected);
        // every point var sits in exactly one stack
        std::size_t stacked = 0;
        for (const auto& s : inst.stack_vars) stacked += s.size();
        CHECK(stacked == inst.points.size());
        // prey in (0, 1]
        for (const auto& p : inst.points) {
            CHECK(p.prey > 0.0);
            CHECK(p.prey <= 1.0);
        }
    }
}

TEST_CASE("loose instance picks every stack's fuel minimizer") {
    // 2x2 field, two points per stack, no conflicts, loose emissions
    Dataset dataset;
    std::vector<std::uint64_t> all;
    for (int f = 0; f < 2; ++f) {
        for (int t = 0; t < 2; ++t) {
            all.push_back(dataset.append({f + 0.5, 0.5, 0.5}, {t + 0.5, 5.0, 0.1, 0.1}));
            all.push_back(dataset.append({f + 0.4, 0.5, 0.5}, {t + 0.4, 9.0, 0.1, 0.1}));
        }
    }
    const KOperationField field =
        assign_stacks(dataset, all, 2, Interval(0, 2), Interval(0, 2), 0, kTorq);
    DrivingCycleWeights w;
    w.omega.assign(4, 1.0);
    EmissionModel em;
    em.pollutants = {2};
    em.names = {"rateA"};
    em.upper = {1.0};
    em.limit = {100.0};
    em.unit_factor = 1.0;
    const Vec loose(3, std::numeric_limits<double>::infinity());
    const auto inst = build_instance(field, dataset, w, loose, em, kFuel);
    const auto sol = solve(inst);
    REQUIRE(sol.status == IlpStatus::optimal);
    CHECK(sol.objective == doctest::Approx(4.0));  // four prey-1 minimizers
    for (std::size_t v = 0; v < inst.points.size(); ++v)
        CHECK(static_cast<bool>(sol.point_assign[v]) == (inst.points[v].fuel == 5.0));
    CHECK(verify_solution(inst, sol.point_assign, sol.cell_assign, loose).ok);
}

TEST_CASE("empty stacks force the penalty variable") {
    Dataset dataset;
    const auto s0 = dataset.append({0.5, 0.5, 0.5}, {0.5, 5.0, 0.2, 0.2});
    const KOperationField field =
        assign_stacks(dataset, {s0}, 2, Interval(0, 2), Interval(0, 2), 0, kTorq);
    DrivingCycleWeights w;
    w.omega = {1.0, 2.0, 3.0, 4.0};
    EmissionModel em;
    em.pollutants = {2};
    em.names = {"rateA"};
    em.upper = {1.0};
    em.limit = {100.0};
    em.unit_factor = 1.0;
    const auto inst =
        build_instance(field, dataset, w, Vec(3, 1e18), em, kFuel);
    const auto sol = solve(inst);
    REQUIRE(sol.status == IlpStatus::optimal);
    std::size_t penalties = 0;
    for (char c : sol.cell_assign) penalties += c;
    CHECK(penalties == 3);
    const auto rep = verify_solution(inst, sol.point_assign, sol.cell_assign, Vec(3, 1e18));
    CHECK(rep.ok);
    // 1*0.2 for the chosen point plus (2+3+4)*1.0 of penalties
    CHECK(rep.emission_total[0] == doctest::Approx(0.2 + 9.0));
}

TEST_CASE("tight limits push the solver off the fuel minimizer") {
    // one weighted stack: the cheap point is dirty, the clean one costs fuel
    Dataset dataset;
    dataset.append({0.5, 0.5, 0.5}, {0.5, 5.0, 10.0, 0.0});  // prey 1, rate 10
    dataset.append({0.6, 0.5, 0.5}, {0.6, 8.0, 1.0, 0.0});   // prey 5/8, rate 1
    const KOperationField field =
        assign_stacks(dataset, {0, 1}, 1, Interval(0, 1), Interval(0, 1), 0, kTorq);
    DrivingCycleWeights w;
    w.omega = {1.0};
    EmissionModel em;
    em.pollutants = {2};
    em.names = {"rateA"};
    em.upper = {12.0};
    em.limit = {2.0};
    em.unit_factor = 1.0;
    const auto inst = build_instance(field, dataset, w, Vec(3, 1e18), em, kFuel);
    const auto sol = solve(inst);
    REQUIRE(sol.status == IlpStatus::optimal);
    CHECK(sol.objective == doctest::Approx(5.0 / 8.0));
    CHECK(sol.point_assign[1] == 1);
    CHECK(verify_solution(inst, sol.point_assign, sol.cell_assign, Vec(3, 1e18)).ok);
}

TEST_CASE("branch and bound matches exhaustive enumeration") {
    Rng rng(72);
    int optimal_seen = 0, infeasible_seen = 0;
    for (int trial = 0; trial < 100; ++trial) {
        RandomInstance ri = make_random_instance(rng);
        const auto pruned = build_instance(ri.field, ri.dataset, ri.weights, ri.deltas,
                                           ri.emissions, kFuel, {true, 0});
        const auto full = build_instance(ri.field, ri.dataset, ri.weights, ri.deltas,
                                         ri.emissions, kFuel, {false, 0});
        const auto sol = solve(pruned, 30.0);
        const BruteResult truth = brute_force(full);
        if (truth.feasible) {
            REQUIRE(sol.status == IlpStatus::optimal);
            CHECK(sol.objective == doctest::Approx(truth.objective).epsilon(1e-9));
            CHECK(verify_solution(pruned, sol.point_assign, sol.cell_assign, ri.deltas).ok);
            ++optimal_seen;
        } else {
            REQUIRE(sol.status == IlpStatus::infeasible);
            ++infeasible_seen;
        }
    }
    // the instance mix must exercise both outcomes
    CHECK(optimal_seen > 0);
    CHECK(infeasible_seen > 0);
}

TEST_CASE("hand-built violations are identified") {
    Rng rng(73);
    RandomInstance ri = make_random_instance(rng, 2, 3);
    const auto inst = build_instance(ri.field, ri.dataset, ri.weights, ri.deltas, ri.emissions,
                                     kFuel, {false, 0});
    std::vector<char> pts(inst.points.size(), 1);  // everything chosen at once
    std::vector<char> cells(inst.num_cells(), 1);  // and every penalty too
    const auto rep = verify_solution(inst, pts, cells, ri.deltas);
    if (!inst.points.empty()) {
        CHECK_FALSE(rep.ok);
        CHECK(rep.equality_violations > 0);
    }
}

TEST_CASE("all-penalty assignment checks only the emission budget") {
    Rng rng(74);
    RandomInstance ri = make_random_instance(rng);
    const auto inst = build_instance(ri.field, ri.dataset, ri.weights, ri.deltas, ri.emissions,
                                     kFuel, {false, 0});
    std::vector<char> pts(inst.points.size(), 0);
    std::vector<char> cells(inst.num_cells(), 1);
    const auto rep = verify_solution(inst, pts, cells, ri.deltas);
    CHECK(rep.equality_violations == 0);
    CHECK(rep.conflict_violations == 0);
    double worst = 0.0;
    for (double s : rep.emission_slack) worst = std::min(worst, s);
    CHECK(rep.ok == (worst >= -1e-9));
}

TEST_CASE("objective invariant under uniform fuel scaling") {
    Rng rng(75);
    RandomInstance ri = make_random_instance(rng);
    const auto inst1 = build_instance(ri.field, ri.dataset, ri.weights, ri.deltas, ri.emissions,
                                      kFuel, {true, 0});
    Dataset scaled;
    for (const auto& p : ri.dataset.points) {
        Vec y = p.y;
        y[kFuel] *= 7.5;
        scaled.append(p.u, y);
    }
    const auto inst2 = build_instance(ri.field, scaled, ri.weights, ri.deltas, ri.emissions,
                                      kFuel, {true, 0});
    const auto s1 = solve(inst1);
    const auto s2 = solve(inst2);
    REQUIRE(s1.status == s2.status);
    if (s1.status == IlpStatus::optimal) {
        CHECK(s1.objective == doctest::Approx(s2.objective).epsilon(1e-9));
        CHECK(s1.point_assign == s2.point_assign);
    }
}
