#pragma once

#include <vector>

#include "adcal/types.hpp"

namespace adcal {

/// maximize c.x subject to row constraints and x >= 0.
struct LpRow {
    Vec a;
    double rhs = 0.0;
    char type = 'L';  // 'L' <=, 'E' ==, 'G' >=
};

struct LpProblem {
    std::size_t n = 0;
    Vec c;
    std::vector<LpRow> rows;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Vec x;
    double objective = 0.0;
    std::size_t iterations = 0;
};

/// Dense two-phase tableau simplex. Dantzig pricing with a Bland fallback
/// against cycling.
LpResult solve_lp(const LpProblem& problem);

}  // namespace adcal
