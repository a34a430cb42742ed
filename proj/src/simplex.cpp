#include "adcal/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adcal {

namespace {

constexpr double kTol = 1e-9;

struct Tableau {
    std::size_t m = 0;
    std::size_t cols = 0;  // without rhs
    std::vector<Vec> t;    // m rows, cols+1 entries each (rhs last)
    Vec z;                 // reduced-cost row, cols+1 entries
    std::vector<std::size_t> basis;

    void pivot(std::size_t row, std::size_t col) {
        Vec& pr = t[row];
        const double pv = pr[col];
        for (double& v : pr) v /= pv;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == row) continue;
            const double f = t[r][col];
            if (f == 0.0) continue;
            Vec& tr = t[r];
            for (std::size_t c2 = 0; c2 <= cols; ++c2) tr[c2] -= f * pr[c2];
        }
        const double f = z[col];
        if (f != 0.0)
            for (std::size_t c2 = 0; c2 <= cols; ++c2) z[c2] -= f * pr[c2];
        basis[row] = col;
    }

    // Rebuilds the reduced-cost row for minimization costs d.
    void set_costs(const Vec& d) {
        z.assign(cols + 1, 0.0);
        for (std::size_t c = 0; c < cols; ++c) z[c] = d[c];
        for (std::size_t r = 0; r < m; ++r) {
            const double db = d[basis[r]];
            if (db == 0.0) continue;
            for (std::size_t c = 0; c <= cols; ++c) z[c] -= db * t[r][c];
        }
    }

    // Minimizes d.x given current z row; banned columns never enter.
    // Returns false on unbounded.
    bool iterate(const std::vector<char>& banned, std::size_t& iterations) {
        std::size_t stall = 0;
        double last_obj = std::numeric_limits<double>::infinity();
        while (true) {
            const bool bland = stall > 2 * (m + cols);
            std::size_t enter = cols;
            double best = -kTol;
            for (std::size_t c = 0; c < cols; ++c) {
                if (banned[c]) continue;
                if (z[c] < best) {
                    best = z[c];
                    enter = c;
                    if (bland) break;  // first eligible index
                }
            }
            if (enter == cols) return true;  // optimal

            std::size_t leave = m;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m; ++r) {
                const double a = t[r][enter];
                if (a > kTol) {
                    const double ratio = t[r][cols] / a;
                    if (ratio < best_ratio - kTol ||
                        (ratio < best_ratio + kTol && (leave == m || basis[r] < basis[leave]))) {
                        best_ratio = ratio;
                        leave = r;
                    }
                }
            }
            if (leave == m) return false;  // unbounded

            pivot(leave, enter);
            ++iterations;
            const double obj = -z[cols];
            if (obj < last_obj - kTol) {
                stall = 0;
                last_obj = obj;
            } else {
                ++stall;
            }
            if (iterations > 200000)
                throw std::runtime_error("simplex: iteration limit exceeded");
        }
    }
};

}  // namespace

LpResult solve_lp(const LpProblem& problem) {
    const std::size_t n = problem.n;
    std::vector<LpRow> rows = problem.rows;

    // normalize rhs >= 0
    for (auto& r : rows) {
        if (r.a.size() != n) throw std::invalid_argument("solve_lp: row size mismatch");
        if (r.rhs < 0.0) {
            for (double& v : r.a) v = -v;
            r.rhs = -r.rhs;
            if (r.type == 'L')
                r.type = 'G';
            else if (r.type == 'G')
                r.type = 'L';
        }
    }

    const std::size_t m = rows.size();
    std::size_t n_slack = 0, n_art = 0;
    for (const auto& r : rows) {
        if (r.type == 'L' || r.type == 'G') ++n_slack;
        if (r.type == 'E' || r.type == 'G') ++n_art;
    }

    Tableau tab;
    tab.m = m;
    tab.cols = n + n_slack + n_art;
    tab.t.assign(m, Vec(tab.cols + 1, 0.0));
    tab.basis.assign(m, 0);

    std::vector<char> is_artificial(tab.cols, 0);
    std::size_t slack_at = n, art_at = n + n_slack;
    for (std::size_t r = 0; r < m; ++r) {
        Vec& row = tab.t[r];
        for (std::size_t c = 0; c < n; ++c) row[c] = rows[r].a[c];
        row[tab.cols] = rows[r].rhs;
        if (rows[r].type == 'L') {
            row[slack_at] = 1.0;
            tab.basis[r] = slack_at++;
        } else if (rows[r].type == 'G') {
            row[slack_at] = -1.0;
            ++slack_at;
            row[art_at] = 1.0;
            is_artificial[art_at] = 1;
            tab.basis[r] = art_at++;
        } else {
            row[art_at] = 1.0;
            is_artificial[art_at] = 1;
            tab.basis[r] = art_at++;
        }
    }

    LpResult result;
    std::vector<char> no_ban(tab.cols, 0);

    if (n_art > 0) {
        Vec phase1(tab.cols, 0.0);
        for (std::size_t c = 0; c < tab.cols; ++c)
            if (is_artificial[c]) phase1[c] = 1.0;
        tab.set_costs(phase1);
        if (!tab.iterate(no_ban, result.iterations))
            throw std::runtime_error("simplex: phase 1 unbounded");
        if (-tab.z[tab.cols] > 1e-7) {
            result.status = LpStatus::infeasible;
            return result;
        }
        // drive leftover artificials out of the basis where possible
        for (std::size_t r = 0; r < m; ++r) {
            if (!is_artificial[tab.basis[r]]) continue;
            for (std::size_t c = 0; c < tab.cols; ++c) {
                if (is_artificial[c]) continue;
                if (std::abs(tab.t[r][c]) > kTol) {
                    tab.pivot(r, c);
                    break;
                }
            }
        }
    }

    Vec phase2(tab.cols, 0.0);
    for (std::size_t c = 0; c < n; ++c) phase2[c] = -problem.c[c];  // maximize
    tab.set_costs(phase2);
    std::vector<char> ban = is_artificial;
    if (!tab.iterate(ban, result.iterations)) {
        result.status = LpStatus::unbounded;
        return result;
    }

    result.status = LpStatus::optimal;
    result.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (tab.basis[r] < n) result.x[tab.basis[r]] = tab.t[r][tab.cols];
    result.objective = 0.0;
    for (std::size_t c = 0; c < n; ++c) result.objective += problem.c[c] * result.x[c];
    return result;
}

}  // namespace adcal
