#include "adcal/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace adcal {

namespace {

struct DistEntry {
    double d2;
    int idx;
};

inline bool lex_less(const DistEntry& a, const DistEntry& b, std::size_t& comparisons) {
    ++comparisons;
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return a.idx < b.idx;
}

// Iterative quickselect (median-of-three pivot) for the n-th smallest entry
// under (distance, index) order; expected linear time.
void quickselect(std::vector<DistEntry>& v, std::size_t nth, std::size_t& comparisons) {
    std::size_t lo = 0, hi = v.size();
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        // median of three as pivot
        auto& a = v[lo];
        auto& b = v[mid];
        auto& c = v[hi - 1];
        if (lex_less(b, a, comparisons)) std::swap(a, b);
        if (lex_less(c, b, comparisons)) std::swap(b, c);
        if (lex_less(b, a, comparisons)) std::swap(a, b);
        const DistEntry pivot = b;

        std::size_t i = lo, j = hi - 1;
        while (i <= j) {
            while (lex_less(v[i], pivot, comparisons)) ++i;
            while (lex_less(pivot, v[j], comparisons)) --j;
            if (i <= j) {
                std::swap(v[i], v[j]);
                ++i;
                if (j == 0) break;
                --j;
            }
        }
        if (nth <= j)
            hi = j + 1;
        else if (nth >= i)
            lo = i;
        else
            return;
    }
}

}  // namespace

std::vector<int> nearest_neighbors(const std::vector<Vec>& points, std::size_t query,
                                   std::size_t n_select, NeighborQueryStats* stats) {
    if (query >= points.size()) throw std::out_of_range("nearest_neighbors: bad query index");
    if (points.size() <= n_select)
        throw std::invalid_argument("nearest_neighbors: dataset too small");
    if (n_select == 0) return {};

    NeighborQueryStats local;
    NeighborQueryStats& st = stats ? *stats : local;

    // Sweep 1: distances to every other point.
    std::vector<DistEntry> entries;
    entries.reserve(points.size() - 1);
    const Vec& q = points[query];
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i == query) continue;
        entries.push_back({l2_dist_sq(q, points[i]), static_cast<int>(i)});
        ++st.distance_evals;
    }

    // Selection of the n-th smallest, then sweep 2 gathers the winners.
    quickselect(entries, n_select - 1, st.comparisons);
    const DistEntry nth = entries[n_select - 1];
    std::vector<int> result;
    result.reserve(n_select);
    for (const auto& e : entries) {
        ++st.comparisons;
        if (e.d2 < nth.d2 || (e.d2 == nth.d2 && e.idx <= nth.idx)) result.push_back(e.idx);
    }
    // the winners are few; order them deterministically
    std::sort(result.begin(), result.end(), [&](int a, int b) {
        const double da = l2_dist_sq(q, points[static_cast<std::size_t>(a)]);
        const double db = l2_dist_sq(q, points[static_cast<std::size_t>(b)]);
        if (da != db) return da < db;
        return a < b;
    });
    result.resize(n_select);
    return result;
}

namespace {

void quadratic_basis(const Vec& x, std::size_t dim, double* row) {
    std::size_t c = 0;
    row[c++] = 1.0;
    for (std::size_t i = 0; i < dim; ++i) row[c++] = x[i];
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i; j < dim; ++j) row[c++] = x[i] * x[j];
}

}  // namespace

Vec LocalFit::evaluate(const Vec& x) const {
    const std::size_t nb = quadratic_fit_size(dim);
    Vec xs(dim);
    for (std::size_t i = 0; i < dim; ++i) xs[i] = (x[i] - shift[i]) / scale;
    std::vector<double> row(nb);
    quadratic_basis(xs, dim, row.data());
    Vec out(coeffs.size(), 0.0);
    for (std::size_t c = 0; c < coeffs.size(); ++c) {
        double s = 0.0;
        for (std::size_t b = 0; b < nb; ++b) s += coeffs[c][b] * row[b];
        out[c] = s;
    }
    return out;
}

double LocalFit::evaluate_one(const Vec& x, std::size_t col) const {
    const std::size_t nb = quadratic_fit_size(dim);
    Vec xs(dim);
    for (std::size_t i = 0; i < dim; ++i) xs[i] = (x[i] - shift[i]) / scale;
    std::vector<double> row(nb);
    quadratic_basis(xs, dim, row.data());
    double s = 0.0;
    for (std::size_t b = 0; b < nb; ++b) s += coeffs[col][b] * row[b];
    return s;
}

LocalFit newton_fit(const std::vector<Vec>& sites, const std::vector<Vec>& values,
                    std::size_t dim) {
    const std::size_t n_basis = quadratic_fit_size(dim);
    const std::size_t p = sites.size();
    if (p < n_basis) throw std::invalid_argument("newton_fit: too few interpolation points");
    if (values.size() != p) throw std::invalid_argument("newton_fit: site/value count mismatch");

    LocalFit fit;
    fit.dim = dim;
    fit.shift.assign(dim, 0.0);
    for (const auto& s : sites)
        for (std::size_t i = 0; i < dim; ++i) fit.shift[i] += s[i] / static_cast<double>(p);
    double radius = 0.0;
    for (const auto& s : sites) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) r2 += sq(s[i] - fit.shift[i]);
        radius = std::max(radius, std::sqrt(r2));
    }
    fit.scale = radius > 0.0 ? radius : 1.0;

    Eigen::MatrixXd A(p, n_basis);
    Vec xs(dim);
    std::vector<double> row(n_basis);
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t i = 0; i < dim; ++i) xs[i] = (sites[r][i] - fit.shift[i]) / fit.scale;
        quadratic_basis(xs, dim, row.data());
        for (std::size_t b = 0; b < n_basis; ++b) A(r, b) = row[b];
    }

    const std::size_t n_cols = values.front().size();
    Eigen::MatrixXd Y(p, n_cols);
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < n_cols; ++c) Y(r, c) = values[r][c];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-8);
    const bool full_rank = static_cast<std::size_t>(qr.rank()) == n_basis;

    const Eigen::MatrixXd C = qr.solve(Y);
    fit.coeffs.assign(n_cols, Vec(n_basis, 0.0));
    for (std::size_t c = 0; c < n_cols; ++c)
        for (std::size_t b = 0; b < n_basis; ++b) fit.coeffs[c][b] = C(b, c);

    fit.poised = (p == n_basis) && full_rank;
    fit.approximate = p > n_basis;
    return fit;
}

RefineDecision refine_symmetric_if_needed(AdaptiveGrid& grid, const Dataset& dataset,
                                          const std::vector<std::uint64_t>& reduced,
                                          std::uint64_t q_seq, const Vec& thresholds,
                                          double min_unit_edge) {
    RefineDecision decision;
    const std::size_t d = grid.dim();
    const std::size_t n_fit = quadratic_fit_size(d);
    if (reduced.size() < n_fit + 1) return decision;  // not enough data yet

    std::size_t q_pos = reduced.size();
    std::vector<Vec> unit(reduced.size());
    const auto& scaler = grid.scaler();
    for (std::size_t i = 0; i < reduced.size(); ++i) {
        unit[i] = scaler.to_unit(dataset[reduced[i]].u);
        if (reduced[i] == q_seq) q_pos = i;
    }
    if (q_pos == reduced.size())
        throw std::invalid_argument("refine_symmetric_if_needed: point not in reduced set");

    auto gather = [&](std::size_t count) {
        std::vector<Vec> sites, vals;
        for (int pos : nearest_neighbors(unit, q_pos, count)) {
            sites.push_back(unit[static_cast<std::size_t>(pos)]);
            vals.push_back(dataset[reduced[static_cast<std::size_t>(pos)]].y);
        }
        return std::make_pair(sites, vals);
    };

    auto [sites, vals] = gather(n_fit);
    LocalFit fit = newton_fit(sites, vals, d);
    if (!fit.poised) {
        // expand the neighbor set and fall back to least squares
        const std::size_t expanded = std::min(2 * n_fit, reduced.size() - 1);
        auto [sites2, vals2] = gather(expanded);
        fit = newton_fit(sites2, vals2, d);
        decision.approximate = true;
    }

    const DataPoint& q = dataset[q_seq];
    const Vec predicted = fit.evaluate(unit[q_pos]);
    decision.fitted = true;
    decision.residual.resize(q.y.size());
    bool exceed = false;
    for (std::size_t j = 0; j < q.y.size(); ++j) {
        decision.residual[j] = std::abs(predicted[j] - q.y[j]);
        if (std::isfinite(thresholds[j]) && decision.residual[j] > thresholds[j]) exceed = true;
    }
    if (exceed) {
        const int box = grid.locate(q.u);
        if (grid.unit_min_edge(box) > min_unit_edge) {
            grid.split_symmetric(box);
            decision.split = true;
        }
    }
    return decision;
}

std::optional<CrossMeasureResult> cross_measure_and_refine(AdaptiveGrid& grid,
                                                           EngineOracle& oracle, const Vec& uM,
                                                           std::size_t pollutant,
                                                           const Vec& probe_steps,
                                                           double min_unit_edge) {
    const auto& scaler = grid.scaler();
    const std::size_t d = scaler.dim();
    if (probe_steps.size() != d)
        throw std::invalid_argument("cross_measure_and_refine: probe step per dynamic axis");

    CrossMeasureResult result;
    double best = -1.0;
    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t axis = scaler.axes[i];
        const Interval& iv = scaler.intervals[i];
        Vec up = uM, dn = uM;
        up[axis] = iv.clamp(uM[axis] + probe_steps[i]);
        dn[axis] = iv.clamp(uM[axis] - probe_steps[i]);
        const Vec yp = oracle.evaluate(up);
        const Vec yn = oracle.evaluate(dn);
        result.evaluations += 2;
        if (!oracle.in_range(yp) || !oracle.in_range(yn)) return std::nullopt;
        const double impact = std::abs(yp[pollutant] - yn[pollutant]);
        if (impact > best) {
            best = impact;
            result.axis = i;
        }
    }
    const int box = grid.locate(uM);
    if (grid.unit_min_edge(box) > min_unit_edge) {
        grid.split_asymmetric(box, result.axis);
        result.split_applied = true;
    }
    return result;
}

namespace {

// Quadratic interpolation in the (freq, torq) plane for one empty interior
// cell, over reduced-set points from surrounding stacks.
bool fill_interior_cell(SolutionMap& solution, const KOperationField& field,
                        const Dataset& dataset, const std::vector<std::uint64_t>& reduced,
                        int f, int t, std::size_t freq_actuator, std::size_t torq_measurand) {
    const std::size_t n_fit = quadratic_fit_size(2);
    const int k = field.k;

    // stacks of the reduced set only
    std::vector<std::uint64_t> candidates;
    for (int ring = 1; ring < k; ++ring) {
        for (int df = -ring; df <= ring; ++df) {
            for (int dt = -ring; dt <= ring; ++dt) {
                if (std::max(std::abs(df), std::abs(dt)) != ring) continue;
                const int ff = f + df, tt = t + dt;
                if (ff < 0 || ff >= k || tt < 0 || tt >= k) continue;
                for (std::uint64_t seq : field.stacks[field.cell_index(ff, tt)])
                    candidates.push_back(seq);
            }
        }
        if (candidates.size() >= 3 * n_fit || ring == k - 1) {
            if (candidates.size() < n_fit) continue;  // widen the ring
            break;
        }
    }
    if (candidates.size() < n_fit) return false;
    std::sort(candidates.begin(), candidates.end());

    const double cf = field.cell_center_freq(f);
    const double ct = field.cell_center_torq(t);
    const double fw = field.freq_range.width();
    const double tw = field.torq_range.width();

    // order candidates by distance to the cell center in normalized OP coords
    std::vector<std::pair<double, std::uint64_t>> ranked;
    ranked.reserve(candidates.size());
    for (std::uint64_t seq : candidates) {
        const DataPoint& p = dataset[seq];
        const double df = (p.u[freq_actuator] - cf) / fw;
        const double dt = (p.y[torq_measurand] - ct) / tw;
        ranked.emplace_back(df * df + dt * dt, seq);
    }
    std::sort(ranked.begin(), ranked.end());

    auto try_fit = [&](std::size_t count) -> std::optional<LocalFit> {
        if (ranked.size() < count) return std::nullopt;
        std::vector<Vec> sites, vals;
        for (std::size_t i = 0; i < count; ++i) {
            const DataPoint& p = dataset[ranked[i].second];
            sites.push_back({p.u[freq_actuator] / fw, p.y[torq_measurand] / tw});
            Vec row = p.u;
            row.insert(row.end(), p.y.begin(), p.y.end());
            vals.push_back(std::move(row));
        }
        LocalFit fit = newton_fit(sites, vals, 2);
        if (count == n_fit && !fit.poised) return std::nullopt;
        return fit;
    };

    std::optional<LocalFit> fit = try_fit(n_fit);
    if (!fit) fit = try_fit(std::min(ranked.size(), 2 * n_fit));
    if (!fit) return false;

    const Vec out = fit->evaluate({cf / fw, ct / tw});
    SolutionCell& cell = solution.cell(f, t);
    cell.state = SolutionCell::State::synthetic;
    const std::size_t m = dataset[ranked.front().second].u.size();
    cell.u.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(m));
    cell.y.assign(out.begin() + static_cast<std::ptrdiff_t>(m), out.end());
    return true;
}

// Linear secant extrapolation from the two nearest populated cells along an
// inward direction.
bool fill_boundary_cell(SolutionMap& solution, int f, int t) {
    const int k = solution.k;
    struct Dir {
        int df, dt;
    };
    std::vector<Dir> dirs;
    if (f == 0) dirs.push_back({1, 0});
    if (f == k - 1) dirs.push_back({-1, 0});
    if (t == 0) dirs.push_back({0, 1});
    if (t == k - 1) dirs.push_back({0, -1});

    int best_cost = INT32_MAX;
    const SolutionCell* n1 = nullptr;
    const SolutionCell* n2 = nullptr;
    int j1 = 0, j2 = 0;
    for (const Dir& dir : dirs) {
        int found = 0, p1 = 0, p2 = 0;
        for (int step = 1; step < k; ++step) {
            const int ff = f + dir.df * step, tt = t + dir.dt * step;
            if (ff < 0 || ff >= k || tt < 0 || tt >= k) break;
            const SolutionCell& c = solution.cell(ff, tt);
            if (c.state == SolutionCell::State::empty) continue;
            if (found == 0)
                p1 = step;
            else
                p2 = step;
            if (++found == 2) break;
        }
        if (found == 2 && p1 + p2 < best_cost) {
            best_cost = p1 + p2;
            n1 = &solution.cell(f + dir.df * p1, t + dir.dt * p1);
            n2 = &solution.cell(f + dir.df * p2, t + dir.dt * p2);
            j1 = p1;
            j2 = p2;
        }
    }
    if (!n1) return false;

    SolutionCell& cell = solution.cell(f, t);
    cell.state = SolutionCell::State::synthetic;
    const double w = static_cast<double>(j1) / static_cast<double>(j2 - j1);
    cell.u.resize(n1->u.size());
    cell.y.resize(n1->y.size());
    // target sits at offset 0, neighbors at j1 < j2: value = v1 + (v1-v2)*j1/(j2-j1)
    for (std::size_t a = 0; a < cell.u.size(); ++a)
        cell.u[a] = n1->u[a] + (n1->u[a] - n2->u[a]) * w;
    for (std::size_t j = 0; j < cell.y.size(); ++j)
        cell.y[j] = n1->y[j] + (n1->y[j] - n2->y[j]) * w;
    return true;
}

}  // namespace

GapFillReport fill_gaps(SolutionMap& solution, const KOperationField& field,
                        const Dataset& dataset, const std::vector<std::uint64_t>& reduced,
                        std::size_t freq_actuator, std::size_t torq_measurand) {
    if (solution.k != field.k) throw std::invalid_argument("fill_gaps: k mismatch");
    GapFillReport report;
    const int k = field.k;

    KOperationField red_field = assign_stacks(dataset, reduced, k, field.freq_range,
                                              field.torq_range, freq_actuator, torq_measurand);

    for (int f = 1; f + 1 < k; ++f) {
        for (int t = 1; t + 1 < k; ++t) {
            if (solution.cell(f, t).state != SolutionCell::State::empty) continue;
            if (fill_interior_cell(solution, red_field, dataset, reduced, f, t, freq_actuator,
                                   torq_measurand))
                ++report.filled_interior;
        }
    }

    // Boundary cells may extrapolate from freshly filled interiors; sweep
    // until a pass makes no progress.
    bool progress = true;
    while (progress) {
        progress = false;
        for (int f = 0; f < k; ++f) {
            for (int t = 0; t < k; ++t) {
                const bool on_boundary = f == 0 || t == 0 || f == k - 1 || t == k - 1;
                if (!on_boundary) continue;
                if (solution.cell(f, t).state != SolutionCell::State::empty) continue;
                if (fill_boundary_cell(solution, f, t)) {
                    ++report.filled_boundary;
                    progress = true;
                }
            }
        }
    }

    for (int c = 0; c < k * k; ++c)
        if (solution.cells[static_cast<std::size_t>(c)].state == SolutionCell::State::empty)
            report.remaining.push_back(c);
    return report;
}

}  // namespace adcal
