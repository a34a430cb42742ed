#include "adcal/cleaning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace adcal {

namespace {

double box_pair_gap(const GridBox& a, const GridBox& b, const DomainScaler& scaler) {
    double s = 0.0;
    for (std::size_t ax = 0; ax < a.bounds.size(); ++ax) {
        const double lo = std::max(a.bounds[ax].lo, b.bounds[ax].lo);
        const double hi = std::min(a.bounds[ax].hi, b.bounds[ax].hi);
        if (hi < lo) s += sq((lo - hi) / scaler.intervals[ax].width());
    }
    return std::sqrt(s);
}

}  // namespace

ThresholdGraph build_threshold_graph(const Dataset& dataset,
                                     const std::vector<std::uint64_t>& subset,
                                     const AdaptiveGrid& grid, double c) {
    ThresholdGraph g;
    g.nodes = subset;
    g.adjacency.assign(subset.size(), {});

    const auto& scaler = grid.scaler();
    std::vector<Vec> unit(subset.size());
    std::vector<int> box_id(subset.size());
    std::map<int, std::vector<int>> members;  // box id -> node positions
    for (std::size_t i = 0; i < subset.size(); ++i) {
        const DataPoint& p = dataset[subset[i]];
        unit[i] = scaler.to_unit(p.u);
        box_id[i] = grid.locate(p.u);
        members[box_id[i]].push_back(static_cast<int>(i));
    }

    std::map<int, double> scale;  // box id -> shortest unit edge
    for (const auto& [id, _] : members) scale[id] = grid.unit_min_edge(id);

    auto link = [&](int i, int j) {
        const double tau = c * std::min(scale[box_id[i]], scale[box_id[j]]);
        if (l2_dist(unit[i], unit[j]) < tau) {
            g.adjacency[i].push_back(j);
            g.adjacency[j].push_back(i);
            ++g.num_edges;
        }
    };

    // Candidate pairs only between boxes whose gap can beat the threshold.
    for (auto ita = members.begin(); ita != members.end(); ++ita) {
        for (auto itb = ita; itb != members.end(); ++itb) {
            const double tau = c * std::min(scale[ita->first], scale[itb->first]);
            if (ita != itb &&
                box_pair_gap(grid.box(ita->first), grid.box(itb->first), scaler) >= tau)
                continue;
            if (ita == itb) {
                const auto& v = ita->second;
                for (std::size_t x = 0; x < v.size(); ++x)
                    for (std::size_t y = x + 1; y < v.size(); ++y) link(v[x], v[y]);
            } else {
                for (int i : ita->second)
                    for (int j : itb->second) link(i, j);
            }
        }
    }
    for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
    return g;
}

ThresholdGraph build_threshold_graph(const Dataset& dataset, const AdaptiveGrid& grid, double c) {
    std::vector<std::uint64_t> all(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return build_threshold_graph(dataset, all, grid, c);
}

CompressResult compress(const Dataset& dataset, const AdaptiveGrid& grid, double c) {
    std::vector<std::uint64_t> all(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return compress(dataset, all, grid, c);
}

CompressResult compress(const Dataset& dataset, const std::vector<std::uint64_t>& subset,
                        const AdaptiveGrid& grid, double c) {
    ThresholdGraph g = build_threshold_graph(dataset, subset, grid, c);
    const std::size_t n = g.nodes.size();
    std::vector<int> degree(n, 0);
    std::vector<char> removed(n, 0);
    for (std::size_t i = 0; i < n; ++i) degree[i] = static_cast<int>(g.adjacency[i].size());

    // Max-degree selection with lazy heap entries; ties by lowest sequence
    // number, which equals node position here (subset is ascending).
    using Entry = std::pair<int, int>;  // (degree, -position)
    std::priority_queue<Entry> heap;
    for (std::size_t i = 0; i < n; ++i)
        if (degree[i] > 0) heap.emplace(degree[i], -static_cast<int>(i));

    CompressResult result;
    while (!heap.empty()) {
        const auto [deg, neg_pos] = heap.top();
        heap.pop();
        const int pos = -neg_pos;
        if (removed[pos] || degree[pos] != deg) continue;  // stale entry
        if (deg == 0) break;

        removed[pos] = 1;
        std::uint64_t witness = 0;
        bool have_witness = false;
        for (int nb : g.adjacency[pos]) {
            if (removed[nb]) continue;
            if (!have_witness) {
                witness = g.nodes[nb];
                have_witness = true;
            }
            if (--degree[nb] > 0) heap.emplace(degree[nb], -nb);
        }
        result.removals.push_back({g.nodes[pos], witness});
        degree[pos] = 0;
    }

    for (std::size_t i = 0; i < n; ++i)
        if (!removed[i]) result.kept.push_back(g.nodes[i]);
    return result;
}

}  // namespace adcal
