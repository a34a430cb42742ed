#include "adcal/planner.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

#include "json.hpp"

namespace adcal {

std::string MeasurementPlan::to_json_text() const {
    nlohmann::json j;
    j["path_boxes"] = path_boxes;
    j["ell"] = ell;
    nlohmann::json w = nlohmann::json::array();
    for (const auto& u : waypoints) w.push_back(u);
    j["waypoints"] = w;
    return j.dump();
}

int sample_target_box(const AdaptiveGrid& grid, Rng& rng) {
    const std::vector<int> ids = grid.alive_ids();
    std::vector<double> weights(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) weights[i] = grid.node_weight(ids[i]);
    return ids[rng.weighted_index(weights)];
}

std::vector<int> shortest_path(const AdaptiveGrid& grid, int from, int to) {
    grid.box(from);
    grid.box(to);
    if (!grid.box(from).alive || !grid.box(to).alive)
        throw std::out_of_range("shortest_path: retired box");
    if (from == to) return {from};

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // distances indexed by box id (ids are dense over all boxes ever created)
    const std::vector<int> ids = grid.alive_ids();
    int max_id = 0;
    for (int id : ids) max_id = std::max(max_id, id);
    std::vector<double> dist(static_cast<std::size_t>(max_id) + 1, kInf);
    std::vector<int> prev(dist.size(), -1);

    using Entry = std::pair<double, int>;  // (dist, id), ties by lower id
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    dist[from] = 0.0;
    pq.emplace(0.0, from);
    while (!pq.empty()) {
        const auto [d, id] = pq.top();
        pq.pop();
        if (d > dist[id]) continue;
        if (id == to) break;
        for (int nb : grid.neighbors(id)) {
            const double nd = d + grid.edge_weight(id, nb);
            if (nd < dist[nb]) {
                dist[nb] = nd;
                prev[nb] = id;
                pq.emplace(nd, nb);
            }
        }
    }
    if (dist[to] == kInf) throw std::runtime_error("shortest_path: graph not connected");

    std::vector<int> path;
    for (int id = to; id != -1; id = prev[id]) path.push_back(id);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<Vec> build_ramp(const Vec& uq, const Vec& ur, int ell) {
    if (ell < 2) throw std::invalid_argument("build_ramp: ell must be >= 2");
    if (uq.size() != ur.size()) throw std::invalid_argument("build_ramp: size mismatch");
    std::vector<Vec> ramp(static_cast<std::size_t>(ell));
    ramp.front() = uq;
    for (int i = 1; i + 1 < ell; ++i) {
        Vec u(uq.size());
        const double t = static_cast<double>(i) / (ell - 1);
        for (std::size_t a = 0; a < u.size(); ++a) u[a] = uq[a] + t * (ur[a] - uq[a]);
        ramp[static_cast<std::size_t>(i)] = std::move(u);
    }
    ramp.back() = ur;
    return ramp;
}

namespace {

Vec sample_point_in_box(const AdaptiveGrid& grid, int box_id, Rng& rng,
                        const std::vector<Interval>& full_domain) {
    Vec u(full_domain.size());
    for (std::size_t a = 0; a < full_domain.size(); ++a) u[a] = full_domain[a].lo;
    const auto& scaler = grid.scaler();
    const GridBox& b = grid.box(box_id);
    for (std::size_t i = 0; i < scaler.dim(); ++i)
        u[scaler.axes[i]] = rng.uniform(b.bounds[i].lo, b.bounds[i].hi);
    return u;
}

}  // namespace

MeasurementPlan make_plan(const AdaptiveGrid& grid, const std::optional<Vec>& last_point,
                          int ell, Rng& rng, const std::vector<Interval>& full_domain) {
    if (ell < 2) throw std::invalid_argument("make_plan: ell must be >= 2");

    Vec start;
    if (last_point.has_value()) {
        start = *last_point;
    } else {
        start.resize(full_domain.size());
        for (std::size_t a = 0; a < full_domain.size(); ++a)
            start[a] = full_domain[a].degenerate()
                           ? full_domain[a].lo
                           : rng.uniform(full_domain[a].lo, full_domain[a].hi);
    }
    const int start_box = grid.locate(start);
    const int target = sample_target_box(grid, rng);

    MeasurementPlan plan;
    plan.ell = ell;
    plan.path_boxes = shortest_path(grid, start_box, target);
    plan.waypoints.push_back(start);
    for (std::size_t q = 1; q < plan.path_boxes.size(); ++q)
        plan.waypoints.push_back(sample_point_in_box(grid, plan.path_boxes[q], rng, full_domain));
    return plan;
}

}  // namespace adcal
