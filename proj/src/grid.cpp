#include "adcal/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace adcal {

using nlohmann::json;

AdaptiveGrid::AdaptiveGrid(DomainScaler scaler, const std::vector<int>& subdivisions)
    : scaler_(std::move(scaler)), dims_(subdivisions) {
    const std::size_t d = scaler_.dim();
    if (d == 0) throw std::invalid_argument("grid needs at least one dynamic axis");
    if (scaler_.intervals.size() != d || scaler_.axes.size() != d)
        throw std::invalid_argument("scaler axes/intervals mismatch");
    for (const auto& iv : scaler_.intervals)
        if (iv.width() <= 0.0) throw std::invalid_argument("dynamic axis with zero extent");
    if (dims_.size() != d) throw std::invalid_argument("subdivision count per axis required");
    for (int n : dims_)
        if (n < 1) throw std::invalid_argument("subdivisions must be >= 1");

    // Shared per-axis bound arrays so that touching boxes carry identical
    // doubles and adjacency can compare exactly.
    root_offsets_.resize(d + 1, 0);
    for (std::size_t a = 0; a < d; ++a) root_offsets_[a + 1] = root_offsets_[a] + dims_[a] + 1;
    root_bounds_.resize(root_offsets_[d]);
    for (std::size_t a = 0; a < d; ++a) {
        const Interval& iv = scaler_.intervals[a];
        for (int k = 0; k <= dims_[a]; ++k) {
            double v = iv.lo + iv.width() * (static_cast<double>(k) / dims_[a]);
            if (k == 0) v = iv.lo;
            if (k == dims_[a]) v = iv.hi;
            root_bounds_[root_offsets_[a] + k] = v;
        }
    }

    std::size_t total = 1;
    for (int n : dims_) total *= static_cast<std::size_t>(n);
    root_ids_.resize(total);
    std::vector<int> idx(d, 0);
    for (std::size_t cell = 0; cell < total; ++cell) {
        GridBox b;
        b.id = static_cast<int>(boxes_.size());
        b.bounds.resize(d);
        for (std::size_t a = 0; a < d; ++a) {
            const double* bd = &root_bounds_[root_offsets_[a]];
            b.bounds[a] = Interval(bd[idx[a]], bd[idx[a] + 1]);
        }
        root_ids_[cell] = b.id;
        boxes_.push_back(std::move(b));
        adjacency_.emplace_back();
        for (std::size_t a = d; a-- > 0;) {
            if (++idx[a] < dims_[a]) break;
            idx[a] = 0;
        }
    }
    num_alive_ = boxes_.size();

    for (std::size_t i = 0; i < boxes_.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes_.size(); ++j) {
            if (boxes_adjacent(boxes_[i], boxes_[j])) {
                adjacency_[i].push_back(static_cast<int>(j));
                adjacency_[j].push_back(static_cast<int>(i));
            }
        }
    }
    for (auto& n : adjacency_) std::sort(n.begin(), n.end());
}

void AdaptiveGrid::check_alive(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= boxes_.size() || !boxes_[id].alive)
        throw std::out_of_range("unknown or retired grid box id");
}

const GridBox& AdaptiveGrid::box(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= boxes_.size())
        throw std::out_of_range("unknown grid box id");
    return boxes_[id];
}

std::vector<int> AdaptiveGrid::alive_ids() const {
    std::vector<int> ids;
    ids.reserve(num_alive_);
    for (const auto& b : boxes_)
        if (b.alive) ids.push_back(b.id);
    return ids;
}

const std::vector<int>& AdaptiveGrid::neighbors(int id) const {
    check_alive(id);
    return adjacency_[id];
}

double AdaptiveGrid::node_weight(int id) const {
    check_alive(id);
    const GridBox& b = boxes_[id];
    return b.volume() / (static_cast<double>(b.points.size()) + 1.0);
}

bool AdaptiveGrid::adjacent(int a, int b) const {
    check_alive(a);
    check_alive(b);
    const auto& n = adjacency_[a];
    return std::binary_search(n.begin(), n.end(), b);
}

double AdaptiveGrid::edge_weight(int a, int b) const {
    if (!adjacent(a, b)) throw std::invalid_argument("edge_weight: boxes are not adjacent");
    const GridBox& ba = boxes_[a];
    const GridBox& bb = boxes_[b];
    const double n = static_cast<double>(ba.points.size() + bb.points.size());
    return (ba.volume() + bb.volume()) / (n + 1.0);
}

double AdaptiveGrid::unit_min_edge(int id) const {
    check_alive(id);
    const GridBox& b = boxes_[id];
    double e = 1.0;
    for (std::size_t a = 0; a < b.bounds.size(); ++a)
        e = std::min(e, b.bounds[a].width() / scaler_.intervals[a].width());
    return e;
}

bool AdaptiveGrid::boxes_adjacent(const GridBox& a, const GridBox& b) const {
    // Adjacent iff the closures meet in a facet: exactly one axis touches
    // end-to-end and every other axis overlaps with positive length.
    std::size_t touching = 0;
    for (std::size_t ax = 0; ax < a.bounds.size(); ++ax) {
        const auto& ia = a.bounds[ax];
        const auto& ib = b.bounds[ax];
        const double lo = std::max(ia.lo, ib.lo);
        const double hi = std::min(ia.hi, ib.hi);
        if (hi > lo) continue;  // positive overlap
        if (hi == lo && (ia.hi == ib.lo || ib.hi == ia.lo)) {
            ++touching;
            continue;
        }
        return false;  // disjoint on this axis
    }
    return touching == 1;
}

int AdaptiveGrid::locate_dyn(const Vec& p) const {
    const std::size_t d = dim();
    std::size_t cell = 0;
    for (std::size_t a = 0; a < d; ++a) {
        const Interval& iv = scaler_.intervals[a];
        if (p[a] < iv.lo || p[a] > iv.hi) throw std::domain_error("locate: point outside domain");
        int k = static_cast<int>(std::floor((p[a] - iv.lo) / iv.width() * dims_[a]));
        if (k >= dims_[a]) k = dims_[a] - 1;  // upper face closed
        if (k < 0) k = 0;
        // floor() can land one cell off at shared bounds; enforce half-open.
        const double* bd = &root_bounds_[root_offsets_[a]];
        while (k > 0 && p[a] < bd[k]) --k;
        while (k < dims_[a] - 1 && p[a] >= bd[k + 1]) ++k;
        cell = cell * dims_[a] + static_cast<std::size_t>(k);
    }
    int id = root_ids_[cell];
    while (!boxes_[id].alive) {
        const GridBox& b = boxes_[id];
        if (b.split_axis >= 0) {
            const double mid = boxes_[b.children[0]].bounds[b.split_axis].hi;
            id = p[b.split_axis] >= mid ? b.children[1] : b.children[0];
        } else {
            // symmetric: children stored in bitmask order, bit a set = upper half
            std::size_t mask = 0;
            for (std::size_t a = 0; a < d; ++a) {
                const double mid = boxes_[b.children[0]].bounds[a].hi;
                if (p[a] >= mid) mask |= (std::size_t{1} << a);
            }
            id = b.children[mask];
        }
    }
    return id;
}

int AdaptiveGrid::locate(const Vec& u_full) const { return locate_dyn(scaler_.project(u_full)); }

void AdaptiveGrid::add_point(int point_id, const Vec& u_full) {
    if (point_id != static_cast<int>(points_dyn_.size()))
        throw std::invalid_argument("add_point: ids must arrive in increasing order");
    Vec p = scaler_.project(u_full);
    const int id = locate_dyn(p);
    points_dyn_.push_back(std::move(p));
    point_box_.push_back(id);
    boxes_[id].points.push_back(point_id);
}

int AdaptiveGrid::box_of_point(int point_id) const {
    if (point_id < 0 || static_cast<std::size_t>(point_id) >= point_box_.size())
        throw std::out_of_range("unknown point id");
    return point_box_[point_id];
}

std::vector<int> AdaptiveGrid::replace_with_children(int id, std::vector<GridBox> children,
                                                     int axis) {
    const std::vector<int> old_neighbors = adjacency_[id];
    const std::vector<int> parent_points = boxes_[id].points;

    std::vector<int> child_ids;
    for (auto& c : children) {
        c.id = static_cast<int>(boxes_.size());
        c.parent = id;
        child_ids.push_back(c.id);
        boxes_.push_back(std::move(c));  // may reallocate; re-fetch parent below
        adjacency_.emplace_back();
    }

    GridBox& parent = boxes_[id];
    parent.alive = false;
    parent.split_axis = axis;
    parent.children = child_ids;
    parent.points.clear();
    num_alive_ += child_ids.size() - 1;

    for (int p : parent_points) {
        const int cid = locate_dyn(points_dyn_[p]);
        boxes_[cid].points.push_back(p);
        point_box_[p] = cid;
    }

    // Local adjacency rebuild: children among themselves, then children
    // against the parent's former neighbors.
    for (std::size_t i = 0; i < child_ids.size(); ++i) {
        for (std::size_t j = i + 1; j < child_ids.size(); ++j) {
            if (boxes_adjacent(boxes_[child_ids[i]], boxes_[child_ids[j]])) {
                adjacency_[child_ids[i]].push_back(child_ids[j]);
                adjacency_[child_ids[j]].push_back(child_ids[i]);
            }
        }
    }
    for (int nb : old_neighbors) {
        auto& nlist = adjacency_[nb];
        nlist.erase(std::remove(nlist.begin(), nlist.end(), id), nlist.end());
        for (int cid : child_ids) {
            if (boxes_adjacent(boxes_[cid], boxes_[nb])) {
                adjacency_[cid].push_back(nb);
                nlist.push_back(cid);
            }
        }
        std::sort(nlist.begin(), nlist.end());
    }
    for (int cid : child_ids) std::sort(adjacency_[cid].begin(), adjacency_[cid].end());
    adjacency_[id].clear();

    splits_.push_back({id, axis, child_ids});
    return child_ids;
}

std::vector<int> AdaptiveGrid::split_symmetric(int id) {
    check_alive(id);
    const GridBox parent = boxes_[id];
    const std::size_t d = dim();
    std::vector<GridBox> children(std::size_t{1} << d);
    for (std::size_t mask = 0; mask < children.size(); ++mask) {
        GridBox c;
        c.bounds.resize(d);
        for (std::size_t a = 0; a < d; ++a) {
            const double mid = 0.5 * (parent.bounds[a].lo + parent.bounds[a].hi);
            c.bounds[a] = (mask >> a) & 1 ? Interval(mid, parent.bounds[a].hi)
                                          : Interval(parent.bounds[a].lo, mid);
        }
        children[mask] = std::move(c);
    }
    return replace_with_children(id, std::move(children), -2);
}

std::vector<int> AdaptiveGrid::split_asymmetric(int id, std::size_t axis) {
    check_alive(id);
    if (axis >= dim()) throw std::invalid_argument("split_asymmetric: static or unknown axis");
    const GridBox parent = boxes_[id];
    const double mid = 0.5 * (parent.bounds[axis].lo + parent.bounds[axis].hi);
    GridBox lower, upper;
    lower.bounds = parent.bounds;
    upper.bounds = parent.bounds;
    lower.bounds[axis] = Interval(parent.bounds[axis].lo, mid);
    upper.bounds[axis] = Interval(mid, parent.bounds[axis].hi);
    std::vector<GridBox> children;
    children.push_back(std::move(lower));
    children.push_back(std::move(upper));
    return replace_with_children(id, std::move(children), static_cast<int>(axis));
}

std::string AdaptiveGrid::to_json_text() const {
    json j;
    j["schema_version"] = 1;
    json axes = json::array();
    for (std::size_t i = 0; i < scaler_.axes.size(); ++i)
        axes.push_back({{"axis", scaler_.axes[i]},
                        {"lo", scaler_.intervals[i].lo},
                        {"hi", scaler_.intervals[i].hi}});
    j["scaler"] = axes;
    j["dims"] = dims_;
    json boxes = json::array();
    for (const auto& b : boxes_) {
        if (!b.alive) continue;
        json bounds = json::array();
        for (const auto& iv : b.bounds) bounds.push_back({iv.lo, iv.hi});
        boxes.push_back({{"id", b.id},
                         {"bounds", bounds},
                         {"count", b.points.size()},
                         {"neighbors", adjacency_[b.id]}});
    }
    j["boxes"] = boxes;
    json splits = json::array();
    for (const auto& s : splits_) splits.push_back({{"parent", s.parent}, {"axis", s.axis}});
    j["splits"] = splits;
    return j.dump();
}

AdaptiveGrid AdaptiveGrid::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    DomainScaler scaler;
    for (const auto& ja : j.at("scaler")) {
        scaler.axes.push_back(ja.at("axis").get<std::size_t>());
        scaler.intervals.emplace_back(ja.at("lo").get<double>(), ja.at("hi").get<double>());
    }
    AdaptiveGrid g(scaler, j.at("dims").get<std::vector<int>>());
    // Replay splits in their original order so ids come out identical.
    // Point registration is replayed by the caller.
    for (const auto& js : j.at("splits")) {
        const int parent = js.at("parent").get<int>();
        const int axis = js.at("axis").get<int>();
        if (axis == -2)
            g.split_symmetric(parent);
        else
            g.split_asymmetric(parent, static_cast<std::size_t>(axis));
    }
    return g;
}

}  // namespace adcal
