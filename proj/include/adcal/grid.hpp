#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adcal/types.hpp"

namespace adcal {

/// The dynamic-actuator subdomain: which axes of the full actuator vector
/// are dynamic and their physical intervals. Also maps points into the unit
/// cube for scale-free distance computations (compressor, neighbor search).
struct DomainScaler {
    std::vector<std::size_t> axes;    // indices of dynamic actuators
    std::vector<Interval> intervals;  // physical intervals of those axes

    std::size_t dim() const { return axes.size(); }

    /// Projection of a full actuator vector onto the dynamic axes.
    Vec project(const Vec& u_full) const {
        Vec p(axes.size());
        for (std::size_t i = 0; i < axes.size(); ++i) p[i] = u_full[axes[i]];
        return p;
    }
    /// Dynamic projection mapped into [0,1]^d.
    Vec to_unit(const Vec& u_full) const {
        Vec z(axes.size());
        for (std::size_t i = 0; i < axes.size(); ++i)
            z[i] = (u_full[axes[i]] - intervals[i].lo) / intervals[i].width();
        return z;
    }
};

struct GridBox {
    int id = -1;
    std::vector<Interval> bounds;  // physical, one per dynamic axis
    std::vector<int> points;       // ids of data points inside
    bool alive = true;
    int parent = -1;
    int split_axis = -1;  // -1 none, -2 symmetric, >=0 single axis
    std::vector<int> children;

    double volume() const {
        double v = 1.0;
        for (const auto& b : bounds) v *= b.width();
        return v;
    }
};

struct SplitRecord {
    int parent;
    int axis;  // -2 symmetric
    std::vector<int> children;
};

/// Adaptive axis-aligned box partition of the dynamic subdomain, with the
/// box-adjacency graph and per-box data counts. Boxes are half-open
/// [lo, hi) on every axis except at the domain's upper face.
class AdaptiveGrid {
public:
    AdaptiveGrid(DomainScaler scaler, const std::vector<int>& subdivisions);

    std::size_t dim() const { return scaler_.dim(); }
    const DomainScaler& scaler() const { return scaler_; }

    const GridBox& box(int id) const;
    std::vector<int> alive_ids() const;
    std::size_t num_alive() const { return num_alive_; }
    const std::vector<int>& neighbors(int id) const;
    const std::vector<SplitRecord>& split_log() const { return splits_; }

    double node_weight(int id) const;        // vol / (#B + 1)
    double edge_weight(int a, int b) const;  // (vol_a + vol_b) / (#a + #b + 1)
    bool adjacent(int a, int b) const;

    /// Shortest edge of the box after mapping each axis to unit width.
    double unit_min_edge(int id) const;

    std::vector<int> split_symmetric(int id);
    std::vector<int> split_asymmetric(int id, std::size_t axis);

    /// Box containing the physical point (half-open tie rule).
    int locate(const Vec& u_full) const;

    /// Registers data point `point_id` (must arrive in increasing order).
    void add_point(int point_id, const Vec& u_full);
    int box_of_point(int point_id) const;
    std::size_t num_points() const { return point_box_.size(); }

    std::string to_json_text() const;
    static AdaptiveGrid from_json_text(const std::string& text);

private:
    void check_alive(int id) const;
    bool boxes_adjacent(const GridBox& a, const GridBox& b) const;
    int locate_dyn(const Vec& p) const;
    std::vector<int> replace_with_children(int id, std::vector<GridBox> children, int axis);

    DomainScaler scaler_;
    std::vector<int> dims_;            // initial subdivisions per axis
    std::vector<double> root_bounds_;  // flattened per-axis bound arrays
    std::vector<int> root_offsets_;    // offset into root_bounds_ per axis
    std::vector<int> root_ids_;        // row-major root cell -> box id
    std::vector<GridBox> boxes_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<SplitRecord> splits_;
    std::vector<Vec> points_dyn_;  // dynamic projection per point id
    std::vector<int> point_box_;   // containing box per point id
    std::size_t num_alive_ = 0;
};

}  // namespace adcal
