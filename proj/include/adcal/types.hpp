#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace adcal {

using Vec = std::vector<double>;

/// Closed real interval [lo, hi]. lo == hi is allowed (degenerate).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double l, double h) : lo(l), hi(h) {
        if (!(l <= h)) throw std::invalid_argument("interval: lo > hi");
    }

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool degenerate() const { return lo == hi; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    /// Half-open membership [lo, hi), except the upper end of the enclosing
    /// domain where hi itself counts (callers pass is_upper_face = true).
    bool contains_half_open(double x, bool is_upper_face) const {
        if (x < lo) return false;
        if (x < hi) return true;
        return is_upper_face && x == hi;
    }
    double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

inline double sq(double x) { return x * x; }

inline double l2_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += sq(a[i] - b[i]);
    return std::sqrt(s);
}

inline double l2_dist_sq(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += sq(a[i] - b[i]);
    return s;
}

}  // namespace adcal
