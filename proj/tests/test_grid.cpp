#include <algorithm>
#include <set>

#include "adcal/grid.hpp"
#include "adcal/rng.hpp"
#include "doctest.h"

using namespace adcal;

namespace {

DomainScaler unit_scaler(std::size_t d) {
    DomainScaler s;
    for (std::size_t a = 0; a < d; ++a) {
        s.axes.push_back(a);
        s.intervals.emplace_back(0.0, 1.0);
    }
    return s;
}

// brute-force facet test over all alive pairs
bool brute_adjacent(const GridBox& a, const GridBox& b) {
    std::size_t touch = 0, overlap = 0;
    for (std::size_t ax = 0; ax < a.bounds.size(); ++ax) {
        const double lo = std::max(a.bounds[ax].lo, b.bounds[ax].lo);
        const double hi = std::min(a.bounds[ax].hi, b.bounds[ax].hi);
        if (hi > lo)
            ++overlap;
        else if (hi == lo && (a.bounds[ax].hi == b.bounds[ax].lo || b.bounds[ax].hi == a.bounds[ax].lo))
            ++touch;
    }
    return touch == 1 && overlap == a.bounds.size() - 1;
}

}  // namespace

TEST_CASE("node weight formula") {
    // two unit boxes: domain [0,2] x [0,1] split once along the first axis
    DomainScaler s;
    s.axes = {0, 1};
    s.intervals = {Interval(0.0, 2.0), Interval(0.0, 1.0)};
    AdaptiveGrid grid(s, {2, 1});
    const auto ids = grid.alive_ids();
    REQUIRE(ids.size() == 2);

    CHECK(grid.node_weight(ids[0]) == 1.0);  // vol 1, empty
    CHECK(grid.edge_weight(ids[0], ids[1]) == 2.0);  // two empty unit boxes
    CHECK(grid.edge_weight(ids[0], ids[1]) == grid.edge_weight(ids[1], ids[0]));

    grid.add_point(0, {0.1, 0.5});
    grid.add_point(1, {0.2, 0.5});
    grid.add_point(2, {0.3, 0.5});
    CHECK(grid.node_weight(ids[0]) == 0.25);  // vol 1, 3 points
    CHECK(grid.edge_weight(ids[0], ids[1]) == 0.5);  // vol 2 total, 3 points
    CHECK_THROWS_AS(grid.node_weight(999), std::out_of_range);
}

TEST_CASE("edge weight requires adjacency") {
    AdaptiveGrid grid(unit_scaler(1), {3});
    const auto ids = grid.alive_ids();
    CHECK_THROWS_AS(grid.edge_weight(ids[0], ids[2]), std::invalid_argument);
}

TEST_CASE("symmetric split of the unit square") {
    AdaptiveGrid grid(unit_scaler(2), {1, 1});
    const int root = grid.alive_ids()[0];
    grid.add_point(0, {0.1, 0.1});
    grid.add_point(1, {0.9, 0.9});
    grid.add_point(2, {0.9, 0.1});

    const auto children = grid.split_symmetric(root);
    CHECK(children.size() == 4);
    double total = 0.0;
    std::size_t points = 0;
    for (int id : children) {
        CHECK(grid.box(id).volume() == 0.25);
        total += grid.box(id).volume();
        points += grid.box(id).points.size();
    }
    CHECK(total == 1.0);
    CHECK(points == 3);  // conservation

    // children pairwise adjacent exactly when they share a facet
    for (int a : children)
        for (int b : children)
            if (a != b) CHECK(grid.adjacent(a, b) == brute_adjacent(grid.box(a), grid.box(b)));
}

TEST_CASE("children adjacency matches brute force for d = 3") {
    AdaptiveGrid grid(unit_scaler(3), {1, 1, 1});
    const auto children = grid.split_symmetric(grid.alive_ids()[0]);
    CHECK(children.size() == 8);
    for (int a : children)
        for (int b : children)
            if (a != b) CHECK(grid.adjacent(a, b) == brute_adjacent(grid.box(a), grid.box(b)));
}

TEST_CASE("asymmetric split") {
    AdaptiveGrid grid(unit_scaler(2), {1, 1});
    const int root = grid.alive_ids()[0];
    const auto children = grid.split_asymmetric(root, 1);
    REQUIRE(children.size() == 2);
    CHECK(grid.box(children[0]).bounds[0].width() == 1.0);
    CHECK(grid.box(children[0]).bounds[1].width() == 0.5);
    CHECK(grid.box(children[0]).volume() + grid.box(children[1]).volume() == 1.0);

    // repeated splits on one axis: width 2^-t
    int id = children[0];
    for (int t = 2; t <= 6; ++t) {
        id = grid.split_asymmetric(id, 1)[0];
        CHECK(grid.box(id).bounds[1].width() == doctest::Approx(std::pow(2.0, -t)));
    }
    CHECK_THROWS_AS(grid.split_asymmetric(id, 5), std::invalid_argument);
}

TEST_CASE("locate honors the half-open convention") {
    AdaptiveGrid grid(unit_scaler(2), {2, 2});
    // interior facet point belongs to the upper cell
    const int at_facet = grid.locate({0.5, 0.25});
    CHECK(grid.box(at_facet).bounds[0].lo == 0.5);
    // domain's upper face is closed
    const int top = grid.locate({1.0, 1.0});
    CHECK(grid.box(top).bounds[0].hi == 1.0);
    CHECK(grid.box(top).bounds[1].hi == 1.0);
    CHECK_THROWS_AS(grid.locate({1.2, 0.2}), std::domain_error);

    // after a split, locate lands in a child of the former container
    const int before = grid.locate({0.2, 0.2});
    const auto children = grid.split_symmetric(before);
    const int after = grid.locate({0.2, 0.2});
    CHECK(std::find(children.begin(), children.end(), after) != children.end());
}

TEST_CASE("partition property under random mixed splits") {
    Rng rng(21);
    AdaptiveGrid grid(unit_scaler(3), {2, 2, 2});
    for (int s = 0; s < 100; ++s) {
        const auto ids = grid.alive_ids();
        const int id = ids[rng.uniform_index(ids.size())];
        if (rng.uniform01() < 0.5)
            grid.split_symmetric(id);
        else
            grid.split_asymmetric(id, rng.uniform_index(3));
    }
    double total = 0.0;
    for (int id : grid.alive_ids()) total += grid.box(id).volume();
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

    // every random point lands in exactly one box
    for (int trial = 0; trial < 10000; ++trial) {
        const Vec u = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
        const int id = grid.locate(u);
        int containing = 0;
        for (int other : grid.alive_ids()) {
            const GridBox& b = grid.box(other);
            bool inside = true;
            for (std::size_t a = 0; a < 3; ++a)
                if (!b.bounds[a].contains_half_open(u[a], b.bounds[a].hi == 1.0)) inside = false;
            if (inside) {
                ++containing;
                CHECK(other == id);
            }
        }
        CHECK(containing == 1);
    }

    // adjacency matches the brute-force facet test
    const auto ids = grid.alive_ids();
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j)
            CHECK(grid.adjacent(ids[i], ids[j]) ==
                  brute_adjacent(grid.box(ids[i]), grid.box(ids[j])));

    // weights strictly positive
    for (int id : ids) {
        CHECK(grid.node_weight(id) > 0.0);
        for (int nb : grid.neighbors(id)) CHECK(grid.edge_weight(id, nb) > 0.0);
    }
}

TEST_CASE("point counts survive splits and locate stays consistent") {
    Rng rng(22);
    AdaptiveGrid grid(unit_scaler(2), {2, 2});
    std::vector<Vec> pts;
    for (int i = 0; i < 200; ++i) {
        pts.push_back({rng.uniform01(), rng.uniform01()});
        grid.add_point(i, pts.back());
    }
    for (int s = 0; s < 30; ++s) {
        const auto ids = grid.alive_ids();
        grid.split_symmetric(ids[rng.uniform_index(ids.size())]);
    }
    std::size_t total = 0;
    for (int id : grid.alive_ids()) total += grid.box(id).points.size();
    CHECK(total == 200);
    for (int i = 0; i < 200; ++i) CHECK(grid.box_of_point(i) == grid.locate(pts[i]));
}

TEST_CASE("snapshot round trip replays the split tree") {
    Rng rng(23);
    AdaptiveGrid grid(unit_scaler(2), {2, 3});
    for (int s = 0; s < 12; ++s) {
        const auto ids = grid.alive_ids();
        const int id = ids[rng.uniform_index(ids.size())];
        if (rng.uniform01() < 0.5)
            grid.split_symmetric(id);
        else
            grid.split_asymmetric(id, rng.uniform_index(2));
    }
    AdaptiveGrid copy = AdaptiveGrid::from_json_text(grid.to_json_text());
    CHECK(copy.num_alive() == grid.num_alive());
    const auto a = grid.alive_ids();
    const auto b = copy.alive_ids();
    REQUIRE(a == b);
    for (int id : a) {
        CHECK(grid.box(id).bounds.size() == copy.box(id).bounds.size());
        for (std::size_t ax = 0; ax < grid.box(id).bounds.size(); ++ax) {
            CHECK(grid.box(id).bounds[ax].lo == copy.box(id).bounds[ax].lo);
            CHECK(grid.box(id).bounds[ax].hi == copy.box(id).bounds[ax].hi);
        }
        CHECK(grid.neighbors(id) == copy.neighbors(id));
    }
}
