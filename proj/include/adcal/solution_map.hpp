#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adcal/types.hpp"

namespace adcal {

/// One cell of the k x k solution map: a measured representative chosen by
/// the optimizer, a synthetic gap-fill entry, or still empty.
struct SolutionCell {
    enum class State { empty, chosen, synthetic };
    State state = State::empty;
    std::uint64_t seq = 0;  // dataset sequence (chosen only)
    Vec u;
    Vec y;
};

struct SolutionMap {
    int k = 0;
    std::vector<SolutionCell> cells;  // linear index f * k + t

    SolutionMap() = default;
    explicit SolutionMap(int k_) : k(k_), cells(static_cast<std::size_t>(k_) * k_) {}

    SolutionCell& cell(int f, int t) { return cells[static_cast<std::size_t>(f) * k + t]; }
    const SolutionCell& cell(int f, int t) const {
        return cells[static_cast<std::size_t>(f) * k + t];
    }

    bool complete() const {
        for (const auto& c : cells)
            if (c.state == SolutionCell::State::empty) return false;
        return true;
    }
    std::size_t count(SolutionCell::State s) const {
        std::size_t n = 0;
        for (const auto& c : cells)
            if (c.state == s) ++n;
        return n;
    }

    std::string to_json_text() const;
    static SolutionMap from_json_text(const std::string& text);
};

}  // namespace adcal
