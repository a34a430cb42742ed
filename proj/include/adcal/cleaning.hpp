#pragma once

#include <cstdint>
#include <vector>

#include "adcal/grid.hpp"
#include "adcal/measurement.hpp"

namespace adcal {

/// Edges between measurement points closer (in unit coordinates, dynamic
/// axes) than c * min(shortest unit edge of either containing box).
struct ThresholdGraph {
    std::vector<std::uint64_t> nodes;             // dataset sequence numbers
    std::vector<std::vector<int>> adjacency;      // positions into nodes
    std::size_t num_edges = 0;
};

struct RemovalRecord {
    std::uint64_t removed;
    std::uint64_t witness;  // retained neighbor within threshold at removal time
};

struct CompressResult {
    std::vector<std::uint64_t> kept;  // ascending sequence numbers
    std::vector<RemovalRecord> removals;
};

ThresholdGraph build_threshold_graph(const Dataset& dataset, const AdaptiveGrid& grid, double c);

/// Overload over a subset of the dataset (ascending sequence numbers).
ThresholdGraph build_threshold_graph(const Dataset& dataset,
                                     const std::vector<std::uint64_t>& subset,
                                     const AdaptiveGrid& grid, double c);

/// Adaptive space compressor: deletes maximal-degree nodes (ties broken by
/// lowest sequence number) until the threshold graph is edgeless. The input
/// dataset itself is never modified.
CompressResult compress(const Dataset& dataset, const AdaptiveGrid& grid, double c);

CompressResult compress(const Dataset& dataset, const std::vector<std::uint64_t>& subset,
                        const AdaptiveGrid& grid, double c);

}  // namespace adcal
