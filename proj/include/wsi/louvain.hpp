#pragma once

#include <cstdint>

#include "wsi/graph.hpp"

namespace wsi {

struct LouvainConfig {
    std::uint64_t seed = 0;
    double resolution = 1.0;
    /// A level stops once a sweep gains less than this much modularity.
    double min_gain = 1e-7;
    std::size_t max_passes = 50;
};

/// Multi-level local-move + aggregation modularity maximization, followed by
/// a node-level refinement that runs until no single-node move (including
/// moving a node into an empty community) improves Q. Node visit order is
/// shuffled from the seed; ties go to the lowest community id.
Partition louvain(const WeightedGraph& g, const LouvainConfig& cfg = {});

/// Largest modularity gain available from moving one node to another
/// (possibly empty) community. <= 0 for a local optimum.
double best_single_move_gain(const WeightedGraph& g, const Partition& p, double resolution = 1.0);

}  // namespace wsi
