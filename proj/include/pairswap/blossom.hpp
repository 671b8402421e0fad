#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pairswap::graph {

struct WeightedEdge {
    std::size_t u;
    std::size_t v;
    std::int64_t weight;
};

/// Exact maximum-weight matching on a general undirected graph (Edmonds'
/// blossom algorithm with dual variables, O(V^3)). Not restricted to
/// maximum cardinality. Returns mate[v], or -1 for unmatched vertices.
/// Weights must be non-negative; edges with weight 0 never improve the
/// objective and may be left out of the result.
std::vector<std::ptrdiff_t> max_weight_matching(std::size_t vertex_count, const std::vector<WeightedEdge>& edges);

}  // namespace pairswap::graph
