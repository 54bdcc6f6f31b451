#pragma once
// Per-node metrics from a scored tree: toxic accumulation, opinions,
// engagement, depth, leaf flag. One post-order pass per tree, plus a
// weight-expansion oracle used to cross-check the recursion.

#include <unordered_map>
#include <vector>

#include "toxtree/model.hpp"

namespace toxtree {

struct NodeMetrics {
    NodeId id;
    double toxicity = 0.0;
    double ta = 0.0;  // toxic accumulation
    std::uint32_t opinions = 0;     // direct child count
    std::uint32_t engagement = 0;   // max downward depth, in edges
    std::uint32_t depth = 0;        // edges from root
    bool is_leaf = false;
    bool imputed = false;  // missing-text node aggregated as toxicity 0
};

// Metrics for every node of one tree, indexed like the tree's nodes.
// Missing-text nodes are imputed toxicity 0; any other unscored node
// raises MetricError naming the id.
std::vector<NodeMetrics> compute_metrics(const ConversationTree& tree);

// Closed-form expansion of the toxic-accumulation recursion:
// weight(x) = product of 1/(children(a)+1) over every node a on the path
// from `node` down to x, inclusive. Weights over the subtree sum to 1 and
// their toxicity-weighted sum equals ta(node).
std::unordered_map<NodeId, double> ta_weights(const ConversationTree& tree,
                                              const NodeId& node);

std::uint32_t opinions(const ConversationTree& tree, const NodeId& node);
std::uint32_t engagement(const ConversationTree& tree, const NodeId& node);

// Convenience: metrics for every tree of the forest, same order.
std::vector<std::vector<NodeMetrics>> compute_forest_metrics(
    const ConversationForest& forest);

}  // namespace toxtree
