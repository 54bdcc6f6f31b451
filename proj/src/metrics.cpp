#include "toxtree/metrics.hpp"

namespace toxtree {

std::vector<NodeMetrics> compute_metrics(const ConversationTree& tree) {
    const std::size_t n = tree.size();
    std::vector<NodeMetrics> out(n);
    auto depth = tree.depths();

    for (std::uint32_t i = 0; i < n; ++i) {
        const auto& node = tree.node(i);
        NodeMetrics& m = out[i];
        m.id = node.id;
        m.depth = depth[i];
        m.opinions = static_cast<std::uint32_t>(tree.children(i).size());
        m.is_leaf = m.opinions == 0;
        if (node.toxicity) {
            m.toxicity = *node.toxicity;
        } else if (node.text_missing) {
            m.toxicity = 0.0;
            m.imputed = true;
        } else {
            throw MetricError("unscored node: " + node.id);
        }
    }

    // Post-order without recursion: BFS storage puts parents before
    // children, so a reverse index sweep visits children first. Child
    // accumulation follows deterministic child order.
    for (std::uint32_t i = static_cast<std::uint32_t>(n); i-- > 0;) {
        NodeMetrics& m = out[i];
        if (m.is_leaf) {
            m.ta = m.toxicity;
            m.engagement = 0;
            continue;
        }
        double subtree_ta = 0.0;
        std::uint32_t max_child_engagement = 0;
        for (std::uint32_t c : tree.children(i)) {
            subtree_ta += out[c].ta;
            max_child_engagement = std::max(max_child_engagement, out[c].engagement);
        }
        m.ta = (m.toxicity + subtree_ta) / static_cast<double>(m.opinions + 1);
        m.engagement = max_child_engagement + 1;
    }
    return out;
}

std::unordered_map<NodeId, double> ta_weights(const ConversationTree& tree,
                                              const NodeId& node) {
    std::uint32_t start = tree.index_of(node);
    std::unordered_map<NodeId, double> weights;
    // DFS carrying the running product of 1/(children+1).
    std::vector<std::pair<std::uint32_t, double>> stack{{start, 1.0}};
    while (!stack.empty()) {
        auto [idx, prefix] = stack.back();
        stack.pop_back();
        auto kids = tree.children(idx);
        double w = prefix / static_cast<double>(kids.size() + 1);
        weights.emplace(tree.node(idx).id, w);
        for (std::uint32_t c : kids) stack.emplace_back(c, w);
    }
    return weights;
}

std::uint32_t opinions(const ConversationTree& tree, const NodeId& node) {
    return static_cast<std::uint32_t>(tree.children(tree.index_of(node)).size());
}

std::uint32_t engagement(const ConversationTree& tree, const NodeId& node) {
    std::uint32_t start = tree.index_of(node);
    // Longest downward path in edges.
    std::uint32_t best = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{start, 0}};
    while (!stack.empty()) {
        auto [idx, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        for (std::uint32_t c : tree.children(idx)) stack.emplace_back(c, d + 1);
    }
    return best;
}

std::vector<std::vector<NodeMetrics>> compute_forest_metrics(
    const ConversationForest& forest) {
    std::vector<std::vector<NodeMetrics>> out;
    out.reserve(forest.trees.size());
    for (const auto& tree : forest.trees) out.push_back(compute_metrics(tree));
    return out;
}

}  // namespace toxtree
