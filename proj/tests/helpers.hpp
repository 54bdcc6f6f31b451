#pragma once
// Shared fixtures for the test suites: record builders, the hand-built
// conversation excerpt used across structural tests, and a seeded random
// tree generator.

#include <random>
#include <string>
#include <vector>

#include "toxtree/model.hpp"

namespace toxtree::testutil {

inline ConversationNode record(std::string id, std::optional<std::string> parent,
                               std::int64_t created = 0, std::string body = "text",
                               std::string community = "c") {
    ConversationNode n;
    n.id = std::move(id);
    n.parent = std::move(parent);
    n.author = "a";
    n.created_utc = created;
    n.body = std::move(body);
    n.community = std::move(community);
    return n;
}

// Seven-node excerpt: 0 -> {1, 2}, 1 -> {1.1, 1.2}, 2 -> {2.1},
// 1.1 -> {1.1.1}. Timestamps follow the id ordering.
inline std::vector<ConversationNode> excerpt_records() {
    return {
        record("0", std::nullopt, 0), record("1", "0", 1),
        record("2", "0", 2),          record("1.1", "1", 3),
        record("1.2", "1", 4),        record("2.1", "2", 5),
        record("1.1.1", "1.1", 6),
    };
}

inline ConversationTree build_single_tree(std::vector<ConversationNode> records) {
    auto [forest, stats] = build_forest(std::move(records));
    REQUIRE(forest.trees.size() == 1);
    return std::move(forest.trees[0]);
}

// Random tree with n nodes; parents biased toward the previous node so
// deep chains occur. Every node gets a toxicity score when `scored`.
inline std::vector<ConversationNode> random_records(std::mt19937_64& rng,
                                                    std::size_t n, bool scored) {
    std::vector<ConversationNode> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::optional<std::string> parent;
        if (i > 0) {
            std::size_t p = (rng() % 2 == 0) ? i - 1 : rng() % i;
            parent = "n" + std::to_string(p);
        }
        auto r = record("n" + std::to_string(i), parent,
                        static_cast<std::int64_t>(rng() % 1000));
        if (scored)
            r.toxicity = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        records.push_back(std::move(r));
    }
    return records;
}

inline ConversationTree random_tree(std::mt19937_64& rng, std::size_t n,
                                    bool scored = true) {
    return build_single_tree(random_records(rng, n, scored));
}

}  // namespace toxtree::testutil
