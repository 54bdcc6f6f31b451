#pragma once
// Conversation forest data model: nodes, trees, and the traversal
// primitives (ancestors, branches) every analysis is built on.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "toxtree/errors.hpp"

namespace toxtree {

using NodeId = std::string;

// One post (root) or response. Structure survives deletion: a node whose
// body was a deletion placeholder keeps its place with text_missing=true.
struct ConversationNode {
    NodeId id;
    std::optional<NodeId> parent;  // absent iff root post
    std::string author;            // pseudonymized upstream id
    std::int64_t created_utc = 0;
    int vote_score = 0;
    std::string body;
    std::string community;
    std::optional<double> toxicity;  // in [0,1] when present
    bool text_missing = false;
};

// One rooted conversation. Nodes are stored in BFS order (root at index 0,
// parents before children); children are ordered by ascending created_utc,
// ties broken by id, so every traversal is deterministic.
class ConversationTree {
public:
    ConversationTree(std::vector<ConversationNode> nodes,
                     std::vector<std::int32_t> parent,
                     std::vector<std::vector<std::uint32_t>> children);

    std::size_t size() const { return nodes_.size(); }
    const NodeId& root_id() const { return nodes_.front().id; }
    const ConversationNode& node(std::uint32_t idx) const { return nodes_[idx]; }
    ConversationNode& node(std::uint32_t idx) { return nodes_[idx]; }
    const std::vector<ConversationNode>& nodes() const { return nodes_; }

    // -1 for the root.
    std::int32_t parent_index(std::uint32_t idx) const { return parent_[idx]; }
    std::span<const std::uint32_t> children(std::uint32_t idx) const {
        return children_[idx];
    }

    bool contains(const NodeId& id) const { return index_.count(id) != 0; }
    std::uint32_t index_of(const NodeId& id) const;

    // Edge count from root; depth(root) = 0.
    std::vector<std::uint32_t> depths() const;

private:
    std::vector<ConversationNode> nodes_;
    std::vector<std::int32_t> parent_;
    std::vector<std::vector<std::uint32_t>> children_;
    std::unordered_map<NodeId, std::uint32_t> index_;
};

struct GroupLabel {
    std::string community;
    bool consensual = false;
};

struct ConversationForest {
    std::vector<ConversationTree> trees;
    std::vector<GroupLabel> labels;  // one per tree

    std::size_t node_count() const;
};

struct IngestStats {
    std::size_t accepted = 0;
    std::size_t orphans_dropped = 0;
    std::size_t duplicates_rejected = 0;
    std::size_t deleted_retained = 0;
    std::size_t stubs_skipped = 0;

    IngestStats& operator+=(const IngestStats& o);
};

// Reconstructs trees from flat records arriving in any order. Orphans
// (parent chain never reaches a root) are dropped and counted; duplicate
// ids beyond the first are rejected and counted. Cycles raise
// StructuralError; a non-empty record set with zero roots raises
// StructuralError as a malformed post.
std::pair<ConversationForest, IngestStats> build_forest(
    std::vector<ConversationNode> records);

// Up to k ancestors of `node`, nearest first. Shorter when the root is
// reached; never includes the node itself.
std::vector<NodeId> ancestors(const ConversationTree& tree, const NodeId& node,
                              std::size_t k);

// One root-to-leaf path per leaf, in deterministic child-order traversal.
std::vector<std::vector<NodeId>> branches(const ConversationTree& tree);

}  // namespace toxtree
