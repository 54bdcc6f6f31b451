#include "toxtree/model.hpp"

#include <algorithm>
#include <cassert>

namespace toxtree {

ConversationTree::ConversationTree(std::vector<ConversationNode> nodes,
                                   std::vector<std::int32_t> parent,
                                   std::vector<std::vector<std::uint32_t>> children)
    : nodes_(std::move(nodes)),
      parent_(std::move(parent)),
      children_(std::move(children)) {
    assert(!nodes_.empty());
    index_.reserve(nodes_.size());
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);
}

std::uint32_t ConversationTree::index_of(const NodeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw LookupError("unknown node id: " + id);
    return it->second;
}

std::vector<std::uint32_t> ConversationTree::depths() const {
    std::vector<std::uint32_t> d(nodes_.size(), 0);
    // BFS order guarantees parent index < child index.
    for (std::uint32_t i = 1; i < nodes_.size(); ++i)
        d[i] = d[static_cast<std::uint32_t>(parent_[i])] + 1;
    return d;
}

std::size_t ConversationForest::node_count() const {
    std::size_t n = 0;
    for (const auto& t : trees) n += t.size();
    return n;
}

IngestStats& IngestStats::operator+=(const IngestStats& o) {
    accepted += o.accepted;
    orphans_dropped += o.orphans_dropped;
    duplicates_rejected += o.duplicates_rejected;
    deleted_retained += o.deleted_retained;
    stubs_skipped += o.stubs_skipped;
    return *this;
}

namespace {

enum class LinkState : std::uint8_t { Unknown, Visiting, Rooted, Orphan };

}  // namespace

std::pair<ConversationForest, IngestStats> build_forest(
    std::vector<ConversationNode> records) {
    IngestStats stats;
    ConversationForest forest;
    if (records.empty()) return {std::move(forest), stats};

    // First occurrence of each id wins; later duplicates are rejected.
    std::unordered_map<NodeId, std::size_t> by_id;
    by_id.reserve(records.size());
    std::vector<std::size_t> kept;
    kept.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].id.empty())
            throw StructuralError("record with empty id");
        auto [it, inserted] = by_id.emplace(records[i].id, i);
        if (!inserted) {
            ++stats.duplicates_rejected;
            continue;
        }
        kept.push_back(i);
    }

    // Classify every record: rooted, orphan (parent chain leaves the record
    // set), or part of a cycle.
    std::unordered_map<NodeId, LinkState> state;
    state.reserve(kept.size());
    std::vector<const ConversationNode*> chain;
    for (std::size_t i : kept) {
        chain.clear();
        const ConversationNode* cur = &records[i];
        LinkState resolved = LinkState::Unknown;
        while (true) {
            auto& st = state[cur->id];
            if (st == LinkState::Rooted || st == LinkState::Orphan) {
                resolved = st;
                break;
            }
            if (st == LinkState::Visiting)
                throw StructuralError("cycle detected at node " + cur->id);
            st = LinkState::Visiting;
            chain.push_back(cur);
            if (!cur->parent) {
                resolved = LinkState::Rooted;
                break;
            }
            auto pit = by_id.find(*cur->parent);
            if (pit == by_id.end()) {
                resolved = LinkState::Orphan;
                break;
            }
            cur = &records[pit->second];
        }
        for (const ConversationNode* n : chain) state[n->id] = resolved;
    }

    std::vector<std::size_t> accepted;
    accepted.reserve(kept.size());
    for (std::size_t i : kept) {
        switch (state[records[i].id]) {
            case LinkState::Rooted:
                accepted.push_back(i);
                break;
            case LinkState::Orphan:
                ++stats.orphans_dropped;
                break;
            default:
                throw StructuralError("unresolved record " + records[i].id);
        }
    }
    if (accepted.empty())
        throw StructuralError("malformed post: no root record present");

    // Group accepted records by root, preserving input order within groups.
    std::vector<std::size_t> roots;
    std::unordered_map<NodeId, std::vector<std::size_t>> children_of;
    for (std::size_t i : accepted) {
        const auto& r = records[i];
        if (!r.parent)
            roots.push_back(i);
        else
            children_of[*r.parent].push_back(i);
        if (r.text_missing) ++stats.deleted_retained;
    }
    stats.accepted = accepted.size();

    for (std::size_t root_rec : roots) {
        std::vector<ConversationNode> nodes;
        std::vector<std::int32_t> parent;
        std::vector<std::vector<std::uint32_t>> children;

        // BFS from the root with deterministic sibling order.
        std::vector<std::pair<std::size_t, std::int32_t>> queue;  // (record, parent idx)
        queue.emplace_back(root_rec, -1);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            auto [rec, par] = queue[head];
            std::uint32_t idx = static_cast<std::uint32_t>(nodes.size());
            nodes.push_back(std::move(records[rec]));
            parent.push_back(par);
            children.emplace_back();
            if (par >= 0) children[static_cast<std::size_t>(par)].push_back(idx);

            auto cit = children_of.find(nodes[idx].id);
            if (cit == children_of.end()) continue;
            auto kids = cit->second;
            std::sort(kids.begin(), kids.end(), [&](std::size_t a, std::size_t b) {
                if (records[a].created_utc != records[b].created_utc)
                    return records[a].created_utc < records[b].created_utc;
                return records[a].id < records[b].id;
            });
            for (std::size_t k : kids) queue.emplace_back(k, static_cast<std::int32_t>(idx));
        }

        GroupLabel label{nodes.front().community, false};
        forest.trees.emplace_back(std::move(nodes), std::move(parent), std::move(children));
        forest.labels.push_back(std::move(label));
    }
    return {std::move(forest), stats};
}

std::vector<NodeId> ancestors(const ConversationTree& tree, const NodeId& node,
                              std::size_t k) {
    std::uint32_t idx = tree.index_of(node);
    std::vector<NodeId> out;
    std::int32_t cur = tree.parent_index(idx);
    while (cur >= 0 && out.size() < k) {
        out.push_back(tree.node(static_cast<std::uint32_t>(cur)).id);
        cur = tree.parent_index(static_cast<std::uint32_t>(cur));
    }
    return out;
}

std::vector<std::vector<NodeId>> branches(const ConversationTree& tree) {
    std::vector<std::vector<NodeId>> out;
    std::vector<std::uint32_t> path;
    // Iterative DFS; frame second member = next child slot to visit.
    std::vector<std::pair<std::uint32_t, std::size_t>> stack;
    stack.emplace_back(0, 0);
    path.push_back(0);
    while (!stack.empty()) {
        auto& [idx, next] = stack.back();
        auto kids = tree.children(idx);
        if (kids.empty() && next == 0) {
            std::vector<NodeId> branch;
            branch.reserve(path.size());
            for (std::uint32_t p : path) branch.push_back(tree.node(p).id);
            out.push_back(std::move(branch));
            ++next;
        }
        if (next < kids.size()) {
            std::uint32_t child = kids[next++];
            stack.emplace_back(child, 0);
            path.push_back(child);
        } else {
            stack.pop_back();
            path.pop_back();
        }
    }
    return out;
}

}  // namespace toxtree
