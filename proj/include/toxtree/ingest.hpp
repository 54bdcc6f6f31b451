#pragma once
// Corpus parsing: the canonical line-delimited record format, the nested
// thread-listing adapter, and manifest-driven forest assembly.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "toxtree/model.hpp"

namespace toxtree {

// One decoded input record, pre-scoring. Same shape as ConversationNode
// minus toxicity.
struct RawRecord {
    NodeId id;
    std::optional<NodeId> parent;
    std::string author;
    std::int64_t created_utc = 0;
    int vote_score = 0;
    std::string body;
    std::string community;
    bool text_missing = false;
    bool encoding_repaired = false;  // invalid UTF-8 was replaced at ingest

    ConversationNode to_node() const;
};

struct ManifestEntry {
    std::filesystem::path path;
    std::string community;
    bool consensual = false;
    // Optional override of extension-based dispatch: "canonical" | "listing".
    std::string format;
};

struct CorpusManifest {
    std::vector<ManifestEntry> entries;
    std::optional<std::filesystem::path> scores_path;
};

// Canonical schema, one JSON object per line:
//   {"id","parent_id","author","created_utc","score","body","community"}
// Malformed lines raise ParseError carrying the 1-based line number.
std::vector<RawRecord> parse_canonical(std::istream& stream);

// Serialize records back to the canonical line format.
void emit_canonical(const std::vector<RawRecord>& records, std::ostream& out);

// Reddit-style thread export: one post object with a nested "replies"
// forest. "more replies" stubs ({"kind":"more"}) are skipped and counted
// in `stubs_skipped`. "[deleted]"/"[removed]" bodies map to text_missing.
std::vector<RawRecord> parse_reddit_listing(std::istream& stream,
                                            std::size_t* stubs_skipped = nullptr);

CorpusManifest parse_manifest(const std::filesystem::path& path);

// Forest cache: canonical records plus the per-tree consensual flag and
// any attached toxicity, one object per line. load rebuilds the forest
// via build_forest, so the cache round-trips exactly.
void write_forest_cache(const ConversationForest& forest,
                        const std::filesystem::path& path);
ConversationForest load_forest_cache(const std::filesystem::path& path);

// Parses every manifest entry (format from extension: .jsonl canonical,
// .json listing, unless overridden), builds the forest, applies group
// labels, and attaches cached scores when scores_path is set.
std::pair<ConversationForest, IngestStats> load_corpus(const CorpusManifest& manifest);

}  // namespace toxtree
