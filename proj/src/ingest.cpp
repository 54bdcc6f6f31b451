#include "toxtree/ingest.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "toxtree/scoring.hpp"

namespace toxtree {

using nlohmann::json;

namespace {

constexpr const char* kDeleted = "[deleted]";
constexpr const char* kRemoved = "[removed]";

bool is_deletion_placeholder(const std::string& body) {
    return body == kDeleted || body == kRemoved;
}

// Replaces invalid UTF-8 sequences with U+FFFD. Returns true if anything
// was replaced.
bool repair_utf8(std::string& s) {
    static const std::string replacement = "\xEF\xBF\xBD";
    std::string out;
    bool repaired = false;
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len;
        if (c < 0x80) len = 1;
        else if ((c & 0xE0) == 0xC0) len = 2;
        else if ((c & 0xF0) == 0xE0) len = 3;
        else if ((c & 0xF8) == 0xF0) len = 4;
        else len = 0;
        bool ok = len != 0 && i + len <= n;
        for (std::size_t j = 1; ok && j < len; ++j)
            ok = (static_cast<unsigned char>(s[i + j]) & 0xC0) == 0x80;
        if (ok && len == 2 && c < 0xC2) ok = false;  // overlong
        if (ok) {
            out.append(s, i, len);
            i += len;
        } else {
            out += replacement;
            repaired = true;
            ++i;
        }
    }
    if (repaired) s = std::move(out);
    return repaired;
}

std::string require_string(const json& obj, const char* field, long line) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_string())
        throw ParseError(std::string("missing or non-string field \"") + field + "\"", line);
    return it->get<std::string>();
}

std::int64_t require_int(const json& obj, const char* field, long line) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_number_integer())
        throw ParseError(std::string("missing or non-integer field \"") + field + "\"", line);
    return it->get<std::int64_t>();
}

RawRecord record_from_canonical(const json& obj, long line) {
    RawRecord r;
    r.id = require_string(obj, "id", line);
    if (r.id.empty()) throw ParseError("empty \"id\"", line);
    auto pit = obj.find("parent_id");
    if (pit == obj.end())
        throw ParseError("missing field \"parent_id\"", line);
    if (!pit->is_null()) {
        if (!pit->is_string())
            throw ParseError("non-string field \"parent_id\"", line);
        r.parent = pit->get<std::string>();
    }
    r.author = require_string(obj, "author", line);
    r.created_utc = require_int(obj, "created_utc", line);
    if (r.created_utc < 0) throw ParseError("negative \"created_utc\"", line);
    r.vote_score = static_cast<int>(require_int(obj, "score", line));
    r.body = require_string(obj, "body", line);
    r.community = require_string(obj, "community", line);
    if (r.community.empty()) throw ParseError("empty \"community\"", line);
    r.text_missing = is_deletion_placeholder(r.body);
    return r;
}

}  // namespace

ConversationNode RawRecord::to_node() const {
    ConversationNode n;
    n.id = id;
    n.parent = parent;
    n.author = author;
    n.created_utc = created_utc;
    n.vote_score = vote_score;
    n.body = body;
    n.community = community;
    n.text_missing = text_missing;
    return n;
}

std::vector<RawRecord> parse_canonical(std::istream& stream) {
    std::vector<RawRecord> out;
    std::string line;
    long line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty()) continue;
        bool repaired = repair_utf8(line);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object()) throw ParseError("record is not an object", line_no);
        RawRecord r = record_from_canonical(obj, line_no);
        r.encoding_repaired = repaired;
        out.push_back(std::move(r));
    }
    return out;
}

void emit_canonical(const std::vector<RawRecord>& records, std::ostream& out) {
    for (const auto& r : records) {
        json obj{
            {"id", r.id},
            {"parent_id", r.parent ? json(*r.parent) : json(nullptr)},
            {"author", r.author},
            {"created_utc", r.created_utc},
            {"score", r.vote_score},
            {"body", r.body},
            {"community", r.community},
        };
        out << obj.dump() << '\n';
    }
}

namespace {

void flatten_listing(const json& node, const std::optional<NodeId>& parent,
                     const std::string& community, std::vector<RawRecord>& out,
                     std::size_t& stubs) {
    if (!node.is_object())
        throw ParseError("listing entry is not an object");
    if (node.value("kind", "") == "more") {
        ++stubs;
        return;
    }
    RawRecord r;
    r.id = require_string(node, "id", -1);
    r.parent = parent;
    r.author = node.value("author", "");
    r.created_utc = node.value("created_utc", std::int64_t{0});
    r.vote_score = node.value("score", 0);
    if (node.contains("body")) {
        r.body = node.value("body", "");
    } else {
        // Post objects carry title/selftext instead of body.
        std::string title = node.value("title", "");
        std::string text = node.value("selftext", "");
        r.body = title.empty() ? text : (text.empty() ? title : title + "\n" + text);
    }
    r.community = node.value("subreddit", community);
    r.text_missing = is_deletion_placeholder(r.body);
    r.encoding_repaired = repair_utf8(r.body);
    NodeId id = r.id;
    out.push_back(std::move(r));
    auto rit = node.find("replies");
    if (rit != node.end() && !rit->is_null()) {
        if (!rit->is_array()) throw ParseError("\"replies\" is not an array");
        for (const auto& child : *rit)
            flatten_listing(child, id, community, out, stubs);
    }
}

}  // namespace

std::vector<RawRecord> parse_reddit_listing(std::istream& stream,
                                            std::size_t* stubs_skipped) {
    std::stringstream buf;
    buf << stream.rdbuf();
    std::string text = buf.str();
    repair_utf8(text);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid thread export: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("id"))
        throw ParseError("unrecognized thread export shape: expected a post object with \"id\"");
    std::vector<RawRecord> out;
    std::size_t stubs = 0;
    flatten_listing(doc, std::nullopt, doc.value("subreddit", ""), out, stubs);
    if (stubs_skipped) *stubs_skipped = stubs;
    return out;
}

CorpusManifest parse_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read manifest: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid manifest: ") + e.what());
    }
    CorpusManifest m;
    if (!doc.contains("entries") || !doc["entries"].is_array() || doc["entries"].empty())
        throw ParseError("manifest requires a non-empty \"entries\" array");
    for (const auto& e : doc["entries"]) {
        ManifestEntry entry;
        entry.path = e.value("path", "");
        if (entry.path.empty()) throw ParseError("manifest entry missing \"path\"");
        entry.community = e.value("community", "");
        entry.consensual = e.value("consensual", false);
        entry.format = e.value("format", "");
        m.entries.push_back(std::move(entry));
    }
    if (doc.contains("scores_path") && !doc["scores_path"].is_null())
        m.scores_path = doc["scores_path"].get<std::string>();
    return m;
}

void write_forest_cache(const ConversationForest& forest,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write forest cache: " + path.string());
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const auto& tree = forest.trees[t];
        const auto& label = forest.labels[t];
        for (const auto& node : tree.nodes()) {
            json obj{
                {"id", node.id},
                {"parent_id", node.parent ? json(*node.parent) : json(nullptr)},
                {"author", node.author},
                {"created_utc", node.created_utc},
                {"score", node.vote_score},
                {"body", node.body},
                {"community", label.community},
                {"consensual", label.consensual},
            };
            if (node.toxicity) obj["toxicity"] = *node.toxicity;
            out << obj.dump() << '\n';
        }
    }
}

ConversationForest load_forest_cache(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read forest cache: " + path.string());
    std::vector<ConversationNode> records;
    std::unordered_map<NodeId, bool> consensual_of;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid cache record: ") + e.what(), line_no);
        }
        RawRecord raw = record_from_canonical(obj, line_no);
        ConversationNode node = raw.to_node();
        if (obj.contains("toxicity") && !obj["toxicity"].is_null())
            node.toxicity = obj["toxicity"].get<double>();
        consensual_of[node.id] = obj.value("consensual", false);
        records.push_back(std::move(node));
    }
    auto [forest, stats] = build_forest(std::move(records));
    (void)stats;
    for (std::size_t t = 0; t < forest.trees.size(); ++t)
        forest.labels[t].consensual = consensual_of[forest.trees[t].root_id()];
    return forest;
}

std::pair<ConversationForest, IngestStats> load_corpus(const CorpusManifest& manifest) {
    ConversationForest forest;
    IngestStats total;
    for (const auto& entry : manifest.entries) {
        std::ifstream in(entry.path);
        if (!in) throw IoError("cannot read corpus file: " + entry.path.string());

        std::string format = entry.format;
        if (format.empty())
            format = entry.path.extension() == ".jsonl" ? "canonical" : "listing";

        std::vector<RawRecord> raws;
        std::size_t stubs = 0;
        if (format == "canonical")
            raws = parse_canonical(in);
        else if (format == "listing")
            raws = parse_reddit_listing(in, &stubs);
        else
            throw ParseError("unknown format \"" + format + "\" for " + entry.path.string());

        std::vector<ConversationNode> records;
        records.reserve(raws.size());
        for (const auto& r : raws) records.push_back(r.to_node());

        auto [file_forest, stats] = build_forest(std::move(records));
        stats.stubs_skipped = stubs;
        total += stats;
        for (std::size_t t = 0; t < file_forest.trees.size(); ++t) {
            forest.trees.push_back(std::move(file_forest.trees[t]));
            std::string community = entry.community.empty()
                                        ? file_forest.labels[t].community
                                        : entry.community;
            forest.labels.push_back({std::move(community), entry.consensual});
        }
    }
    if (manifest.scores_path) {
        auto records = load_score_cache(*manifest.scores_path);
        attach_scores(forest, records);
    }
    return {std::move(forest), total};
}

}  // namespace toxtree
