#include "toxtree/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace toxtree {

using nlohmann::json;

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read lexicon: " + path.string());
    Lexicon lex;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto pos = line.find("version:");
            if (pos != std::string::npos) {
                std::string v = line.substr(pos + 8);
                v.erase(0, v.find_first_not_of(" \t"));
                v.erase(v.find_last_not_of(" \t\r") + 1);
                if (!v.empty()) lex.version_ = v;
            }
            continue;
        }
        std::istringstream ls(line);
        std::string token;
        double weight = 1.0;
        ls >> token >> weight;
        if (ls.fail()) weight = 1.0;
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (!token.empty()) lex.weights_[token] = weight;
    }
    return lex;
}

Lexicon Lexicon::from_tokens(std::vector<std::pair<std::string, double>> tokens,
                             std::string version) {
    Lexicon lex;
    lex.version_ = std::move(version);
    for (auto& [t, w] : tokens) {
        std::string token = t;
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        lex.weights_[token] = w;
    }
    return lex;
}

double Lexicon::score(const std::string& body) const {
    // Tokens are maximal runs of alphanumerics, lowercased.
    std::size_t token_count = 0;
    double hit_weight = 0.0;
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        ++token_count;
        auto it = weights_.find(token);
        if (it != weights_.end()) hit_weight += it->second;
        token.clear();
    };
    for (unsigned char c : body) {
        if (std::isalnum(c))
            token += static_cast<char>(std::tolower(c));
        else
            flush();
    }
    flush();
    if (token_count == 0) return 0.0;
    return std::min(1.0, hit_weight / static_cast<double>(token_count));
}

AttachReport attach_scores(ConversationForest& forest,
                           const std::vector<ScoreRecord>& records) {
    AttachReport report;
    report.total_nodes = forest.node_count();
    std::unordered_map<NodeId, double> by_id;
    by_id.reserve(records.size());
    for (const auto& r : records) {
        if (r.toxicity < 0.0 || r.toxicity > 1.0)
            throw InputError("toxicity out of [0,1] for id " + r.id);
        by_id[r.id] = r.toxicity;
    }
    std::size_t matched_ids = 0;
    for (auto& tree : forest.trees) {
        for (std::uint32_t i = 0; i < tree.size(); ++i) {
            auto it = by_id.find(tree.node(i).id);
            if (it == by_id.end()) continue;
            tree.node(i).toxicity = it->second;
            ++report.matched;
            ++matched_ids;
        }
    }
    report.unmatched_records = by_id.size() - std::min(matched_ids, by_id.size());
    return report;
}

namespace {

std::vector<double> post_one_batch(const std::vector<std::string>& bodies,
                                   const ScorerConfig& config) {
    json payload;
    payload["texts"] = bodies;
    const std::string body = payload.dump();

    httplib::Client client(config.endpoint_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    httplib::Headers headers;
    if (const char* key = std::getenv("TOXSCORE_API_KEY"))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    int backoff_ms = config.initial_backoff_ms;
    for (int attempt = 0; attempt <= config.retry_limit; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        auto res = client.Post("/score", headers, body, "application/json");
        if (!res || res->status == 429 || res->status >= 500) continue;
        if (res->status != 200)
            throw ScorerUnavailableError("scorer returned HTTP " +
                                         std::to_string(res->status));
        json doc;
        try {
            doc = json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw ProtocolError(std::string("unparseable scorer response: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("scores") || !doc["scores"].is_array())
            throw ProtocolError("scorer response missing \"scores\" array");
        auto& scores = doc["scores"];
        if (scores.size() != bodies.size())
            throw ProtocolError("scorer returned " + std::to_string(scores.size()) +
                                " scores for " + std::to_string(bodies.size()) + " texts");
        std::vector<double> out;
        out.reserve(scores.size());
        for (const auto& s : scores) {
            if (!s.is_number()) throw ProtocolError("non-numeric score in response");
            double v = s.get<double>();
            if (v < 0.0 || v > 1.0) throw ProtocolError("score outside [0,1]");
            out.push_back(v);
        }
        return out;
    }
    throw ScorerUnavailableError("scorer unreachable after " +
                                 std::to_string(config.retry_limit) + " retries");
}

}  // namespace

std::vector<double> remote_score_batch(const std::vector<std::string>& bodies,
                                       const ScorerConfig& config) {
    if (config.backend != ScorerBackend::Remote)
        throw ParameterError("remote_score_batch requires the remote backend");
    if (config.endpoint_url.empty())
        throw ParameterError("remote backend requires endpoint_url");
    if (bodies.empty()) return {};

    const std::size_t batch = static_cast<std::size_t>(std::max(1, config.batch_size));
    const std::size_t n_batches = (bodies.size() + batch - 1) / batch;
    std::vector<std::vector<double>> results(n_batches);

    // Bounded concurrency: at most max_in_flight batches running at once,
    // results reassembled in input order.
    const std::size_t in_flight =
        std::max<std::size_t>(1, static_cast<std::size_t>(config.max_in_flight));
    std::size_t next = 0;
    while (next < n_batches) {
        std::size_t wave = std::min(in_flight, n_batches - next);
        std::vector<std::future<std::vector<double>>> futures;
        futures.reserve(wave);
        for (std::size_t w = 0; w < wave; ++w) {
            std::size_t b = next + w;
            std::size_t lo = b * batch;
            std::size_t hi = std::min(bodies.size(), lo + batch);
            std::vector<std::string> chunk(bodies.begin() + lo, bodies.begin() + hi);
            futures.push_back(std::async(std::launch::async, post_one_batch,
                                         std::move(chunk), config));
        }
        for (std::size_t w = 0; w < wave; ++w) results[next + w] = futures[w].get();
        next += wave;
    }

    std::vector<double> out;
    out.reserve(bodies.size());
    for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
    return out;
}

AgreementResult cohens_kappa(const std::vector<bool>& labels_a,
                             const std::vector<bool>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw InputError("kappa: label lists differ in length");
    if (labels_a.empty()) throw InputError("kappa: empty label lists");

    const double n = static_cast<double>(labels_a.size());
    std::size_t agree = 0, a_true = 0, b_true = 0;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        if (labels_a[i] == labels_b[i]) ++agree;
        if (labels_a[i]) ++a_true;
        if (labels_b[i]) ++b_true;
    }
    AgreementResult res;
    res.n = labels_a.size();
    res.observed_agreement = agree / n;
    const double pa = a_true / n, pb = b_true / n;
    res.expected_agreement = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (res.expected_agreement >= 1.0) {
        res.kappa = 1.0;
        res.degenerate = true;
    } else {
        res.kappa = (res.observed_agreement - res.expected_agreement) /
                    (1.0 - res.expected_agreement);
    }
    return res;
}

std::vector<ScoreRecord> load_score_cache(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read score cache: " + path.string());
    std::vector<ScoreRecord> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid score record: ") + e.what(), line_no);
        }
        ScoreRecord r;
        r.id = obj.value("id", "");
        if (r.id.empty()) throw ParseError("score record missing \"id\"", line_no);
        if (!obj.contains("toxicity") || !obj["toxicity"].is_number())
            throw ParseError("score record missing numeric \"toxicity\"", line_no);
        r.toxicity = obj["toxicity"].get<double>();
        if (r.toxicity < 0.0 || r.toxicity > 1.0)
            throw ParseError("toxicity outside [0,1]", line_no);
        r.scorer_name = obj.value("scorer", "");
        r.model_version = obj.value("model_version", "");
        out.push_back(std::move(r));
    }
    return out;
}

void append_score_cache(const std::filesystem::path& path,
                        const std::vector<ScoreRecord>& records) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot write score cache: " + path.string());
    for (const auto& r : records) {
        json obj{{"id", r.id},
                 {"toxicity", r.toxicity},
                 {"scorer", r.scorer_name},
                 {"model_version", r.model_version}};
        out << obj.dump() << '\n';
    }
}

}  // namespace toxtree
