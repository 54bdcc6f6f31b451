#pragma once
// Toxicity scoring: pluggable backends (lexicon, precomputed cache,
// remote batch API), score binarization, and Cohen's kappa agreement.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toxtree/model.hpp"

namespace toxtree {

struct ScoreRecord {
    NodeId id;
    double toxicity = 0.0;  // in [0,1]
    std::string scorer_name;
    std::string model_version;
};

enum class ScorerBackend { Precomputed, Lexicon, Remote };

struct ScorerConfig {
    ScorerBackend backend = ScorerBackend::Lexicon;
    std::string endpoint_url;  // required iff backend == Remote
    int batch_size = 64;
    int max_in_flight = 4;
    int retry_limit = 3;
    int initial_backoff_ms = 200;
    std::filesystem::path lexicon_path;
};

struct AgreementResult {
    double kappa = 0.0;
    double observed_agreement = 0.0;
    double expected_agreement = 0.0;
    std::size_t n = 0;
    bool degenerate = false;  // both raters constant and equal
};

// Weighted profanity lexicon; one token (+ optional weight) per line,
// '#' lines are comments, the first "# version: X" comment names the
// lexicon version.
class Lexicon {
public:
    static Lexicon load(const std::filesystem::path& path);
    static Lexicon from_tokens(std::vector<std::pair<std::string, double>> tokens,
                               std::string version = "inline");

    // Deterministic score: capped weighted fraction of lexicon hits over
    // token count. Empty text scores 0.
    double score(const std::string& body) const;

    const std::string& version() const { return version_; }

private:
    std::map<std::string, double> weights_;
    std::string version_ = "0";
};

struct AttachReport {
    std::size_t matched = 0;
    std::size_t unmatched_records = 0;  // score ids absent from the forest
    std::size_t total_nodes = 0;
};

// Sets toxicity on matched nodes in place; structure is never altered.
// Score ids not present in the forest are counted, not fatal.
AttachReport attach_scores(ConversationForest& forest,
                           const std::vector<ScoreRecord>& records);

// POST {endpoint_url}/score with {"texts":[...]}, expecting {"scores":[...]}
// of equal length. 429/5xx retried with exponential backoff up to
// retry_limit; exhaustion raises ScorerUnavailableError, a wrong-shape
// response raises ProtocolError. Inputs are chunked into batches of
// config.batch_size with at most max_in_flight batches running at once.
std::vector<double> remote_score_batch(const std::vector<std::string>& bodies,
                                       const ScorerConfig& config);

// Strict: toxic iff score > threshold.
inline bool binarize(double score, double threshold = 0.5) {
    return score > threshold;
}

// Two-rater, two-category kappa with expected agreement from marginal
// frequencies. Both raters constant and equal is degenerate; kappa is 1
// by convention and flagged.
AgreementResult cohens_kappa(const std::vector<bool>& labels_a,
                             const std::vector<bool>& labels_b);

// Score cache: one JSON object per line,
// {"id","toxicity","scorer","model_version"}.
std::vector<ScoreRecord> load_score_cache(const std::filesystem::path& path);
void append_score_cache(const std::filesystem::path& path,
                        const std::vector<ScoreRecord>& records);

}  // namespace toxtree
