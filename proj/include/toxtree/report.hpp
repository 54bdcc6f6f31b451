#pragma once
// Report emission: the analysis run configuration, report.json, and the
// per-RQ CSV files. Numeric output uses shortest round-trip formatting so
// reruns are byte-identical.

#include <filesystem>
#include <string>

#include "toxtree/analysis.hpp"
#include "toxtree/model.hpp"

namespace toxtree {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
    std::filesystem::path manifest_path;
    std::filesystem::path output_dir;
    AnalysisOptions analysis;
    std::string scorer_name;
    std::string scorer_version;
    std::optional<std::uint64_t> seed;
};

struct CorpusSummary {
    IngestStats ingest;
    std::size_t trees = 0;
    std::size_t nodes = 0;
    double median_post_words = 0.0;
    double median_response_words = 0.0;
    std::size_t unscored_imputed = 0;
};

struct AnalysisReport {
    RunConfig config;
    CorpusSummary corpus;
    RqReport results;
    std::optional<GroupComparison> rq5;
};

CorpusSummary summarize_corpus(const ConversationForest& forest,
                               const IngestStats& stats);

std::string format_double(double v);

// Writes report.json plus rq1.csv .. rq5.csv (rq5 only when present)
// under config.output_dir.
void write_report(const AnalysisReport& report);

// Re-render the CSV files from an existing report.json.
AnalysisReport load_report(const std::filesystem::path& json_path);

}  // namespace toxtree
