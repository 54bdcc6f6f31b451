#pragma once
// The five research-question pipelines over a scored, metric-computed
// forest: correlation, context regression, depth trends, participation
// binning, and the consensual/non-consensual group comparison.

#include <optional>
#include <string>
#include <vector>

#include "toxtree/metrics.hpp"
#include "toxtree/model.hpp"
#include "toxtree/stats.hpp"

namespace toxtree {

struct AnalysisOptions {
    bool exclude_leaves = true;
    bool include_roots = false;
    double toxic_threshold = 0.5;
    int max_depth = 10;
    int max_level = 5;
    int bins = 10;
    bool drop_first_bin = true;
};

struct CorrelationResult {
    std::string group;  // "overall" or a community name
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    bool leaves_excluded = true;
};

struct RegressionResult {
    int level_model = 0;  // 2..max_level
    // beta[0] is the intercept, then nearest ancestor (n-1) outward.
    std::vector<double> betas;
    std::size_t n = 0;
    double r_squared = 0.0;
};

enum class TrendFilter { All, ToxicRoot };

struct DepthTrend {
    int depth = 0;
    double mean_toxicity = 0.0;
    double mean_ta = 0.0;
    std::size_t sample_n = 0;
    std::size_t branch_terminating = 0;  // branches whose leaf sits at this depth
    std::size_t branch_reaching = 0;     // branches with leaf depth >= this depth
    TrendFilter filter = TrendFilter::All;
};

struct ParticipationBin {
    double low = 0.0;
    double high = 0.0;
    std::uint64_t opinion_sum = 0;
    std::uint64_t response_count = 0;
    bool dropped = false;
};

struct ParticipationHistogram {
    std::vector<ParticipationBin> bins;
    bool first_bin_dropped = false;
};

struct ParentChildStats {
    std::size_t toxic_parent_n = 0;     // toxic (non-root) responses
    std::size_t nontoxic_parent_n = 0;
    double toxic_parent_child_toxic_rate = 0.0;
    double nontoxic_parent_child_toxic_rate = 0.0;
    std::size_t toxic_parent_children = 0;
    std::size_t nontoxic_parent_children = 0;
};

struct RqReport {
    std::vector<CorrelationResult> rq1;
    std::vector<RegressionResult> rq2;
    std::vector<DepthTrend> rq3;
    ParticipationHistogram rq4_histogram;
    ParentChildStats rq4_parent_child;
};

struct MetricDelta {
    std::string metric;
    double consensual = 0.0;
    double nonconsensual = 0.0;
    double delta = 0.0;  // consensual - nonconsensual
};

struct GroupComparison {
    RqReport consensual_report;
    RqReport nonconsensual_report;
    std::vector<MetricDelta> deltas;
};

using ForestMetrics = std::vector<std::vector<NodeMetrics>>;

// Pooled (toxicity, ta) correlation over responses, one result per
// community plus "overall". Groups with fewer than 3 samples are skipped.
std::vector<CorrelationResult> rq1_correlation(const ConversationForest& forest,
                                               const ForestMetrics& metrics,
                                               const AnalysisOptions& opts = {});

// Level-L OLS of a response's toxicity on its L nearest ancestors'
// toxicity plus intercept, for L in 2..max_level. Responses with fewer
// than L ancestors are excluded from the level-L sample; models without
// enough samples are skipped.
std::vector<RegressionResult> rq2_context_regression(const ConversationForest& forest,
                                                     const ForestMetrics& metrics,
                                                     const AnalysisOptions& opts = {});

// Depth-wise mean toxicity/TA plus branch counts per depth, emitted for
// the full forest and again restricted to trees whose root toxicity
// exceeds the threshold.
std::vector<DepthTrend> rq3_depth_trends(const ConversationForest& forest,
                                         const ForestMetrics& metrics,
                                         const AnalysisOptions& opts = {});

// Ten toxicity bins of opinion sums and response counts, plus
// parent-child conditional toxicity rates.
std::pair<ParticipationHistogram, ParentChildStats> rq4_participation(
    const ConversationForest& forest, const ForestMetrics& metrics,
    const AnalysisOptions& opts = {});

RqReport run_all(const ConversationForest& forest, const ForestMetrics& metrics,
                 const AnalysisOptions& opts = {});

// Runs rq1..rq4 per consent label and emits both reports plus scalar
// deltas. Raises ComparisonError when a consent class is absent.
GroupComparison rq5_compare(const ConversationForest& forest,
                            const AnalysisOptions& opts = {});

}  // namespace toxtree
