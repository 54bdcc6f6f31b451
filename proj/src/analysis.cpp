#include "toxtree/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "toxtree/scoring.hpp"

namespace toxtree {

namespace {

void check_aligned(const ConversationForest& forest, const ForestMetrics& metrics) {
    if (forest.trees.size() != metrics.size())
        throw InputError("metrics not aligned with forest");
}

// A node enters a statistical sample only when it carries a real score:
// missing-text nodes are structural, not data points.
bool sampled(const NodeMetrics& m) { return !m.imputed; }

}  // namespace

std::vector<CorrelationResult> rq1_correlation(const ConversationForest& forest,
                                               const ForestMetrics& metrics,
                                               const AnalysisOptions& opts) {
    check_aligned(forest, metrics);

    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> samples;
    auto& overall = samples["overall"];
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const std::string& community = forest.labels[t].community;
        auto& group = samples[community];
        for (const auto& m : metrics[t]) {
            if (m.depth == 0 && !opts.include_roots) continue;
            if (m.is_leaf && opts.exclude_leaves) continue;
            if (!sampled(m)) continue;
            overall.first.push_back(m.toxicity);
            overall.second.push_back(m.ta);
            group.first.push_back(m.toxicity);
            group.second.push_back(m.ta);
        }
    }

    std::vector<CorrelationResult> out;
    for (auto& [group, xy] : samples) {
        if (xy.first.size() < 3) continue;  // skipped with notice at the CLI
        CorrelationResult res;
        res.group = group;
        res.leaves_excluded = opts.exclude_leaves;
        try {
            auto p = pearson(xy.first, xy.second);
            res.r = p.r;
            res.p_value = p.p_value;
            res.n = p.n;
        } catch (const InputError&) {
            continue;  // degenerate group (zero variance)
        }
        out.push_back(std::move(res));
    }
    // "overall" first, then communities alphabetically.
    std::stable_sort(out.begin(), out.end(),
                     [](const CorrelationResult& a, const CorrelationResult& b) {
                         if ((a.group == "overall") != (b.group == "overall"))
                             return a.group == "overall";
                         return a.group < b.group;
                     });
    return out;
}

std::vector<RegressionResult> rq2_context_regression(const ConversationForest& forest,
                                                     const ForestMetrics& metrics,
                                                     const AnalysisOptions& opts) {
    check_aligned(forest, metrics);
    const int max_level = std::max(2, opts.max_level);

    std::vector<RegressionResult> out;
    for (int level = 2; level <= max_level; ++level) {
        std::vector<std::vector<double>> design;
        std::vector<double> target;
        for (std::size_t t = 0; t < forest.trees.size(); ++t) {
            const auto& tree = forest.trees[t];
            const auto& tm = metrics[t];
            for (std::uint32_t i = 0; i < tree.size(); ++i) {
                const auto& m = tm[i];
                if (m.depth < static_cast<std::uint32_t>(level)) continue;
                if (!sampled(m)) continue;
                std::vector<double> row;
                row.reserve(static_cast<std::size_t>(level) + 1);
                row.push_back(1.0);
                std::int32_t cur = tree.parent_index(i);
                bool ok = true;
                for (int a = 0; a < level; ++a) {
                    const auto& am = tm[static_cast<std::uint32_t>(cur)];
                    if (!sampled(am)) {
                        ok = false;
                        break;
                    }
                    row.push_back(am.toxicity);
                    cur = tree.parent_index(static_cast<std::uint32_t>(cur));
                }
                if (!ok) continue;
                design.push_back(std::move(row));
                target.push_back(m.toxicity);
            }
        }
        if (design.size() <= static_cast<std::size_t>(level) + 1) continue;  // skipped
        RegressionResult res;
        res.level_model = level;
        try {
            res.betas = ols_fit(design, target);
        } catch (const SingularDesignError&) {
            continue;
        }
        res.n = design.size();
        res.r_squared = r_squared(design, target, res.betas);
        out.push_back(std::move(res));
    }
    return out;
}

namespace {

std::vector<DepthTrend> depth_trends_for(const ConversationForest& forest,
                                         const ForestMetrics& metrics,
                                         const AnalysisOptions& opts,
                                         TrendFilter filter) {
    const int max_depth = std::max(1, opts.max_depth);
    std::vector<double> tox_sum(max_depth + 1, 0.0), ta_sum(max_depth + 1, 0.0);
    std::vector<std::size_t> count(max_depth + 1, 0), terminating(max_depth + 1, 0);
    std::size_t deeper_leaves = 0;  // branches extending beyond max_depth

    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        if (filter == TrendFilter::ToxicRoot &&
            !(metrics[t][0].toxicity > opts.toxic_threshold))
            continue;
        for (const auto& m : metrics[t]) {
            if (m.depth >= 1 && m.depth <= static_cast<std::uint32_t>(max_depth) &&
                sampled(m)) {
                tox_sum[m.depth] += m.toxicity;
                ta_sum[m.depth] += m.ta;
                ++count[m.depth];
            }
            if (m.is_leaf) {
                if (m.depth <= static_cast<std::uint32_t>(max_depth))
                    ++terminating[m.depth];
                else
                    ++deeper_leaves;
            }
        }
    }

    // branch_reaching(d) = branches whose leaf depth >= d.
    std::vector<DepthTrend> out;
    std::size_t reaching = deeper_leaves;
    for (int d = max_depth; d >= 1; --d)
        reaching += terminating[static_cast<std::size_t>(d)];
    std::size_t cumulative = reaching;
    for (int d = 1; d <= max_depth; ++d) {
        DepthTrend row;
        row.depth = d;
        row.filter = filter;
        row.sample_n = count[d];
        if (count[d] > 0) {
            row.mean_toxicity = tox_sum[d] / static_cast<double>(count[d]);
            row.mean_ta = ta_sum[d] / static_cast<double>(count[d]);
        }
        row.branch_terminating = terminating[d];
        row.branch_reaching = cumulative;
        cumulative -= terminating[d];
        out.push_back(row);
    }
    return out;
}

}  // namespace

std::vector<DepthTrend> rq3_depth_trends(const ConversationForest& forest,
                                         const ForestMetrics& metrics,
                                         const AnalysisOptions& opts) {
    check_aligned(forest, metrics);
    auto all = depth_trends_for(forest, metrics, opts, TrendFilter::All);
    auto toxic = depth_trends_for(forest, metrics, opts, TrendFilter::ToxicRoot);
    all.insert(all.end(), toxic.begin(), toxic.end());
    return all;
}

std::pair<ParticipationHistogram, ParentChildStats> rq4_participation(
    const ConversationForest& forest, const ForestMetrics& metrics,
    const AnalysisOptions& opts) {
    check_aligned(forest, metrics);
    const int n_bins = std::max(1, opts.bins);

    ParticipationHistogram hist;
    hist.first_bin_dropped = opts.drop_first_bin;
    hist.bins.resize(n_bins);
    for (int b = 0; b < n_bins; ++b) {
        hist.bins[b].low = static_cast<double>(b) / n_bins;
        hist.bins[b].high = static_cast<double>(b + 1) / n_bins;
        hist.bins[b].dropped = opts.drop_first_bin && b == 0;
    }
    // Half-open bins, top bin closed so a score of exactly 1.0 counts.
    auto bin_of = [&](double score) {
        int b = static_cast<int>(score * n_bins);
        return std::min(b, n_bins - 1);
    };

    ParentChildStats pc;
    std::size_t toxic_children_of_toxic = 0, toxic_children_of_nontoxic = 0;

    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const auto& tree = forest.trees[t];
        const auto& tm = metrics[t];
        for (std::uint32_t i = 0; i < tree.size(); ++i) {
            const auto& m = tm[i];
            if (m.depth == 0 && !opts.include_roots) continue;
            if (!sampled(m)) continue;
            auto& bin = hist.bins[static_cast<std::size_t>(bin_of(m.toxicity))];
            bin.opinion_sum += m.opinions;
            bin.response_count += 1;

            // Parent side of the conditional-toxicity contrast; every
            // response counts as a parent, childless ones included.
            const bool parent_toxic = binarize(m.toxicity, opts.toxic_threshold);
            if (parent_toxic)
                ++pc.toxic_parent_n;
            else
                ++pc.nontoxic_parent_n;
            for (std::uint32_t c : tree.children(i)) {
                if (!sampled(tm[c])) continue;
                const bool child_toxic = binarize(tm[c].toxicity, opts.toxic_threshold);
                if (parent_toxic) {
                    ++pc.toxic_parent_children;
                    if (child_toxic) ++toxic_children_of_toxic;
                } else {
                    ++pc.nontoxic_parent_children;
                    if (child_toxic) ++toxic_children_of_nontoxic;
                }
            }
        }
    }
    if (pc.toxic_parent_children > 0)
        pc.toxic_parent_child_toxic_rate =
            static_cast<double>(toxic_children_of_toxic) /
            static_cast<double>(pc.toxic_parent_children);
    if (pc.nontoxic_parent_children > 0)
        pc.nontoxic_parent_child_toxic_rate =
            static_cast<double>(toxic_children_of_nontoxic) /
            static_cast<double>(pc.nontoxic_parent_children);
    return {std::move(hist), pc};
}

RqReport run_all(const ConversationForest& forest, const ForestMetrics& metrics,
                 const AnalysisOptions& opts) {
    RqReport report;
    report.rq1 = rq1_correlation(forest, metrics, opts);
    report.rq2 = rq2_context_regression(forest, metrics, opts);
    report.rq3 = rq3_depth_trends(forest, metrics, opts);
    auto [hist, pc] = rq4_participation(forest, metrics, opts);
    report.rq4_histogram = std::move(hist);
    report.rq4_parent_child = pc;
    return report;
}

namespace {

std::optional<double> overall_r(const RqReport& r) {
    for (const auto& c : r.rq1)
        if (c.group == "overall") return c.r;
    return std::nullopt;
}

std::optional<double> level2_beta(const RqReport& r, std::size_t idx) {
    for (const auto& m : r.rq2)
        if (m.level_model == 2 && idx < m.betas.size()) return m.betas[idx];
    return std::nullopt;
}

}  // namespace

GroupComparison rq5_compare(const ConversationForest& forest,
                            const AnalysisOptions& opts) {
    ConversationForest consensual, nonconsensual;
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        auto& dst = forest.labels[t].consensual ? consensual : nonconsensual;
        dst.trees.push_back(forest.trees[t]);
        dst.labels.push_back(forest.labels[t]);
    }
    if (consensual.trees.empty())
        throw ComparisonError("no consensual trees in forest");
    if (nonconsensual.trees.empty())
        throw ComparisonError("no non-consensual trees in forest");

    GroupComparison cmp;
    auto cm = compute_forest_metrics(consensual);
    auto nm = compute_forest_metrics(nonconsensual);
    cmp.consensual_report = run_all(consensual, cm, opts);
    cmp.nonconsensual_report = run_all(nonconsensual, nm, opts);

    auto add_delta = [&](const std::string& name, std::optional<double> c,
                         std::optional<double> n) {
        if (!c || !n) return;  // only matching keys
        cmp.deltas.push_back({name, *c, *n, *c - *n});
    };
    add_delta("rq1_overall_r", overall_r(cmp.consensual_report),
              overall_r(cmp.nonconsensual_report));
    add_delta("rq2_level2_beta_n1", level2_beta(cmp.consensual_report, 1),
              level2_beta(cmp.nonconsensual_report, 1));
    add_delta("rq2_level2_beta_n2", level2_beta(cmp.consensual_report, 2),
              level2_beta(cmp.nonconsensual_report, 2));
    add_delta("rq4_toxic_parent_child_toxic_rate",
              cmp.consensual_report.rq4_parent_child.toxic_parent_child_toxic_rate,
              cmp.nonconsensual_report.rq4_parent_child.toxic_parent_child_toxic_rate);
    add_delta("rq4_nontoxic_parent_child_toxic_rate",
              cmp.consensual_report.rq4_parent_child.nontoxic_parent_child_toxic_rate,
              cmp.nonconsensual_report.rq4_parent_child.nontoxic_parent_child_toxic_rate);
    return cmp;
}

}  // namespace toxtree
