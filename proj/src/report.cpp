#include "toxtree/report.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

#include <json.hpp>

namespace toxtree {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

std::size_t word_count(const std::string& body) {
    std::size_t words = 0;
    bool in_word = false;
    for (unsigned char c : body) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

double median(std::vector<std::size_t>& v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    if (v.size() % 2 == 1) return static_cast<double>(v[mid]);
    return (static_cast<double>(v[mid - 1]) + static_cast<double>(v[mid])) / 2.0;
}

const char* filter_name(TrendFilter f) {
    return f == TrendFilter::All ? "all" : "toxic_root_gt_threshold";
}

json options_to_json(const AnalysisOptions& o) {
    return {{"exclude_leaves", o.exclude_leaves},
            {"include_roots", o.include_roots},
            {"toxic_threshold", o.toxic_threshold},
            {"max_depth", o.max_depth},
            {"max_level", o.max_level},
            {"bins", o.bins},
            {"drop_first_bin", o.drop_first_bin}};
}

AnalysisOptions options_from_json(const json& j) {
    AnalysisOptions o;
    o.exclude_leaves = j.value("exclude_leaves", o.exclude_leaves);
    o.include_roots = j.value("include_roots", o.include_roots);
    o.toxic_threshold = j.value("toxic_threshold", o.toxic_threshold);
    o.max_depth = j.value("max_depth", o.max_depth);
    o.max_level = j.value("max_level", o.max_level);
    o.bins = j.value("bins", o.bins);
    o.drop_first_bin = j.value("drop_first_bin", o.drop_first_bin);
    return o;
}

json rq_report_to_json(const RqReport& r) {
    json j;
    j["rq1"] = json::array();
    for (const auto& c : r.rq1)
        j["rq1"].push_back({{"group", c.group},
                            {"r", c.r},
                            {"p_value", c.p_value},
                            {"n", c.n},
                            {"leaves_excluded", c.leaves_excluded}});
    j["rq2"] = json::array();
    for (const auto& m : r.rq2)
        j["rq2"].push_back({{"level_model", m.level_model},
                            {"betas", m.betas},
                            {"n", m.n},
                            {"r_squared", m.r_squared}});
    j["rq3"] = json::array();
    for (const auto& d : r.rq3)
        j["rq3"].push_back({{"depth", d.depth},
                            {"mean_toxicity", d.mean_toxicity},
                            {"mean_ta", d.mean_ta},
                            {"sample_n", d.sample_n},
                            {"branch_terminating", d.branch_terminating},
                            {"branch_reaching", d.branch_reaching},
                            {"filter", filter_name(d.filter)}});
    j["rq4"]["bins"] = json::array();
    for (const auto& b : r.rq4_histogram.bins)
        j["rq4"]["bins"].push_back({{"low", b.low},
                                    {"high", b.high},
                                    {"opinion_sum", b.opinion_sum},
                                    {"response_count", b.response_count},
                                    {"dropped", b.dropped}});
    j["rq4"]["first_bin_dropped"] = r.rq4_histogram.first_bin_dropped;
    const auto& pc = r.rq4_parent_child;
    j["rq4"]["parent_child"] = {
        {"toxic_parent_n", pc.toxic_parent_n},
        {"nontoxic_parent_n", pc.nontoxic_parent_n},
        {"toxic_parent_children", pc.toxic_parent_children},
        {"nontoxic_parent_children", pc.nontoxic_parent_children},
        {"toxic_parent_child_toxic_rate", pc.toxic_parent_child_toxic_rate},
        {"nontoxic_parent_child_toxic_rate", pc.nontoxic_parent_child_toxic_rate}};
    return j;
}

RqReport rq_report_from_json(const json& j) {
    RqReport r;
    for (const auto& c : j.value("rq1", json::array())) {
        CorrelationResult cr;
        cr.group = c.value("group", "");
        cr.r = c.value("r", 0.0);
        cr.p_value = c.value("p_value", 1.0);
        cr.n = c.value("n", std::size_t{0});
        cr.leaves_excluded = c.value("leaves_excluded", true);
        r.rq1.push_back(std::move(cr));
    }
    for (const auto& m : j.value("rq2", json::array())) {
        RegressionResult rr;
        rr.level_model = m.value("level_model", 0);
        rr.betas = m.value("betas", std::vector<double>{});
        rr.n = m.value("n", std::size_t{0});
        rr.r_squared = m.value("r_squared", 0.0);
        r.rq2.push_back(std::move(rr));
    }
    for (const auto& d : j.value("rq3", json::array())) {
        DepthTrend dt;
        dt.depth = d.value("depth", 0);
        dt.mean_toxicity = d.value("mean_toxicity", 0.0);
        dt.mean_ta = d.value("mean_ta", 0.0);
        dt.sample_n = d.value("sample_n", std::size_t{0});
        dt.branch_terminating = d.value("branch_terminating", std::size_t{0});
        dt.branch_reaching = d.value("branch_reaching", std::size_t{0});
        dt.filter = d.value("filter", "all") == "all" ? TrendFilter::All
                                                      : TrendFilter::ToxicRoot;
        r.rq3.push_back(dt);
    }
    if (j.contains("rq4")) {
        const auto& q4 = j["rq4"];
        for (const auto& b : q4.value("bins", json::array())) {
            ParticipationBin pb;
            pb.low = b.value("low", 0.0);
            pb.high = b.value("high", 0.0);
            pb.opinion_sum = b.value("opinion_sum", std::uint64_t{0});
            pb.response_count = b.value("response_count", std::uint64_t{0});
            pb.dropped = b.value("dropped", false);
            r.rq4_histogram.bins.push_back(pb);
        }
        r.rq4_histogram.first_bin_dropped = q4.value("first_bin_dropped", false);
        if (q4.contains("parent_child")) {
            const auto& pc = q4["parent_child"];
            r.rq4_parent_child.toxic_parent_n =
                pc.value("toxic_parent_n", std::size_t{0});
            r.rq4_parent_child.nontoxic_parent_n =
                pc.value("nontoxic_parent_n", std::size_t{0});
            r.rq4_parent_child.toxic_parent_children =
                pc.value("toxic_parent_children", std::size_t{0});
            r.rq4_parent_child.nontoxic_parent_children =
                pc.value("nontoxic_parent_children", std::size_t{0});
            r.rq4_parent_child.toxic_parent_child_toxic_rate =
                pc.value("toxic_parent_child_toxic_rate", 0.0);
            r.rq4_parent_child.nontoxic_parent_child_toxic_rate =
                pc.value("nontoxic_parent_child_toxic_rate", 0.0);
        }
    }
    return r;
}

void write_csvs(const AnalysisReport& report) {
    const auto& dir = report.config.output_dir;
    const auto& r = report.results;

    {
        std::ofstream f(dir / "rq1.csv");
        f << "group,r,p_value,n,leaves_excluded\n";
        for (const auto& c : r.rq1)
            f << c.group << ',' << format_double(c.r) << ','
              << format_double(c.p_value) << ',' << c.n << ','
              << (c.leaves_excluded ? "true" : "false") << '\n';
    }
    {
        std::ofstream f(dir / "rq2.csv");
        f << "level_model,coefficient_index,coefficient,n\n";
        for (const auto& m : r.rq2)
            for (std::size_t i = 0; i < m.betas.size(); ++i)
                f << m.level_model << ',' << i << ',' << format_double(m.betas[i])
                  << ',' << m.n << '\n';
    }
    {
        std::ofstream f(dir / "rq3.csv");
        f << "depth,mean_toxicity,mean_ta,branch_terminating,branch_reaching,filter\n";
        for (const auto& d : r.rq3)
            f << d.depth << ',' << format_double(d.mean_toxicity) << ','
              << format_double(d.mean_ta) << ',' << d.branch_terminating << ','
              << d.branch_reaching << ',' << filter_name(d.filter) << '\n';
    }
    {
        std::ofstream f(dir / "rq4.csv");
        f << "bin_low,bin_high,opinion_sum,response_count,dropped\n";
        for (const auto& b : r.rq4_histogram.bins)
            f << format_double(b.low) << ',' << format_double(b.high) << ','
              << b.opinion_sum << ',' << b.response_count << ','
              << (b.dropped ? "true" : "false") << '\n';
    }
    if (report.rq5) {
        std::ofstream f(dir / "rq5.csv");
        f << "metric,consensual,nonconsensual,delta\n";
        for (const auto& d : report.rq5->deltas)
            f << d.metric << ',' << format_double(d.consensual) << ','
              << format_double(d.nonconsensual) << ',' << format_double(d.delta)
              << '\n';
    }
}

}  // namespace

CorpusSummary summarize_corpus(const ConversationForest& forest,
                               const IngestStats& stats) {
    CorpusSummary s;
    s.ingest = stats;
    s.trees = forest.trees.size();
    s.nodes = forest.node_count();
    std::vector<std::size_t> post_words, response_words;
    for (const auto& tree : forest.trees) {
        for (std::uint32_t i = 0; i < tree.size(); ++i) {
            const auto& node = tree.node(i);
            if (node.text_missing) {
                ++s.unscored_imputed;
                continue;
            }
            auto& dst = tree.parent_index(i) < 0 ? post_words : response_words;
            dst.push_back(word_count(node.body));
        }
    }
    s.median_post_words = median(post_words);
    s.median_response_words = median(response_words);
    return s;
}

void write_report(const AnalysisReport& report) {
    std::filesystem::create_directories(report.config.output_dir);

    json j;
    j["tool_version"] = kToolVersion;
    j["config"] = {
        {"manifest_path", report.config.manifest_path.string()},
        {"output_dir", report.config.output_dir.string()},
        {"analysis", options_to_json(report.config.analysis)},
        {"scorer", report.config.scorer_name},
        {"scorer_version", report.config.scorer_version},
        {"seed", report.config.seed ? json(*report.config.seed) : json(nullptr)}};
    j["corpus"] = {{"accepted", report.corpus.ingest.accepted},
                   {"orphans_dropped", report.corpus.ingest.orphans_dropped},
                   {"duplicates_rejected", report.corpus.ingest.duplicates_rejected},
                   {"deleted_retained", report.corpus.ingest.deleted_retained},
                   {"stubs_skipped", report.corpus.ingest.stubs_skipped},
                   {"trees", report.corpus.trees},
                   {"nodes", report.corpus.nodes},
                   {"median_post_words", report.corpus.median_post_words},
                   {"median_response_words", report.corpus.median_response_words},
                   {"unscored_imputed", report.corpus.unscored_imputed}};
    j["results"] = rq_report_to_json(report.results);
    if (report.rq5) {
        j["rq5"]["consensual"] = rq_report_to_json(report.rq5->consensual_report);
        j["rq5"]["nonconsensual"] = rq_report_to_json(report.rq5->nonconsensual_report);
        j["rq5"]["deltas"] = json::array();
        for (const auto& d : report.rq5->deltas)
            j["rq5"]["deltas"].push_back({{"metric", d.metric},
                                          {"consensual", d.consensual},
                                          {"nonconsensual", d.nonconsensual},
                                          {"delta", d.delta}});
    }

    std::ofstream out(report.config.output_dir / "report.json");
    if (!out) throw IoError("cannot write report.json");
    out << j.dump(2) << '\n';

    write_csvs(report);
}

AnalysisReport load_report(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw IoError("cannot read report: " + json_path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid report.json: ") + e.what());
    }
    AnalysisReport report;
    const auto& cfg = j.value("config", json::object());
    report.config.manifest_path = cfg.value("manifest_path", "");
    report.config.output_dir = cfg.value("output_dir", ".");
    report.config.analysis = options_from_json(cfg.value("analysis", json::object()));
    report.config.scorer_name = cfg.value("scorer", "");
    report.config.scorer_version = cfg.value("scorer_version", "");
    if (cfg.contains("seed") && !cfg["seed"].is_null())
        report.config.seed = cfg["seed"].get<std::uint64_t>();
    const auto& corpus = j.value("corpus", json::object());
    report.corpus.ingest.accepted = corpus.value("accepted", std::size_t{0});
    report.corpus.ingest.orphans_dropped =
        corpus.value("orphans_dropped", std::size_t{0});
    report.corpus.ingest.duplicates_rejected =
        corpus.value("duplicates_rejected", std::size_t{0});
    report.corpus.ingest.deleted_retained =
        corpus.value("deleted_retained", std::size_t{0});
    report.corpus.ingest.stubs_skipped = corpus.value("stubs_skipped", std::size_t{0});
    report.corpus.trees = corpus.value("trees", std::size_t{0});
    report.corpus.nodes = corpus.value("nodes", std::size_t{0});
    report.corpus.median_post_words = corpus.value("median_post_words", 0.0);
    report.corpus.median_response_words = corpus.value("median_response_words", 0.0);
    report.corpus.unscored_imputed = corpus.value("unscored_imputed", std::size_t{0});
    report.results = rq_report_from_json(j.value("results", json::object()));
    if (j.contains("rq5")) {
        GroupComparison cmp;
        cmp.consensual_report = rq_report_from_json(j["rq5"].value("consensual", json::object()));
        cmp.nonconsensual_report =
            rq_report_from_json(j["rq5"].value("nonconsensual", json::object()));
        for (const auto& d : j["rq5"].value("deltas", json::array()))
            cmp.deltas.push_back({d.value("metric", ""), d.value("consensual", 0.0),
                                  d.value("nonconsensual", 0.0), d.value("delta", 0.0)});
        report.rq5 = std::move(cmp);
    }
    return report;
}

}  // namespace toxtree
