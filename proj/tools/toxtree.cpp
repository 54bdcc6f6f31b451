// toxtree: conversation-tree toxicity analytics.
// Subcommands: ingest, score, analyze, synth, report.
// Exit codes: 0 success, 1 usage/parameter, 2 input/parse, 3 scorer failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include <CLI11.hpp>

#include "toxtree/analysis.hpp"
#include "toxtree/ingest.hpp"
#include "toxtree/metrics.hpp"
#include "toxtree/model.hpp"
#include "toxtree/report.hpp"
#include "toxtree/scoring.hpp"
#include "toxtree/synth.hpp"

namespace fs = std::filesystem;
using namespace toxtree;

namespace {

struct CliArgs {
    fs::path manifest;
    fs::path forest_cache;
    fs::path score_cache;
    fs::path output_dir = ".";
    fs::path report_json;
    fs::path lexicon_path = "data/lexicon.txt";

    std::string backend = "lexicon";
    std::string endpoint;
    int batch_size = 64;
    int max_in_flight = 4;
    int retry_limit = 3;

    AnalysisOptions analysis;
    std::uint64_t seed = 42;
    bool seed_set = false;

    SynthParams synth;
    std::string betas_csv;
};

int run_ingest(const CliArgs& args) {
    auto manifest = parse_manifest(args.manifest);
    auto [forest, stats] = load_corpus(manifest);
    write_forest_cache(forest, args.forest_cache);
    std::cout << "accepted=" << stats.accepted
              << " orphans=" << stats.orphans_dropped
              << " duplicates=" << stats.duplicates_rejected
              << " deleted_retained=" << stats.deleted_retained
              << " stubs_skipped=" << stats.stubs_skipped
              << " trees=" << forest.trees.size() << '\n';
    return 0;
}

ScorerConfig scorer_config(const CliArgs& args) {
    ScorerConfig cfg;
    if (args.backend == "lexicon") cfg.backend = ScorerBackend::Lexicon;
    else if (args.backend == "precomputed") cfg.backend = ScorerBackend::Precomputed;
    else if (args.backend == "remote") cfg.backend = ScorerBackend::Remote;
    else throw ParameterError("unknown backend: " + args.backend);
    cfg.endpoint_url = args.endpoint;
    cfg.batch_size = args.batch_size;
    cfg.max_in_flight = args.max_in_flight;
    cfg.retry_limit = args.retry_limit;
    cfg.lexicon_path = args.lexicon_path;
    if (cfg.backend == ScorerBackend::Remote && cfg.endpoint_url.empty())
        throw ParameterError("remote backend requires --endpoint");
    return cfg;
}

int run_score(const CliArgs& args) {
    auto forest = load_forest_cache(args.forest_cache);
    auto cfg = scorer_config(args);

    std::unordered_set<NodeId> already;
    if (fs::exists(args.score_cache))
        for (const auto& r : load_score_cache(args.score_cache)) already.insert(r.id);

    // Collect unscored nodes (missing-text nodes never receive a score).
    std::vector<const ConversationNode*> pending;
    for (const auto& tree : forest.trees)
        for (const auto& node : tree.nodes())
            if (!node.text_missing && !already.count(node.id)) pending.push_back(&node);

    std::vector<ScoreRecord> fresh;
    if (cfg.backend == ScorerBackend::Lexicon) {
        auto lexicon = Lexicon::load(cfg.lexicon_path);
        fresh.reserve(pending.size());
        for (const auto* node : pending)
            fresh.push_back({node->id, lexicon.score(node->body), "lexicon",
                             lexicon.version()});
    } else if (cfg.backend == ScorerBackend::Remote) {
        std::vector<std::string> bodies;
        bodies.reserve(pending.size());
        for (const auto* node : pending) bodies.push_back(node->body);
        auto scores = remote_score_batch(bodies, cfg);
        fresh.reserve(pending.size());
        for (std::size_t i = 0; i < pending.size(); ++i)
            fresh.push_back({pending[i]->id, scores[i], "remote", cfg.endpoint_url});
    } else {
        // Precomputed: the cache is the source; report remaining coverage.
        std::cout << "precomputed backend: " << pending.size()
                  << " nodes without cached scores\n";
        return 0;
    }
    append_score_cache(args.score_cache, fresh);
    std::cout << fresh.size() << " newly scored\n";
    return 0;
}

int run_analyze(const CliArgs& args) {
    auto forest = load_forest_cache(args.forest_cache);
    std::string scorer_name = "cached";
    std::string scorer_version;
    if (!args.score_cache.empty()) {
        auto records = load_score_cache(args.score_cache);
        auto report = attach_scores(forest, records);
        if (!records.empty()) {
            scorer_name = records.front().scorer_name;
            scorer_version = records.front().model_version;
        }
        if (report.unmatched_records > 0)
            std::cerr << "warning: " << report.unmatched_records
                      << " score records matched no node\n";
    }
    auto metrics = compute_forest_metrics(forest);

    AnalysisReport report;
    report.config.manifest_path = args.forest_cache;
    report.config.output_dir = args.output_dir;
    report.config.analysis = args.analysis;
    report.config.scorer_name = scorer_name;
    report.config.scorer_version = scorer_version;
    if (args.seed_set) report.config.seed = args.seed;
    report.corpus = summarize_corpus(forest, IngestStats{});
    report.corpus.ingest.accepted = forest.node_count();
    report.results = run_all(forest, metrics, args.analysis);

    bool has_consensual = false, has_nonconsensual = false;
    for (const auto& label : forest.labels)
        (label.consensual ? has_consensual : has_nonconsensual) = true;
    if (has_consensual && has_nonconsensual)
        report.rq5 = rq5_compare(forest, args.analysis);
    else
        std::cerr << "notice: single consent class, rq5 comparison skipped\n";

    write_report(report);
    std::cout << "report written to " << args.output_dir.string() << '\n';
    return 0;
}

int run_synth(CliArgs& args) {
    if (!args.betas_csv.empty()) {
        std::vector<double> betas;
        std::stringstream ss(args.betas_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) betas.push_back(std::stod(tok));
        args.synth.regression_betas = std::move(betas);
    }
    auto forest = synth_forest(args.synth, args.seed);

    fs::create_directories(args.output_dir);
    const fs::path corpus_path = args.output_dir / "corpus.jsonl";
    const fs::path scores_path = args.output_dir / "scores.jsonl";
    const fs::path manifest_path = args.output_dir / "manifest.json";

    std::vector<RawRecord> records;
    std::vector<ScoreRecord> scores;
    for (const auto& tree : forest.trees) {
        for (const auto& node : tree.nodes()) {
            RawRecord r;
            r.id = node.id;
            r.parent = node.parent;
            r.author = node.author;
            r.created_utc = node.created_utc;
            r.vote_score = node.vote_score;
            r.body = node.body;
            r.community = node.community;
            records.push_back(std::move(r));
            scores.push_back({node.id, *node.toxicity, "synthetic",
                              "seed=" + std::to_string(args.seed)});
        }
    }
    {
        std::ofstream out(corpus_path);
        if (!out) throw IoError("cannot write " + corpus_path.string());
        emit_canonical(records, out);
    }
    if (fs::exists(scores_path)) fs::remove(scores_path);
    append_score_cache(scores_path, scores);
    {
        std::ofstream out(manifest_path);
        out << "{\"entries\":[{\"path\":\"" << corpus_path.generic_string()
            << "\",\"community\":\"" << args.synth.community
            << "\",\"consensual\":" << (args.synth.consensual ? "true" : "false")
            << "}],\"scores_path\":\"" << scores_path.generic_string() << "\"}\n";
    }
    std::cout << "synthesized " << forest.node_count() << " nodes in "
              << forest.trees.size() << " trees\n";
    return 0;
}

int run_report(const CliArgs& args) {
    auto report = load_report(args.report_json);
    report.config.output_dir = args.output_dir;
    write_report(report);
    std::cout << "report re-rendered to " << args.output_dir.string() << '\n';
    return 0;
}

void add_analysis_flags(CLI::App* cmd, CliArgs& args) {
    cmd->add_flag("--exclude-leaves,!--include-leaves", args.analysis.exclude_leaves,
                  "Exclude leaf responses from the RQ1 sample");
    cmd->add_flag("--include-roots,!--exclude-roots", args.analysis.include_roots,
                  "Include posts (roots) in RQ1/RQ4 samples");
    cmd->add_option("--toxic-threshold", args.analysis.toxic_threshold,
                    "Toxic/non-toxic cut")
        ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
    cmd->add_option("--max-depth", args.analysis.max_depth, "Depth-trend cutoff")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--levels", args.analysis.max_level, "Deepest context model")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--bins", args.analysis.bins, "Participation bins")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--drop-first-bin,!--keep-first-bin", args.analysis.drop_first_bin,
                  "Drop the [0,0.1) bin from the participation plot series");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conversation-tree toxicity analytics"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file overriding defaults");
    CliArgs args;

    auto* ingest = app.add_subcommand("ingest", "Parse a corpus manifest into a forest cache");
    ingest->add_option("--manifest", args.manifest, "Corpus manifest JSON")->required();
    ingest->add_option("--out", args.forest_cache, "Forest cache path")->required();

    auto* score = app.add_subcommand("score", "Score unscored nodes into a score cache");
    score->add_option("--forest", args.forest_cache, "Forest cache")->required();
    score->add_option("--scores", args.score_cache, "Score cache path")->required();
    score->add_option("--backend", args.backend, "lexicon | precomputed | remote");
    score->add_option("--lexicon", args.lexicon_path, "Lexicon file");
    score->add_option("--endpoint", args.endpoint, "Remote scorer base URL");
    score->add_option("--batch-size", args.batch_size)->check(CLI::PositiveNumber);
    score->add_option("--max-in-flight", args.max_in_flight)->check(CLI::PositiveNumber);
    score->add_option("--retry-limit", args.retry_limit)->check(CLI::NonNegativeNumber);

    auto* analyze = app.add_subcommand("analyze", "Run RQ1-RQ5 and emit reports");
    analyze->add_option("--forest", args.forest_cache, "Forest cache")->required();
    analyze->add_option("--scores", args.score_cache, "Score cache");
    analyze->add_option("--out", args.output_dir, "Output directory")->required();
    analyze->add_option("--seed", args.seed)->each([&](const std::string&) {
        args.seed_set = true;
    });
    add_analysis_flags(analyze, args);

    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
    synth->add_option("--out", args.output_dir, "Output directory")->required();
    synth->add_option("--trees", args.synth.trees)->check(CLI::PositiveNumber);
    synth->add_option("--mean-children", args.synth.mean_children);
    synth->add_option("--depth-decay", args.synth.depth_decay);
    synth->add_option("--base-rate", args.synth.base_toxic_rate);
    synth->add_option("--contagion", args.synth.contagion_rate);
    synth->add_option("--betas", args.betas_csv,
                      "Comma-separated linear-model coefficients (intercept first)");
    synth->add_option("--noise", args.synth.noise);
    synth->add_option("--synth-max-depth", args.synth.max_depth);
    synth->add_option("--community", args.synth.community);
    synth->add_flag("--consensual", args.synth.consensual);
    synth->add_option("--seed", args.seed);

    auto* report = app.add_subcommand("report", "Re-render CSVs from report.json");
    report->add_option("--json", args.report_json, "Existing report.json")->required();
    report->add_option("--out", args.output_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*ingest) return run_ingest(args);
        if (*score) return run_score(args);
        if (*analyze) return run_analyze(args);
        if (*synth) return run_synth(args);
        if (*report) return run_report(args);
    } catch (const ScorerUnavailableError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ProtocolError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
