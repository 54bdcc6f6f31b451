#include "toxtree/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace toxtree {

namespace {

// Uniform doubles derived directly from the mt19937_64 bit stream, so the
// draw sequence is identical on every platform (std distributions are not
// specified bit-exactly).
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Geometric number of children with the given mean, truncated.
int child_count(std::mt19937_64& rng, double mean, int cap) {
    if (mean <= 0.0) return 0;
    const double p = 1.0 / (1.0 + mean);
    const double u = uniform01(rng);
    const int k = static_cast<int>(std::floor(std::log1p(-u) / std::log1p(-p)));
    return std::min(k, cap);
}

void validate(const SynthParams& p) {
    auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (p.trees <= 0) throw ParameterError("trees must be positive");
    if (!prob(p.base_toxic_rate) || !prob(p.contagion_rate) || !prob(p.depth_decay))
        throw ParameterError("rates must lie in [0,1]");
    if (p.mean_children < 0.0) throw ParameterError("mean_children must be >= 0");
    if (p.noise < 0.0 || p.noise > 1.0) throw ParameterError("noise must lie in [0,1]");
    if (p.max_depth < 0 || p.max_children < 1)
        throw ParameterError("invalid depth/children limits");
    if (p.regression_betas && p.regression_betas->empty())
        throw ParameterError("regression_betas must include an intercept");
}

struct Pending {
    NodeId id;
    int depth;
    double toxicity;
    std::vector<double> ancestor_tox;  // nearest first, capped at context length
};

}  // namespace

ConversationForest synth_forest(const SynthParams& params, std::uint64_t seed) {
    validate(params);
    std::mt19937_64 rng(seed);

    const bool linear = params.regression_betas.has_value();
    const std::size_t context =
        linear ? params.regression_betas->size() - 1 : std::size_t{1};

    auto draw_toxicity = [&](const std::vector<double>& ancestors) {
        if (linear) {
            const auto& b = *params.regression_betas;
            double t = b[0];
            for (std::size_t i = 1; i < b.size(); ++i)
                t += b[i] * (i - 1 < ancestors.size() ? ancestors[i - 1] : 0.0);
            t += params.noise * (2.0 * uniform01(rng) - 1.0);
            return std::clamp(t, 0.0, 1.0);
        }
        const bool parent_toxic = !ancestors.empty() && ancestors.front() > 0.5;
        const double toxic_rate =
            parent_toxic ? params.contagion_rate : params.base_toxic_rate;
        const bool toxic = uniform01(rng) < toxic_rate;
        // Toxic scores land in (0.5, 1], non-toxic in [0, 0.5).
        const double u = uniform01(rng);
        return toxic ? 0.5 + 0.5 * (1.0 - u) : 0.5 * u;
    };

    std::vector<ConversationNode> records;
    std::int64_t clock = 0;
    for (int t = 0; t < params.trees; ++t) {
        const std::string prefix = "t" + std::to_string(t) + "_n";
        std::size_t counter = 0;
        std::deque<Pending> queue;

        Pending root;
        root.id = prefix + std::to_string(counter++);
        root.depth = 0;
        root.toxicity = draw_toxicity({});
        queue.push_back(root);

        ConversationNode root_node;
        root_node.id = root.id;
        root_node.author = "synthetic";
        root_node.created_utc = clock++;
        root_node.body = "synthetic post";
        root_node.community = params.community;
        root_node.toxicity = root.toxicity;
        records.push_back(std::move(root_node));

        while (!queue.empty()) {
            Pending cur = std::move(queue.front());
            queue.pop_front();
            if (cur.depth >= params.max_depth) continue;
            const double mean =
                params.mean_children * std::pow(params.depth_decay, cur.depth);
            const int kids = child_count(rng, mean, params.max_children);
            for (int c = 0; c < kids; ++c) {
                Pending child;
                child.id = prefix + std::to_string(counter++);
                child.depth = cur.depth + 1;
                child.ancestor_tox.push_back(cur.toxicity);
                for (double a : cur.ancestor_tox) {
                    if (child.ancestor_tox.size() >= context) break;
                    child.ancestor_tox.push_back(a);
                }
                child.toxicity = draw_toxicity(child.ancestor_tox);

                ConversationNode node;
                node.id = child.id;
                node.parent = cur.id;
                node.author = "synthetic";
                node.created_utc = clock++;
                node.body = "synthetic response";
                node.community = params.community;
                node.toxicity = child.toxicity;
                records.push_back(std::move(node));
                queue.push_back(std::move(child));
            }
        }
    }

    auto [forest, stats] = build_forest(std::move(records));
    (void)stats;
    for (auto& label : forest.labels) label.consensual = params.consensual;
    return forest;
}

}  // namespace toxtree
