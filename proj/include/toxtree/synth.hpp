#pragma once
// Seeded synthetic conversation forests with a planted toxicity model,
// used as ground truth for validating the analysis pipelines.

#include <cstdint>
#include <optional>
#include <vector>

#include "toxtree/model.hpp"

namespace toxtree {

struct SynthParams {
    int trees = 100;
    double mean_children = 1.5;   // expected children of a root
    double depth_decay = 0.7;     // branching mean multiplier per level
    double base_toxic_rate = 0.19;
    double contagion_rate = 0.28;  // child-toxic rate under a toxic parent
    // When set, scores come from the linear-context model
    // T = betas[0] + sum_i betas[i] * T(ancestor_i) + noise, clipped to [0,1],
    // instead of the two-rate contagion model.
    std::optional<std::vector<double>> regression_betas;
    double noise = 0.02;
    int max_depth = 60;
    int max_children = 32;
    std::string community = "synthetic";
    bool consensual = false;
};

// Deterministic per seed: identical parameters and seed give a
// byte-identical forest on every platform. Toxicity is pre-assigned.
ConversationForest synth_forest(const SynthParams& params, std::uint64_t seed);

}  // namespace toxtree
