#pragma once

// Synthetic inputs shared by the unit and acceptance tests.

#include <random>
#include <string>
#include <vector>

#include "toolforge/api.hpp"
#include "toolforge/dialog.hpp"
#include "toolforge/tss/context_tree.hpp"

namespace fixture {

using namespace toolforge;

struct ApiForest {
    tss::ContextTree tree;
    std::vector<ApiDefinition> apis;
};

// Six domains with five APIs each. Each domain has two branches (three and
// two leaves); every API sits on its own leaf.
inline ApiForest six_domains() {
    ApiForest f;
    const char* domains[] = {"Weather", "Finance", "Travel", "Health", "Music", "Sports"};
    for (const char* d : domains) {
        std::vector<std::string> labels;
        for (int leaf = 0; leaf < 5; ++leaf) {
            std::string branch = std::string(d) + (leaf < 3 ? " core" : " extra");
            std::string name = std::string(d) + " leaf " + std::to_string(leaf);
            labels.push_back(branch + " > " + name);
            ApiDefinition api;
            api.name = to_lower(d) + "_api_" + std::to_string(leaf);
            api.description = "Test API.";
            api.parameters = ParamSchema::dict();
            api.domain_path = {d, name};
            f.apis.push_back(api);
        }
        f.tree = tss::grow_tree(std::move(f.tree), d, labels);
    }
    return f;
}

// Corpus of `n` single-call samples with losses drawn from a small set so
// that ties are common.
inline std::vector<DataSample> scored_corpus(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<DataSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        DataSample s;
        char id[32];
        std::snprintf(id, sizeof id, "s-%06zu", static_cast<std::size_t>(rng() % 1000000));
        s.sample_id = std::string(id) + "-" + std::to_string(i);
        s.dialog_type = DialogType::NonToolUse;
        s.turns = {DialogTurn::user("q"), DialogTurn::assistant("a.")};
        s.complexity = ComplexityScore{static_cast<double>(rng() % 97) / 16.0, 3};
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace fixture
