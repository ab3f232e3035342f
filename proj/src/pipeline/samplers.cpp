#include "toolforge/pipeline/samplers.hpp"

#include <algorithm>
#include <set>

#include "toolforge/errors.hpp"
#include "toolforge/util.hpp"

namespace toolforge::pipeline {

ComplexitySplit sample_by_complexity(const std::vector<DataSample>& corpus, std::size_t n) {
    if (corpus.size() < 3 * n) {
        throw InsufficientCorpus("corpus has " + std::to_string(corpus.size()) + " samples, need " + std::to_string(3 * n));
    }
    std::vector<const DataSample*> order;
    order.reserve(corpus.size());
    for (const auto& s : corpus) {
        if (!s.complexity) throw MissingScores("sample " + s.sample_id + " has no complexity score");
        order.push_back(&s);
    }
    std::sort(order.begin(), order.end(), [](const DataSample* a, const DataSample* b) {
        if (a->complexity->loss != b->complexity->loss) return a->complexity->loss < b->complexity->loss;
        return a->sample_id < b->sample_id;
    });
    ComplexitySplit out;
    const std::size_t mid = (order.size() - n) / 2;
    for (std::size_t i = 0; i < n; ++i) {
        out.easy.push_back(*order[i]);
        out.medium.push_back(*order[mid + i]);
        out.hard.push_back(*order[order.size() - n + i]);
    }
    return out;
}

std::vector<ApiDefinition> corpus_apis(const std::vector<DataSample>& corpus) {
    std::vector<ApiDefinition> out;
    std::set<std::string> seen;
    for (const auto& s : corpus) {
        for (const auto& t : s.tool_list) {
            if (seen.insert(t.name).second) out.push_back(t);
        }
    }
    return out;
}

namespace {

struct Group {
    const tss::ContextNode* root = nullptr;
    std::vector<const tss::ContextNode*> excluded;  // children already split off
    std::vector<std::pair<std::string, const tss::ContextNode*>> members;  // api name, anchor
};

bool within(const tss::ContextNode* node, const tss::ContextNode* target) {
    if (node == target) return true;
    for (const auto& c : node->children) {
        if (within(&c, target)) return true;
    }
    return false;
}

// Tries to split `g`; returns the new group, or nothing when `g` cannot split.
std::optional<Group> split(Group& g) {
    while (true) {
        const tss::ContextNode* best = nullptr;
        std::size_t best_count = 0;
        for (const auto& c : g.root->children) {
            if (std::find(g.excluded.begin(), g.excluded.end(), &c) != g.excluded.end()) continue;
            std::size_t count = 0;
            for (const auto& m : g.members) count += within(&c, m.second) ? 1 : 0;
            if (count > best_count) {
                best = &c;
                best_count = count;
            }
        }
        if (best == nullptr) return std::nullopt;
        if (best_count < g.members.size()) {
            Group out;
            out.root = best;
            std::vector<std::pair<std::string, const tss::ContextNode*>> keep;
            for (auto& m : g.members) (within(best, m.second) ? out.members : keep).push_back(m);
            g.members = std::move(keep);
            g.excluded.push_back(best);
            return out;
        }
        // Every member sits below `best`: descend without changing the group.
        g.root = best;
        g.excluded.clear();
    }
}

}  // namespace

std::vector<ApiCluster> cluster_apis(const std::vector<ApiDefinition>& apis, const tss::ContextTree& tree, std::size_t k) {
    if (k == 0) throw ContractError("cluster count must be positive");
    std::vector<Group> groups;
    std::map<const tss::ContextNode*, std::size_t> by_domain;
    for (const auto& api : apis) {
        if (api.domain_path.empty()) throw UnresolvedDomainPath(api.name + " has no domain_path");
        const tss::ContextNode* root = tree.domain(api.domain_path[0]);
        if (root == nullptr) throw UnresolvedDomainPath(api.name + ": unknown domain " + api.domain_path[0]);
        const tss::ContextNode* anchor = root;
        if (api.domain_path.size() > 1) {
            anchor = root->find(api.domain_path[1]);
            if (anchor == nullptr) throw UnresolvedDomainPath(api.name + ": unknown node " + api.domain_path[1]);
        }
        auto [it, fresh] = by_domain.emplace(root, groups.size());
        if (fresh) groups.push_back({root, {}, {}});
        groups[it->second].members.emplace_back(api.name, anchor);
    }
    // Domain order, not first-seen order.
    std::stable_sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) { return a.root->label < b.root->label; });
    while (groups.size() > k) {
        std::vector<std::size_t> idx(groups.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return groups[a].members.size() < groups[b].members.size();
        });
        std::size_t a = std::min(idx[0], idx[1]), b = std::max(idx[0], idx[1]);
        auto& into = groups[a].members;
        into.insert(into.end(), groups[b].members.begin(), groups[b].members.end());
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(b));
    }
    std::set<std::size_t> stuck;
    while (groups.size() < k) {
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (stuck.count(i)) continue;
            if (!pick || groups[i].members.size() > groups[*pick].members.size()) pick = i;
        }
        if (!pick) {
            throw TooFewClusters("the tree supports only " + std::to_string(groups.size()) + " clusters, " +
                                 std::to_string(k) + " requested");
        }
        auto extra = split(groups[*pick]);
        if (!extra) {
            stuck.insert(*pick);
            continue;
        }
        groups.push_back(std::move(*extra));
    }
    std::vector<ApiCluster> out;
    for (const auto& g : groups) {
        ApiCluster c{g.root->label, {}};
        for (const auto& m : g.members) c.apis.push_back(m.first);
        std::sort(c.apis.begin(), c.apis.end());
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<DataSample> sample_by_diversity(const std::vector<DataSample>& corpus, const tss::ContextTree& tree,
                                            const DiversityOptions& options) {
    auto clusters = cluster_apis(corpus_apis(corpus), tree, options.clusters);
    if (options.clusters_used > clusters.size()) {
        throw TooFewClusters("asked for " + std::to_string(options.clusters_used) + " of " + std::to_string(clusters.size()) + " clusters");
    }
    std::vector<std::size_t> order(clusters.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(mix_seed(options.seed, 0xd1));
    rng.shuffle(order);
    std::set<std::string> allowed;
    for (std::size_t i = 0; i < options.clusters_used; ++i) {
        for (const auto& a : clusters[order[i]].apis) allowed.insert(a);
    }
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& tools = corpus[i].tool_list;
        if (std::all_of(tools.begin(), tools.end(), [&](const ApiDefinition& t) { return allowed.count(t.name) > 0; })) {
            hits.push_back(i);
        }
    }
    if (options.max_size > 0 && hits.size() > options.max_size) {
        rng.shuffle(hits);
        hits.resize(options.max_size);
        std::sort(hits.begin(), hits.end());
    }
    std::vector<DataSample> out;
    for (auto i : hits) out.push_back(corpus[i]);
    return out;
}

}  // namespace toolforge::pipeline
