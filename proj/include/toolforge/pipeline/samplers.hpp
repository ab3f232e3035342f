#pragma once

#include <map>
#include <string>
#include <vector>

#include "toolforge/dialog.hpp"
#include "toolforge/tss/context_tree.hpp"

namespace toolforge::pipeline {

struct ComplexitySplit {
    std::vector<DataSample> easy;
    std::vector<DataSample> medium;
    std::vector<DataSample> hard;
};

/// Sorts by (loss, sample_id); easy = first n, hard = last n, medium = the n
/// starting at floor((size - n) / 2). Throws InsufficientCorpus when
/// size < 3n and MissingScores when a sample has no complexity.
ComplexitySplit sample_by_complexity(const std::vector<DataSample>& corpus, std::size_t n);

struct ApiCluster {
    std::string root;                 // label of the subtree root
    std::vector<std::string> apis;    // sorted API names
};

/// Partitions the corpus's APIs by context-tree locality. Groups start as
/// the domains; the two smallest merge while there are more than k; while
/// there are fewer, the largest splittable group gives up its largest child
/// subtree. An API sits at the node named by domain_path[1] (or its domain
/// root). Throws UnresolvedDomainPath and TooFewClusters.
std::vector<ApiCluster> cluster_apis(const std::vector<ApiDefinition>& apis, const tss::ContextTree& tree, std::size_t k);

struct DiversityOptions {
    std::size_t clusters = 30;       // k
    std::size_t clusters_used = 30;
    std::size_t max_size = 0;        // 0: no truncation
    std::uint64_t seed = 0;
};

/// Samples whose every tool belongs to `clusters_used` seeded-chosen clusters,
/// truncated by a seeded uniform draw and kept in corpus order.
std::vector<DataSample> sample_by_diversity(const std::vector<DataSample>& corpus, const tss::ContextTree& tree,
                                            const DiversityOptions& options);

/// Distinct APIs (by name, first occurrence) across the corpus's tool lists.
std::vector<ApiDefinition> corpus_apis(const std::vector<DataSample>& corpus);

}  // namespace toolforge::pipeline
