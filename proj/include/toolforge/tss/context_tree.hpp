#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "toolforge/util.hpp"
#include "toolforge/value.hpp"

namespace toolforge::tss {

struct ContextNode {
    std::string label;
    std::vector<ContextNode> children;  // insertion order, labels unique (case-insensitive)

    const ContextNode* child(std::string_view label) const;
    /// Existing child with that label, or a new one.
    ContextNode& ensure_child(const std::string& label);
    std::size_t node_count() const;  // including this node
    /// Depth-first search for a descendant (or this node) with the label.
    const ContextNode* find(std::string_view label) const;
};

class ContextTree {
public:
    /// Root node of a domain, matched case-insensitively; nullptr when absent.
    const ContextNode* domain(std::string_view name) const;
    ContextNode& ensure_domain(const std::string& name);

    const std::map<std::string, ContextNode>& domains() const { return domains_; }
    bool empty() const { return domains_.empty(); }
    std::size_t node_count() const;

    /// True when path[0] names a domain and every later label is a node of it.
    bool resolves(const std::vector<std::string>& path) const;

    bool operator==(const ContextTree&) const;

private:
    std::map<std::string, ContextNode> domains_;
};

/// Inserts labels under `domain` (created if absent). A label written as
/// "A > B" nests B under A. Duplicate labels are ignored, so the call is
/// idempotent.
ContextTree grow_tree(ContextTree tree, const std::string& domain, const std::vector<std::string>& labels);

struct SubtreeSample {
    std::string domain;
    std::vector<std::string> labels;  // distinct, connected; [domain] for a childless domain

    std::vector<std::string> domain_path() const;
};

/// Picks a domain uniformly, then grows a connected set of 1..breadth nodes
/// downward from a uniform child of the root. Throws EmptyTree.
SubtreeSample sample_subtree(const ContextTree& tree, std::size_t breadth, Rng& rng);

Json tree_to_json(const ContextTree& tree);
ContextTree tree_from_json(const Json& j);
void write_tree(const std::filesystem::path& path, const ContextTree& tree);
ContextTree read_tree(const std::filesystem::path& path);

}  // namespace toolforge::tss
