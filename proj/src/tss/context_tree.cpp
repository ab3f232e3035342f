#include "toolforge/tss/context_tree.hpp"

#include <set>

#include "toolforge/errors.hpp"
#include "toolforge/serialize.hpp"

namespace toolforge::tss {

namespace {

bool same_label(std::string_view a, std::string_view b) { return to_lower(a) == to_lower(b); }

void node_to_json(const ContextNode& n, Json& out) {
    out = Json::object();
    out["label"] = n.label;
    out["children"] = Json::array();
    for (const auto& c : n.children) {
        Json cj;
        node_to_json(c, cj);
        out["children"].push_back(std::move(cj));
    }
}

ContextNode node_from_json(const Json& j, int depth) {
    if (depth > 512) throw ContractError("context tree nests too deeply");
    if (!j.is_object() || !j.contains("label") || !j["label"].is_string()) {
        throw ContractError("context tree node needs a string label");
    }
    ContextNode n;
    n.label = j["label"].get<std::string>();
    if (auto it = j.find("children"); it != j.end()) {
        if (!it->is_array()) throw ContractError("children of " + n.label + " must be a list");
        for (const auto& c : *it) {
            ContextNode child = node_from_json(c, depth + 1);
            if (n.child(child.label)) throw ContractError("duplicate sibling label " + child.label);
            n.children.push_back(std::move(child));
        }
    }
    return n;
}

}  // namespace

const ContextNode* ContextNode::child(std::string_view name) const {
    for (const auto& c : children) {
        if (same_label(c.label, name)) return &c;
    }
    return nullptr;
}

ContextNode& ContextNode::ensure_child(const std::string& name) {
    for (auto& c : children) {
        if (same_label(c.label, name)) return c;
    }
    children.push_back({name, {}});
    return children.back();
}

std::size_t ContextNode::node_count() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.node_count();
    return n;
}

const ContextNode* ContextNode::find(std::string_view name) const {
    if (same_label(label, name)) return this;
    for (const auto& c : children) {
        if (const auto* hit = c.find(name)) return hit;
    }
    return nullptr;
}

const ContextNode* ContextTree::domain(std::string_view name) const {
    for (const auto& [key, node] : domains_) {
        if (same_label(key, name)) return &node;
    }
    return nullptr;
}

ContextNode& ContextTree::ensure_domain(const std::string& name) {
    for (auto& [key, node] : domains_) {
        if (same_label(key, name)) return node;
    }
    return domains_.emplace(name, ContextNode{name, {}}).first->second;
}

std::size_t ContextTree::node_count() const {
    std::size_t n = 0;
    for (const auto& [_, node] : domains_) n += node.node_count();
    return n;
}

bool ContextTree::resolves(const std::vector<std::string>& path) const {
    if (path.empty()) return false;
    const ContextNode* root = domain(path[0]);
    if (root == nullptr) return false;
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (!root->find(path[i])) return false;
    }
    return true;
}

namespace {
bool nodes_equal(const ContextNode& a, const ContextNode& b) {
    if (a.label != b.label || a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!nodes_equal(a.children[i], b.children[i])) return false;
    }
    return true;
}
}  // namespace

bool ContextTree::operator==(const ContextTree& other) const {
    if (domains_.size() != other.domains_.size()) return false;
    auto it = other.domains_.begin();
    for (const auto& [key, node] : domains_) {
        if (key != it->first || !nodes_equal(node, it->second)) return false;
        ++it;
    }
    return true;
}

ContextTree grow_tree(ContextTree tree, const std::string& domain, const std::vector<std::string>& labels) {
    ContextNode* root = &tree.ensure_domain(trim(domain));
    for (const auto& label : labels) {
        ContextNode* at = root;
        std::string_view rest = label;
        while (true) {
            auto sep = rest.find(" > ");
            auto part = trim(rest.substr(0, sep));
            if (!part.empty()) at = &at->ensure_child(part);
            if (sep == std::string_view::npos) break;
            rest = rest.substr(sep + 3);
        }
    }
    return tree;
}

std::vector<std::string> SubtreeSample::domain_path() const {
    std::vector<std::string> path{domain};
    if (labels.size() == 1 && labels[0] == domain) return path;
    path.insert(path.end(), labels.begin(), labels.end());
    return path;
}

SubtreeSample sample_subtree(const ContextTree& tree, std::size_t breadth, Rng& rng) {
    if (tree.empty()) throw EmptyTree("context tree has no domains");
    if (breadth == 0) throw ContractError("breadth must be >= 1");
    auto it = tree.domains().begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.below(tree.domains().size())));
    const ContextNode& root = it->second;
    SubtreeSample out{root.label, {}};
    if (root.children.empty()) {
        out.labels.push_back(root.label);
        return out;
    }
    std::size_t size = rng.between(1, breadth);
    std::set<std::string> seen;
    std::vector<const ContextNode*> frontier;
    const ContextNode* start = &root.children[rng.below(root.children.size())];
    out.labels.push_back(start->label);
    seen.insert(to_lower(start->label));
    for (const auto& c : start->children) frontier.push_back(&c);
    while (out.labels.size() < size && !frontier.empty()) {
        std::size_t pick = rng.below(frontier.size());
        const ContextNode* n = frontier[pick];
        frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
        if (!seen.insert(to_lower(n->label)).second) continue;
        out.labels.push_back(n->label);
        for (const auto& c : n->children) frontier.push_back(&c);
    }
    return out;
}

Json tree_to_json(const ContextTree& tree) {
    Json domains = Json::object();
    for (const auto& [key, node] : tree.domains()) node_to_json(node, domains[key]);
    return Json{{"domains", domains}};
}

ContextTree tree_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("domains") || !j["domains"].is_object()) {
        throw ContractError("context tree JSON needs a \"domains\" object");
    }
    ContextTree tree;
    for (auto it = j["domains"].begin(); it != j["domains"].end(); ++it) {
        ContextNode node = node_from_json(it.value(), 0);
        ContextNode& root = tree.ensure_domain(it.key());
        root.children = std::move(node.children);
    }
    return tree;
}

void write_tree(const std::filesystem::path& path, const ContextTree& tree) { write_json_file(path, tree_to_json(tree)); }

ContextTree read_tree(const std::filesystem::path& path) { return tree_from_json(read_json_file(path)); }

}  // namespace toolforge::tss
