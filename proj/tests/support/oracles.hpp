#pragma once

// Reference implementations the tests compare the library against. They are
// written from the definitions, not from the library code, and only use the
// library for data types.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "toolforge/call_string.hpp"
#include "toolforge/dialog.hpp"
#include "toolforge/serialize.hpp"

#ifndef TOOLFORGE_SOURCE_DIR
#define TOOLFORGE_SOURCE_DIR "."
#endif

namespace oracle {

using toolforge::FunctionCall;
using toolforge::Json;
using toolforge::Value;
using toolforge::ValueList;
using toolforge::ValueMap;

inline std::filesystem::path source_dir() { return TOOLFORGE_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "tests" / "fixtures" / rel; }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Mean negative log-likelihood per target token.
inline double reference_loss(const std::vector<double>& logprobs) {
    long double sum = 0;
    for (double lp : logprobs) sum += lp;
    return static_cast<double>(-sum / static_cast<long double>(logprobs.size()));
}

// Random call-list generator over the full value grammar.
class CallGen {
public:
    explicit CallGen(std::uint64_t seed) : rng_(seed) {}

    std::vector<FunctionCall> calls() {
        std::vector<FunctionCall> out(1 + pick(3));
        for (auto& c : out) {
            c.api_name = name(pick(4) == 0);
            std::set<std::string> used;
            std::size_t n = pick(5);
            for (std::size_t i = 0; i < n; ++i) {
                std::string key = ident();
                if (!used.insert(key).second) continue;
                c.arguments.push_back({key, value(0)});
            }
        }
        return out;
    }

    Value value(int depth) {
        switch (pick(depth >= 3 ? 4 : 6)) {
            case 0: return Value(text());
            case 1: return Value(static_cast<std::int64_t>(rng_()) >> pick(64));
            case 2: return Value(real());
            case 3: return Value(pick(2) == 0);
            case 4: {
                ValueList l;
                for (std::size_t i = 0, n = pick(4); i < n; ++i) l.push_back(value(depth + 1));
                return Value(std::move(l));
            }
            default: {
                ValueMap m;
                std::set<std::string> keys;
                for (std::size_t i = 0, n = pick(4); i < n; ++i) {
                    std::string k = text();
                    if (keys.insert(k).second) m.push_back({k, value(depth + 1)});
                }
                return Value(std::move(m));
            }
        }
    }

    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

private:
    std::string ident() {
        static const std::string first = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
        static const std::string rest = first + "0123456789";
        std::string s(1, first[pick(first.size())]);
        for (std::size_t i = 0, n = pick(10); i < n; ++i) s.push_back(rest[pick(rest.size())]);
        return s;
    }

    std::string name(bool dotted) { return dotted ? ident() + "." + ident() : ident(); }

    std::string text() {
        static const std::vector<std::string> atoms = {"a", "Z", " ", "\"", "'", "\\", "\n", "\t", "(", ")", "[", "]",
                                                       "{", "}", ",", "=", ":", "0", "x**2", "é", "东京", "😀", "\x01"};
        std::string s;
        for (std::size_t i = 0, n = pick(8); i < n; ++i) s += atoms[pick(atoms.size())];
        return s;
    }

    double real() {
        switch (pick(4)) {
            case 0: return static_cast<double>(static_cast<std::int64_t>(pick(2000)) - 1000) / 8.0;
            case 1: return std::ldexp(static_cast<double>(rng_() >> 11), -static_cast<int>(pick(80)));
            case 2: return -std::ldexp(static_cast<double>(rng_() >> 11), static_cast<int>(pick(40)));
            default: return static_cast<double>(pick(100));
        }
    }

    std::mt19937_64 rng_;
};

// A second, deliberately different spelling of the same structure: single
// quotes where possible, Python booleans, %.17g floats, irregular spacing.
inline std::string alt_string(const std::string& s) {
    bool single = s.find('\'') == std::string::npos;
    char q = single ? '\'' : '"';
    std::string out(1, q);
    for (unsigned char c : s) {
        if (c == static_cast<unsigned char>(q) || c == '\\') {
            out.push_back('\\');
            out.push_back(static_cast<char>(c));
        } else if (c == '\n') {
            out += "\\n";
        } else if (c == '\t') {
            out += "\\t";
        } else if (c < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
        } else {
            out.push_back(static_cast<char>(c));
        }
    }
    out.push_back(q);
    return out;
}

inline std::string alt_value(const Value& v) {
    if (v.is_string()) return alt_string(v.as_string());
    if (v.is_int()) return std::to_string(v.as_int());
    if (v.is_bool()) return v.as_bool() ? "True" : "False";
    if (v.is_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v.as_float());
        std::string s = buf;
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        return s;
    }
    std::string out;
    if (v.is_list()) {
        out = "[ ";
        for (const auto& x : v.as_list()) out += alt_value(x) + " ,";
        out += "]";
        if (!v.as_list().empty()) out.erase(out.size() - 2, 1);
        return out;
    }
    out = "{";
    const auto& m = v.as_map();
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) out += ",";
        out += alt_string(m[i].key) + " :" + alt_value(m[i].value);
    }
    return out + "}";
}

inline std::string alt_render(const std::vector<FunctionCall>& calls) {
    std::string out = "[ ";
    for (std::size_t i = 0; i < calls.size(); ++i) {
        if (i) out += " , ";
        out += calls[i].api_name + "( ";
        for (std::size_t j = 0; j < calls[i].arguments.size(); ++j) {
            if (j) out += ",";
            out += calls[i].arguments[j].key + " = " + alt_value(calls[i].arguments[j].value);
        }
        out += ")";
    }
    return out + " ]";
}

// Share of letters per coarse script class, by Unicode block ranges.
inline std::map<std::string, double> script_shares(const std::u32string& text) {
    std::map<std::string, std::size_t> counts;
    std::size_t letters = 0;
    for (char32_t c : text) {
        std::string cls;
        if ((c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z') || (c >= 0xC0 && c <= 0x24F)) cls = "latin";
        else if (c >= 0x4E00 && c <= 0x9FFF) cls = "han";
        else if (c >= 0x0400 && c <= 0x04FF) cls = "cyrillic";
        else continue;
        ++counts[cls];
        ++letters;
    }
    std::map<std::string, double> out;
    for (const auto& [k, n] : counts) out[k] = static_cast<double>(n) / static_cast<double>(letters);
    return out;
}

// Largest share of any word 3-gram among a text's 3-gram positions.
inline double top_trigram_share(const std::string& text, std::size_t* top_count = nullptr) {
    std::istringstream in(text);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    if (words.size() < 3) return 0.0;
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i + 2 < words.size(); ++i) ++counts[words[i] + " " + words[i + 1] + " " + words[i + 2]];
    std::size_t best = 0;
    for (const auto& [k, n] : counts) best = std::max(best, n);
    if (top_count) *top_count = best;
    return static_cast<double>(best) / static_cast<double>(words.size() - 2);
}

// Checks the structural requirement of each dialog type from the raw JSON
// record, without the library's own classifier.
inline bool record_has_type(const Json& rec) {
    const std::string type = rec.at("dialog_type");
    std::vector<std::size_t> call_counts;
    std::vector<Json> results;
    bool dependency = false;
    for (const auto& t : rec.at("turns")) {
        if (t.at("role") == "tool") {
            std::vector<Json> stack{t.at("payload").value("results", Json())};
            while (!stack.empty()) {
                Json x = stack.back();
                stack.pop_back();
                if (x.is_structured()) {
                    for (const auto& y : x) stack.push_back(y);
                } else if (!x.is_null()) {
                    results.push_back(x);
                }
            }
        }
        if (t.at("role") == "assistant" && t.contains("calls")) {
            call_counts.push_back(t.at("calls").size());
            for (const auto& c : t.at("calls")) {
                for (const auto& [k, a] : c.at("arguments").items()) {
                    for (const auto& r : results) {
                        if (a == r) dependency = true;
                    }
                }
            }
        }
    }
    if (type == "non_tool_use") return call_counts.empty();
    if (type == "single") return !call_counts.empty() && std::all_of(call_counts.begin(), call_counts.end(), [](auto n) { return n == 1; });
    if (type == "parallel") return std::any_of(call_counts.begin(), call_counts.end(), [](auto n) { return n >= 2; });
    if (type == "dependent") return call_counts.size() >= 2 && dependency;
    return false;
}

// Change classes between two API JSON records, from the JSON trees alone.
inline void flatten_params(const Json& node, const std::string& path, std::map<std::string, Json>& out) {
    if (!node.is_object()) return;
    if (!path.empty()) out[path] = node;
    if (node.contains("properties")) {
        for (const auto& [k, v] : node["properties"].items()) flatten_params(v, path.empty() ? k : path + "." + k, out);
    }
    if (node.contains("items")) flatten_params(node["items"], path + "[]", out);
}

inline std::set<std::string> lower_words(const std::string& text) {
    std::set<std::string> out;
    std::string w;
    for (char c : text + " ") {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!w.empty()) {
            out.insert(w);
            w.clear();
        }
    }
    return out;
}

inline std::set<std::string> diff_classes(const Json& before, const Json& after) {
    std::set<std::string> out;
    std::map<std::string, Json> a, b;
    flatten_params(before.value("parameters", Json::object()), "", a);
    flatten_params(after.value("parameters", Json::object()), "", b);
    auto constraint = [](const Json& n) {
        Json c = Json::object();
        for (const char* k : {"pattern", "enum", "minimum", "maximum"}) {
            if (n.contains(k)) c[k] = n[k];
        }
        return c;
    };
    for (const auto& [path, node] : b) {
        auto it = a.find(path);
        if (it == a.end()) {
            out.insert("add_parameter");
            if (!constraint(node).empty()) out.insert("add_constraint");
            continue;
        }
        if (it->second.value("type", "") != node.value("type", "")) out.insert("mutate_parameter_type");
        if (!constraint(node).empty() && constraint(node) != constraint(it->second)) out.insert("add_constraint");
    }
    auto required = [](const Json& params, std::map<std::string, std::set<std::string>>& acc) {
        std::vector<std::pair<std::string, Json>> stack{{"", params}};
        while (!stack.empty()) {
            auto [path, n] = stack.back();
            stack.pop_back();
            if (!n.is_object()) continue;
            for (const auto& r : n.value("required", Json::array())) acc[path].insert(r.get<std::string>());
            if (n.contains("properties")) {
                for (const auto& [k, v] : n["properties"].items()) stack.push_back({path + "." + k, v});
            }
        }
    };
    std::map<std::string, std::set<std::string>> ra, rb;
    required(before.value("parameters", Json::object()), ra);
    required(after.value("parameters", Json::object()), rb);
    for (const auto& [path, names] : rb) {
        for (const auto& n : names) {
            if (!ra[path].count(n) && a.count(path.empty() ? n : path.substr(1) + "." + n)) out.insert("add_constraint");
        }
    }
    if (before.value("returns", Json()) != after.value("returns", Json())) out.insert("update_returns");
    auto wa = lower_words(before.value("description", "")), wb = lower_words(after.value("description", ""));
    for (const auto& w : wb) {
        if (!wa.count(w)) {
            out.insert("add_functionality");
            break;
        }
    }
    return out;
}

// Prompt/target split for loss scoring, built from a stored sample record.
inline std::pair<std::string, std::string> scoring_split(const Json& rec) {
    const auto& turns = rec.at("turns");
    std::size_t last = turns.size();
    for (std::size_t i = turns.size(); i-- > 0;) {
        if (turns[i].at("role") == "assistant") {
            last = i;
            break;
        }
    }
    auto line = [](const Json& t) -> std::string {
        const std::string role = t.at("role");
        if (role == "user") return "User: " + t.at("content").get<std::string>();
        if (role == "tool") return "Tool: " + t.at("payload").dump();
        return "Assistant: " + (t.contains("call_string") ? t.at("call_string").get<std::string>()
                                                          : t.at("content").get<std::string>());
    };
    std::string prompt = "System: " + rec.at("system_prompt").get<std::string>() + "\nTools: " + rec.at("tools").dump() + "\n";
    for (std::size_t i = 0; i < last; ++i) prompt += line(turns[i]) + "\n";
    prompt += "Assistant: ";
    std::string target = line(turns[last]).substr(11);
    return {prompt, target};
}

}  // namespace oracle
