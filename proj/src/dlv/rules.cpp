#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>

#include "toolforge/dlv/dlv.hpp"
#include "toolforge/serialize.hpp"
#include "toolforge/util.hpp"

namespace toolforge::dlv {

std::string_view aspect_name(Aspect a) {
    switch (a) {
        case Aspect::ApiClarity: return "api_clarity";
        case Aspect::Executability: return "executability";
        case Aspect::DialogCorrectness: return "dialog_correctness";
        case Aspect::Consistency: return "consistency";
    }
    return "";
}

const std::vector<RuleInfo>& rule_catalog() {
    static const std::vector<RuleInfo> catalog = {
        {"schema_invalid", Aspect::ApiClarity, "API definition breaks the schema format"},
        {"missing_description", Aspect::ApiClarity, "API has no description"},
        {"dangling_required", Aspect::ApiClarity, "required name without a matching property"},
        {"unknown_api", Aspect::Executability, "called API is not in the tool list"},
        {"missing_required", Aspect::Executability, "required parameter absent from a call"},
        {"unknown_param", Aspect::Executability, "argument not declared by the API"},
        {"type_mismatch", Aspect::Executability, "argument value has the wrong type"},
        {"pattern_mismatch", Aspect::Executability, "string argument fails its pattern"},
        {"enum_violation", Aspect::Executability, "argument outside the allowed values"},
        {"missing_field", Aspect::DialogCorrectness, "record or turn lacks a required field"},
        {"response_too_long", Aspect::DialogCorrectness, "assistant reply exceeds the length limit"},
        {"invalid_characters", Aspect::DialogCorrectness, "control, replacement or zero-width characters"},
        {"mixed_language", Aspect::DialogCorrectness, "assistant reply mixes writing systems"},
        {"incomplete_response", Aspect::DialogCorrectness, "assistant reply stops mid-sentence"},
        {"dialog_type_mismatch", Aspect::DialogCorrectness, "turns do not have the declared dialog type's structure"},
        {"call_response_name_mismatch", Aspect::Consistency, "tool response names a different API than the call"},
        {"system_format_conflict", Aspect::Consistency, "assistant ignores the call format the system prompt mandates"},
        {"role_order", Aspect::Consistency, "turn roles out of order"},
        {"orphan_tool_response", Aspect::Consistency, "tool response without a preceding call"},
    };
    return catalog;
}

const RuleInfo* find_rule(std::string_view rule_id) {
    for (const auto& r : rule_catalog()) {
        if (r.rule_id == rule_id) return &r;
    }
    return nullptr;
}

namespace {

RuleViolation make(std::string_view rule_id, std::string message, std::string location, std::size_t turn) {
    const RuleInfo* info = find_rule(rule_id);
    return {std::string(rule_id), info ? info->aspect : Aspect::Consistency, std::move(message), std::move(location), turn};
}

std::string turn_loc(std::size_t i) { return "turns[" + std::to_string(i) + "]"; }

bool numbers_equal(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) return a.get<double>() == b.get<double>();
    return a == b;
}

bool kind_accepts(ParamKind kind, const Value& v) {
    switch (kind) {
        case ParamKind::String: return v.is_string();
        case ParamKind::Integer: return v.is_int();
        case ParamKind::Float: return v.is_float() || v.is_int();
        case ParamKind::Boolean: return v.is_bool();
        case ParamKind::Array: return v.is_list();
        case ParamKind::Dict: return v.is_map();
        case ParamKind::Unknown: return true;
    }
    return true;
}

std::string describe(const Value& v) {
    if (v.is_string()) return "string";
    if (v.is_int()) return "integer";
    if (v.is_float()) return "float";
    if (v.is_bool()) return "boolean";
    if (v.is_list()) return "array";
    return "dict";
}

void check_args(const ValueMap& args, const ParamSchema& schema, const std::string& loc, std::size_t turn,
                const std::string& api, std::vector<RuleViolation>& out);

void check_value(const Value& v, const ParamSchema& s, const std::string& loc, std::size_t turn, const std::string& api,
                 std::vector<RuleViolation>& out) {
    if (!kind_accepts(s.kind, v)) {
        out.push_back(make("type_mismatch",
                           api + ": " + loc + " expects " + std::string(kind_name(s.kind)) + ", got " + describe(v), loc, turn));
        return;
    }
    if (s.pattern && v.is_string()) {
        try {
            if (!std::regex_search(v.as_string(), std::regex(*s.pattern, std::regex::ECMAScript))) {
                out.push_back(make("pattern_mismatch", api + ": " + loc + " does not match " + *s.pattern, loc, turn));
            }
        } catch (const std::regex_error&) {
        }
    }
    if (s.enum_values && s.enum_values->is_array() && !s.enum_values->empty()) {
        Json j = to_json(v);
        bool hit = std::any_of(s.enum_values->begin(), s.enum_values->end(),
                               [&](const Json& e) { return numbers_equal(e, j); });
        if (!hit) out.push_back(make("enum_violation", api + ": " + loc + " = " + j.dump() + " is not an allowed value", loc, turn));
    }
    if (v.is_list() && s.items) {
        const auto& items = v.as_list();
        for (std::size_t i = 0; i < items.size(); ++i) check_value(items[i], *s.items, loc + "[" + std::to_string(i) + "]", turn, api, out);
    }
    if (v.is_map() && s.kind == ParamKind::Dict) check_args(v.as_map(), s, loc, turn, api, out);
}

void check_args(const ValueMap& args, const ParamSchema& schema, const std::string& loc, std::size_t turn,
                const std::string& api, std::vector<RuleViolation>& out) {
    for (const auto& r : schema.required) {
        bool present = std::any_of(args.begin(), args.end(), [&](const ValueEntry& e) { return e.key == r; });
        if (!present) out.push_back(make("missing_required", api + " is missing required parameter " + r, loc + "." + r, turn));
    }
    for (const auto& a : args) {
        const ParamSchema* p = schema.property(a.key);
        if (p == nullptr) {
            out.push_back(make("unknown_param", api + " has no parameter " + a.key, loc + "." + a.key, turn));
            continue;
        }
        check_value(a.value, *p, loc + "." + a.key, turn, api, out);
    }
}

bool is_bad_char(char32_t cp) {
    if (cp == '\t' || cp == '\n' || cp == '\r') return false;
    if (cp < 0x20 || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F)) return true;
    if (cp == 0xFFFD || cp == 0xFEFF || cp == 0x2060) return true;
    return cp >= 0x200B && cp <= 0x200D;
}

bool has_invalid_characters(std::string_view text) {
    bool valid = true;
    auto cps = decode_utf8(text, &valid);
    if (!valid) return true;
    return std::any_of(cps.begin(), cps.end(), is_bad_char);
}

bool is_mixed_language(std::string_view text, const RuleLimits& limits) {
    std::map<Script, std::size_t> counts;
    std::size_t letters = 0;
    for (char32_t cp : decode_utf8(text)) {
        bool letter = false;
        Script s = script_of(cp, &letter);
        if (!letter || s == Script::Other) continue;
        ++counts[s];
        ++letters;
    }
    if (letters < limits.min_letters_for_script) return false;
    std::size_t major = 0;
    for (const auto& [_, n] : counts) {
        if (static_cast<double>(n) >= limits.script_share * static_cast<double>(letters)) ++major;
    }
    return major >= 2;
}

bool ends_complete(std::string_view text) {
    auto cps = decode_utf8(trim(text));
    if (cps.empty()) return false;
    static const std::u32string terminal = U".!?)]}\"'。！？…”’」";
    return terminal.find(cps.back()) != std::u32string::npos;
}

bool mandates_bracket_format(const std::string& system_prompt) {
    static const std::regex re(R"(\[[A-Za-z_][A-Za-z0-9_.]*\()");
    return std::regex_search(system_prompt, re);
}

bool looks_like_call(const std::string& text) {
    auto t = trim(text);
    if (!t.empty() && t.front() == '[') return true;
    static const std::regex bare(R"(^[A-Za-z_][A-Za-z0-9_.]*\(.*\)$)");
    return std::regex_match(t, bare);
}

}  // namespace

std::vector<RuleViolation> check_api_clarity(const ApiDefinition& api, const std::string& location) {
    std::vector<RuleViolation> out;
    for (const auto& d : schema_defects(api)) {
        std::string loc = location + "." + d.path;
        if (d.kind == "missing" && d.detail == "description" && d.path == "description") {
            out.push_back(make("missing_description", api.name + " has no description", loc, 0));
        } else if (d.kind == "dangling_required") {
            out.push_back(make("dangling_required", api.name + " requires undeclared parameter " + d.detail, loc, 0));
        } else {
            out.push_back(make("schema_invalid", api.name + ": " + d.kind + " " + d.detail, loc, 0));
        }
    }
    if (!api.description.empty() && trim(api.description).empty()) {
        out.push_back(make("missing_description", api.name + " has a blank description", location + ".description", 0));
    }
    return out;
}

std::vector<RuleViolation> check_executability(const std::vector<FunctionCall>& calls,
                                               const std::vector<ApiDefinition>& tools, const std::string& location,
                                               std::size_t turn_index) {
    std::vector<RuleViolation> out;
    for (std::size_t i = 0; i < calls.size(); ++i) {
        const auto& call = calls[i];
        std::string loc = location + "[" + std::to_string(i) + "]";
        auto it = std::find_if(tools.begin(), tools.end(), [&](const ApiDefinition& t) { return t.name == call.api_name; });
        if (it == tools.end()) {
            out.push_back(make("unknown_api", call.api_name + " is not in the tool list", loc, turn_index));
            continue;
        }
        check_args(call.arguments, it->parameters, loc, turn_index, call.api_name, out);
    }
    return out;
}

std::vector<RuleViolation> check_record_fields(const Json& record) {
    std::vector<RuleViolation> out;
    if (!record.is_object()) {
        out.push_back(make("missing_field", "record is not an object", "record", 0));
        return out;
    }
    for (const char* key : {"sample_id", "system_prompt", "tools", "turns", "dialog_type"}) {
        if (!record.contains(key) || record[key].is_null()) {
            out.push_back(make("missing_field", std::string("record lacks ") + key, key, 0));
        }
    }
    return out;
}

std::vector<RuleViolation> run_rule_layer(const Json& record, const RuleLimits& limits) {
    auto out = check_record_fields(record);
    if (!out.empty()) return out;
    DataSample sample;
    try {
        sample = sample_from_json(record);
    } catch (const Error& e) {
        out.push_back(make("missing_field", std::string("unreadable record: ") + e.what(), "record", 0));
        return out;
    }
    return run_rule_layer(sample, limits);
}

std::vector<RuleViolation> check_dialog_correctness(const DataSample& s, const RuleLimits& limits) {
    std::vector<RuleViolation> out;
    if (trim(s.sample_id).empty()) out.push_back(make("missing_field", "sample has no id", "sample_id", 0));
    if (trim(s.system_prompt).empty()) out.push_back(make("missing_field", "sample has no system prompt", "system_prompt", 0));
    for (std::size_t i = 0; i < s.turns.size(); ++i) {
        const auto& t = s.turns[i];
        std::string loc = turn_loc(i);
        switch (t.role) {
            case Role::System:
                if (i > 0 && trim(t.content).empty()) out.push_back(make("missing_field", "empty system turn", loc + ".content", i));
                break;
            case Role::User:
                if (trim(t.content).empty()) out.push_back(make("missing_field", "empty user turn", loc + ".content", i));
                break;
            case Role::Assistant:
                if (!t.has_calls() && trim(t.content).empty()) {
                    out.push_back(make("missing_field", "assistant turn has neither text nor calls", loc + ".content", i));
                }
                break;
            case Role::Tool: {
                const auto& p = t.tool_payload;
                if (!p || !p->is_object() || !p->contains("name") || !p->contains("results")) {
                    out.push_back(make("missing_field", "tool turn lacks a {name, results} payload", loc + ".payload", i));
                }
                break;
            }
        }
        if (t.role != Role::Tool && has_invalid_characters(t.content)) {
            out.push_back(make("invalid_characters", "turn contains disallowed characters", loc + ".content", i));
        }
        if (t.role == Role::Assistant && !t.has_calls() && !trim(t.content).empty()) {
            auto n = decode_utf8(t.content).size();
            if (n > limits.max_chars) {
                out.push_back(make("response_too_long",
                                   "assistant reply has " + std::to_string(n) + " characters, limit " + std::to_string(limits.max_chars),
                                   loc + ".content", i));
            }
            if (is_mixed_language(t.content, limits)) {
                out.push_back(make("mixed_language", "assistant reply mixes scripts", loc + ".content", i));
            }
            if (!ends_complete(t.content)) {
                out.push_back(make("incomplete_response", "assistant reply ends without terminal punctuation", loc + ".content", i));
            }
        }
    }
    if (!satisfies_dialog_type(s)) {
        out.push_back(make("dialog_type_mismatch",
                           "turns do not form a " + std::string(dialog_type_name(s.dialog_type)) + " dialog", "dialog_type",
                           s.turns.size()));
    }
    return out;
}

std::vector<RuleViolation> check_sample_consistency(const DataSample& s) {
    std::vector<RuleViolation> out;
    if (s.turns.empty()) {
        out.push_back(make("role_order", "dialog has no turns", "turns", 0));
        return out;
    }
    if (s.turns[0].role != Role::System) out.push_back(make("role_order", "first turn must be the system turn", turn_loc(0), 0));

    enum class State { System, User, AssistantText, AssistantCall, Tool };
    State state = State::System;
    const DialogTurn* call_turn = nullptr;
    std::size_t answered = 0;
    for (std::size_t i = 1; i < s.turns.size(); ++i) {
        const auto& t = s.turns[i];
        std::string loc = turn_loc(i);
        if (t.role == Role::Tool) {
            if (state == State::AssistantCall || state == State::Tool) {
                if (answered >= call_turn->calls.size()) {
                    out.push_back(make("orphan_tool_response", "more tool responses than calls", loc, i));
                } else if (t.tool_api_name() != call_turn->calls[answered].api_name) {
                    out.push_back(make("call_response_name_mismatch",
                                       "response from " + t.tool_api_name() + " answers a call to " +
                                           call_turn->calls[answered].api_name,
                                       loc + ".payload.name", i));
                }
                ++answered;
                state = State::Tool;
            } else {
                out.push_back(make("orphan_tool_response", "tool response without a preceding call", loc, i));
            }
            continue;
        }
        State next = t.role == Role::User        ? State::User
                     : t.role == Role::Assistant ? (t.has_calls() ? State::AssistantCall : State::AssistantText)
                                                 : State::System;
        bool ok = false;
        switch (state) {
            case State::System: ok = next == State::User; break;
            case State::User: ok = next == State::AssistantText || next == State::AssistantCall; break;
            case State::AssistantText: ok = next == State::User; break;
            case State::AssistantCall: ok = false; break;
            case State::Tool:
                ok = (next == State::AssistantText || next == State::AssistantCall) && answered >= call_turn->calls.size();
                break;
        }
        if (!ok) {
            out.push_back(make("role_order",
                               std::string(role_name(t.role)) + " turn cannot follow the previous turn", loc, i));
        }
        if (next == State::AssistantCall) {
            call_turn = &t;
            answered = 0;
        }
        state = next;
    }
    if (state != State::AssistantText && s.turns.size() > 1) {
        out.push_back(make("role_order", "dialog does not end with an assistant reply", turn_loc(s.turns.size() - 1),
                           s.turns.size() - 1));
    } else if (s.turns.size() == 1) {
        out.push_back(make("role_order", "dialog has no user turn", turn_loc(0), 0));
    }

    if (mandates_bracket_format(s.system_prompt)) {
        for (std::size_t i = 1; i < s.turns.size(); ++i) {
            const auto& t = s.turns[i];
            if (t.role != Role::Assistant || t.has_calls() || !looks_like_call(t.content)) continue;
            bool parses = false;
            try {
                parse_call_string(trim(t.content));
                parses = trim(t.content).front() == '[';
            } catch (const SyntaxError&) {
            }
            if (!parses) {
                out.push_back(make("system_format_conflict",
                                   "assistant call text does not follow the bracketed call format", turn_loc(i) + ".content", i));
            }
        }
    }
    return out;
}

std::vector<RuleViolation> run_rule_layer(const DataSample& s, const RuleLimits& limits) {
    std::vector<RuleViolation> out;
    for (std::size_t i = 0; i < s.tool_list.size(); ++i) {
        auto v = check_api_clarity(s.tool_list[i], "tools[" + std::to_string(i) + "]");
        out.insert(out.end(), v.begin(), v.end());
    }
    for (std::size_t i = 0; i < s.turns.size(); ++i) {
        if (s.turns[i].role != Role::Assistant || !s.turns[i].has_calls()) continue;
        auto v = check_executability(s.turns[i].calls, s.tool_list, turn_loc(i) + ".calls", i);
        out.insert(out.end(), v.begin(), v.end());
    }
    auto d = check_dialog_correctness(s, limits);
    out.insert(out.end(), d.begin(), d.end());
    auto c = check_sample_consistency(s);
    out.insert(out.end(), c.begin(), c.end());
    std::stable_sort(out.begin(), out.end(), [](const RuleViolation& a, const RuleViolation& b) {
        if (a.turn_index != b.turn_index) return a.turn_index < b.turn_index;
        return a.rule_id < b.rule_id;
    });
    return out;
}

}  // namespace toolforge::dlv
