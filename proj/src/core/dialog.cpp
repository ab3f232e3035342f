#include "toolforge/dialog.hpp"

#include <functional>

namespace toolforge {

std::string_view role_name(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
        case Role::Tool: return "tool";
    }
    return "user";
}

Role role_from_name(std::string_view name) {
    if (name == "system") return Role::System;
    if (name == "user") return Role::User;
    if (name == "assistant") return Role::Assistant;
    if (name == "tool") return Role::Tool;
    throw ContractError("unknown role: " + std::string(name));
}

std::string_view dialog_type_name(DialogType type) {
    switch (type) {
        case DialogType::Single: return "single";
        case DialogType::Parallel: return "parallel";
        case DialogType::Dependent: return "dependent";
        case DialogType::NonToolUse: return "non_tool_use";
    }
    return "single";
}

DialogType dialog_type_from_name(std::string_view name) {
    if (name == "single") return DialogType::Single;
    if (name == "parallel") return DialogType::Parallel;
    if (name == "dependent") return DialogType::Dependent;
    if (name == "non_tool_use") return DialogType::NonToolUse;
    throw ContractError("unknown dialog type: " + std::string(name));
}

DialogTurn DialogTurn::system(std::string text) {
    DialogTurn t;
    t.role = Role::System;
    t.content = std::move(text);
    return t;
}

DialogTurn DialogTurn::user(std::string text) {
    DialogTurn t;
    t.role = Role::User;
    t.content = std::move(text);
    return t;
}

DialogTurn DialogTurn::assistant(std::string text) {
    DialogTurn t;
    t.role = Role::Assistant;
    t.content = std::move(text);
    return t;
}

DialogTurn DialogTurn::assistant_calls(std::vector<FunctionCall> calls) {
    DialogTurn t;
    t.role = Role::Assistant;
    t.calls = std::move(calls);
    return t;
}

DialogTurn DialogTurn::tool(std::string api_name, Json results) {
    DialogTurn t;
    t.role = Role::Tool;
    Json payload = Json::object();
    payload["name"] = std::move(api_name);
    payload["results"] = std::move(results);
    t.tool_payload = std::move(payload);
    return t;
}

std::string DialogTurn::tool_api_name() const {
    if (!tool_payload || !tool_payload->is_object()) return {};
    auto it = tool_payload->find("name");
    if (it == tool_payload->end() || !it->is_string()) return {};
    return it->get<std::string>();
}

const ApiDefinition* DataSample::tool(std::string_view name) const {
    for (const auto& t : tool_list) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::size_t DataSample::final_assistant_index() const {
    for (std::size_t i = turns.size(); i-- > 0;) {
        if (turns[i].role == Role::Assistant) return i;
    }
    return std::string::npos;
}

namespace {

void collect_scalars(const Json& j, std::vector<Json>& out) {
    if (j.is_object() || j.is_array()) {
        for (const auto& v : j) collect_scalars(v, out);
    } else if (!j.is_null() && !j.is_boolean()) {
        out.push_back(j);
    }
}

bool scalar_matches(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) return a.get<double>() == b.get<double>();
    return a == b;
}

}  // namespace

bool satisfies_dialog_type(const DataSample& sample) {
    std::size_t calling_turns = 0;
    bool any_multi = false;
    bool all_single = true;
    for (const auto& t : sample.turns) {
        if (t.role != Role::Assistant || !t.has_calls()) continue;
        ++calling_turns;
        if (t.calls.size() >= 2) any_multi = true;
        if (t.calls.size() != 1) all_single = false;
    }
    switch (sample.dialog_type) {
        case DialogType::NonToolUse:
            return calling_turns == 0;
        case DialogType::Single:
            return calling_turns >= 1 && all_single;
        case DialogType::Parallel:
            return any_multi;
        case DialogType::Dependent: {
            if (calling_turns < 2) return false;
            std::vector<Json> seen;
            for (const auto& t : sample.turns) {
                if (t.role == Role::Tool && t.tool_payload) {
                    auto it = t.tool_payload->find("results");
                    collect_scalars(it != t.tool_payload->end() ? *it : *t.tool_payload, seen);
                } else if (t.role == Role::Assistant && t.has_calls() && !seen.empty()) {
                    for (const auto& call : t.calls) {
                        for (const auto& arg : call.arguments) {
                            std::vector<Json> leaves;
                            collect_scalars(to_json(arg.value), leaves);
                            for (const auto& leaf : leaves) {
                                for (const auto& s : seen) {
                                    if (scalar_matches(leaf, s)) return true;
                                }
                            }
                        }
                    }
                }
            }
            return false;
        }
    }
    return false;
}

std::string render_turn(const DialogTurn& turn) {
    switch (turn.role) {
        case Role::System: return "System: " + turn.content;
        case Role::User: return "User: " + turn.content;
        case Role::Assistant:
            return "Assistant: " + (turn.has_calls() ? render_call_string(turn.calls) : turn.content);
        case Role::Tool:
            return "Tool: " + (turn.tool_payload ? turn.tool_payload->dump() : std::string("{}"));
    }
    return {};
}

std::string render_transcript(const std::vector<DialogTurn>& turns, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end && i < turns.size(); ++i) {
        if (!out.empty()) out.push_back('\n');
        out += render_turn(turns[i]);
    }
    return out;
}

}  // namespace toolforge
