#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toolforge/api.hpp"
#include "toolforge/call_string.hpp"

namespace toolforge {

enum class Role { System, User, Assistant, Tool };
enum class DialogType { Single, Parallel, Dependent, NonToolUse };

std::string_view role_name(Role role);
Role role_from_name(std::string_view name);  // throws ContractError
std::string_view dialog_type_name(DialogType type);
DialogType dialog_type_from_name(std::string_view name);  // throws ContractError
inline constexpr DialogType kAllDialogTypes[] = {DialogType::Single, DialogType::Parallel, DialogType::Dependent,
                                                 DialogType::NonToolUse};

struct DialogTurn {
    Role role = Role::User;
    std::string content;                // system/user/assistant text
    std::vector<FunctionCall> calls;    // assistant only
    std::optional<Json> tool_payload;   // tool only: {"name": api, "results": ...}
    std::optional<std::string> thought; // assistant only, optional

    bool has_calls() const { return !calls.empty(); }
    bool operator==(const DialogTurn&) const = default;

    static DialogTurn system(std::string text);
    static DialogTurn user(std::string text);
    static DialogTurn assistant(std::string text);
    static DialogTurn assistant_calls(std::vector<FunctionCall> calls);
    static DialogTurn tool(std::string api_name, Json results);

    /// API name a tool turn answers for ("" if absent).
    std::string tool_api_name() const;
};

/// Mean negative log-probability per target token (nats/token).
struct ComplexityScore {
    double loss = 0.0;
    std::size_t token_count = 0;

    bool operator==(const ComplexityScore&) const = default;
};

struct DataSample {
    std::string sample_id;
    std::string system_prompt;
    std::vector<ApiDefinition> tool_list;
    std::vector<DialogTurn> turns;  // turns[0] is the system turn
    DialogType dialog_type = DialogType::Single;
    std::optional<ComplexityScore> complexity;
    Json provenance = Json::object();

    bool operator==(const DataSample&) const = default;

    const ApiDefinition* tool(std::string_view name) const;
    /// Index of the last assistant turn, or npos.
    std::size_t final_assistant_index() const;
};

/// Structural requirement of each dialog type:
///   single      - at least one call, every calling turn has exactly one call
///   parallel    - some assistant turn carries two or more calls
///   dependent   - two or more calling turns, and a later call reuses a value
///                 from an earlier tool payload
///   non_tool_use- no assistant turn carries calls
bool satisfies_dialog_type(const DataSample& sample);

/// Plain-text transcript ("System: ...\nUser: ...") used for prompts and scoring.
std::string render_turn(const DialogTurn& turn);
std::string render_transcript(const std::vector<DialogTurn>& turns, std::size_t begin, std::size_t end);

}  // namespace toolforge
