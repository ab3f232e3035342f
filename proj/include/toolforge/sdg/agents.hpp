#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toolforge/dialog.hpp"
#include "toolforge/llm/backend.hpp"
#include "toolforge/sdg/complexity.hpp"

namespace toolforge::sdg {

enum class AgentRole { User, Assistant, Tool };
std::string_view agent_role_name(AgentRole role);

/// Prompt template of one role agent. Slots are written {{name}}; the
/// documented names are tools, history, guidance, dialog_type and call.
struct AgentScript {
    AgentRole role = AgentRole::User;
    std::string prompt_template;

    std::vector<std::string> slots() const;
    /// Throws ContractError when a referenced slot has no value.
    std::string render(const std::map<std::string, std::string>& values) const;

    static AgentScript builtin(AgentRole role);
};

struct AgentScripts {
    AgentScript user = AgentScript::builtin(AgentRole::User);
    AgentScript assistant = AgentScript::builtin(AgentRole::Assistant);
    AgentScript tool = AgentScript::builtin(AgentRole::Tool);

    /// Reads {user,assistant,tool}.tmpl from `dir`; missing files keep the built-in text.
    static AgentScripts load(const std::filesystem::path& dir);
};

struct AssistantAction {
    enum class Kind { Call, AskInfo, Summarize, Answer };
    Kind kind = Kind::Answer;
    std::vector<FunctionCall> calls;  // Kind::Call only
    std::string text;                 // other kinds
    std::optional<std::string> thought;

    /// Voting class: kind plus the sorted set of called API names.
    std::string decision_class() const;
};

std::string_view action_kind_name(AssistantAction::Kind kind);

/// Reads {"thought", "action", "content"} from a reply (a call's content is a
/// call-string). A bare reply that parses as a call list is a call. Returns
/// nullopt for anything else.
std::optional<AssistantAction> parse_assistant_reply(const std::string& reply);

struct StepContext {
    std::vector<ApiDefinition> tools;
    std::vector<DialogTurn> history;  // including the system turn
    DialogType dialog_type = DialogType::Single;
    std::uint64_t seed = 0;
    const AgentScripts* scripts = nullptr;
};

struct VoteOutcome {
    AssistantAction action;
    std::size_t rounds = 1;  // 2 when a re-vote was needed
};

/// Samples the assistant `votes` times and adopts the first instance of the
/// strict-majority decision class. Without a majority one full re-vote is
/// held, then ConsistencyFailure. Unparsable replies never form a majority.
VoteOutcome assistant_step(const StepContext& ctx, llm::LlmBackend& backend, std::size_t votes = 3);

/// Tool agent: a structured result for `call`. Non-JSON replies are wrapped as {"result": text}.
Json tool_step(const StepContext& ctx, const FunctionCall& call, llm::LlmBackend& backend);

struct DialogLimits {
    std::size_t min_turns = 1;  // user turns
    std::size_t max_turns = 2;
    std::size_t max_rounds = 2;  // complication rounds
    std::size_t votes = 3;
    std::size_t max_steps = 6;  // assistant actions per user turn
    int type_retries = 1;
};

struct DialogRequest {
    std::string sample_id;
    std::string system_prompt;
    std::vector<ApiDefinition> tools;
    DialogType dialog_type = DialogType::Single;
    std::uint64_t seed = 0;
    const AgentScripts* scripts = nullptr;  // built-in when null
};

/// Role-plays one dialog. With a scorer and a range, the opening query is
/// regenerated with complicate/simplify guidance for up to max_rounds. The
/// result satisfies its dialog type or TypeUnsatisfied is thrown.
DataSample generate_dialog(const DialogRequest& request, llm::LlmBackend& backend, llm::LlmBackend* scorer,
                           const std::optional<ComplexityRange>& range, const DialogLimits& limits);

/// System prompt used for generated dialogs; asks for bracketed call lists.
std::string default_system_prompt();

}  // namespace toolforge::sdg
