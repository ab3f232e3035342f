#include "toolforge/sdg/agents.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "toolforge/llm/structured.hpp"
#include "toolforge/serialize.hpp"
#include "toolforge/util.hpp"

namespace toolforge::sdg {

namespace {

const char* kUserTemplate = R"(You play a user talking to an assistant that can call the tools below.
Tools:
{{tools}}
Kind of conversation to produce: {{dialog_type}}
Conversation so far:
{{history}}
Guidance: {{guidance}}
Write only the user's next message.
)";

const char* kAssistantTemplate = R"(You are an assistant that can call functions.
Available functions:
{{tools}}
Conversation so far:
{{history}}
Think first, then reply with a ```json block {"thought": "...", "action": "call" | "ask_info" | "summarize" | "answer", "content": "..."}.
For "call", content is a bracketed call list such as [api_name(arg1=value1, arg2=value2)].
Ask for missing required parameters instead of guessing them, and answer in text when no function fits.
)";

const char* kToolTemplate = R"(You simulate the API below. Return its result for the call as one JSON object that follows the API's returns schema.
API:
{{tools}}
Call:
{{call}}
)";

Json tools_json(const std::vector<ApiDefinition>& tools) {
    Json arr = Json::array();
    for (const auto& t : tools) {
        Json j = api_to_json(t);
        j.erase("domain_path");
        arr.push_back(std::move(j));
    }
    return arr;
}

Json history_json(const std::vector<DialogTurn>& turns) {
    Json arr = Json::array();
    for (const auto& t : turns) {
        if (t.role != Role::System) arr.push_back(turn_to_json(t));
    }
    return arr;
}

std::string history_text(const std::vector<DialogTurn>& turns) {
    std::size_t begin = !turns.empty() && turns[0].role == Role::System ? 1 : 0;
    auto text = render_transcript(turns, begin, turns.size());
    return text.empty() ? "(none)" : text;
}

const AgentScripts& scripts_or_default(const AgentScripts* s) {
    static const AgentScripts defaults;
    return s ? *s : defaults;
}

std::string guidance_text(Guidance g, const std::string& previous) {
    switch (g) {
        case Guidance::Complicate:
            return "Rewrite the previous request \"" + previous +
                   "\" so that it needs more of the tools or strays further from their descriptions.";
        case Guidance::Simplify:
            return "Rewrite the previous request \"" + previous + "\" so that it is simpler and closer to the tool descriptions.";
        case Guidance::Keep:
            break;
    }
    return "none";
}

}  // namespace

std::string_view agent_role_name(AgentRole role) {
    switch (role) {
        case AgentRole::User: return "user";
        case AgentRole::Assistant: return "assistant";
        case AgentRole::Tool: return "tool";
    }
    return "";
}

std::vector<std::string> AgentScript::slots() const {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = prompt_template.find("{{", pos)) != std::string::npos) {
        auto end = prompt_template.find("}}", pos + 2);
        if (end == std::string::npos) break;
        auto name = trim(std::string_view(prompt_template).substr(pos + 2, end - pos - 2));
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
        pos = end + 2;
    }
    return out;
}

std::string AgentScript::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        auto open = prompt_template.find("{{", pos);
        auto end = open == std::string::npos ? open : prompt_template.find("}}", open + 2);
        if (end == std::string::npos) {
            out.append(prompt_template, pos);
            break;
        }
        out.append(prompt_template, pos, open - pos);
        auto name = trim(std::string_view(prompt_template).substr(open + 2, end - open - 2));
        auto it = values.find(name);
        if (it == values.end()) {
            throw ContractError(std::string(agent_role_name(role)) + " template slot {{" + name + "}} has no value");
        }
        out += it->second;
        pos = end + 2;
    }
    return out;
}

AgentScript AgentScript::builtin(AgentRole role) {
    switch (role) {
        case AgentRole::User: return {role, kUserTemplate};
        case AgentRole::Assistant: return {role, kAssistantTemplate};
        case AgentRole::Tool: return {role, kToolTemplate};
    }
    return {role, ""};
}

AgentScripts AgentScripts::load(const std::filesystem::path& dir) {
    AgentScripts s;
    for (AgentScript* script : {&s.user, &s.assistant, &s.tool}) {
        auto path = dir / (std::string(agent_role_name(script->role)) + ".tmpl");
        std::ifstream in(path);
        if (!in) continue;
        std::stringstream ss;
        ss << in.rdbuf();
        script->prompt_template = ss.str();
    }
    return s;
}

std::string_view action_kind_name(AssistantAction::Kind kind) {
    switch (kind) {
        case AssistantAction::Kind::Call: return "call";
        case AssistantAction::Kind::AskInfo: return "ask_info";
        case AssistantAction::Kind::Summarize: return "summarize";
        case AssistantAction::Kind::Answer: return "answer";
    }
    return "";
}

std::string AssistantAction::decision_class() const {
    std::set<std::string> names;
    for (const auto& c : calls) names.insert(c.api_name);
    std::string out(action_kind_name(kind));
    for (const auto& n : names) out += "\x1f" + n;
    return out;
}

std::optional<AssistantAction> parse_assistant_reply(const std::string& reply) {
    AssistantAction a;
    auto t = trim(reply);
    if (!t.empty() && t.front() == '[') {
        try {
            a.calls = parse_call_string(t);
            if (a.calls.empty()) return std::nullopt;
            a.kind = AssistantAction::Kind::Call;
            return a;
        } catch (const SyntaxError&) {
        }
    }
    auto j = llm::extract_json_object(reply);
    if (!j) return std::nullopt;
    auto action = j->value("action", std::string{});
    if (!j->contains("content") || !(*j)["content"].is_string()) return std::nullopt;
    auto content = (*j)["content"].get<std::string>();
    if (auto th = j->find("thought"); th != j->end() && th->is_string() && !th->get<std::string>().empty()) {
        a.thought = th->get<std::string>();
    }
    if (action == "call") {
        try {
            a.calls = parse_call_string(content);
        } catch (const SyntaxError&) {
            return std::nullopt;
        }
        if (a.calls.empty()) return std::nullopt;
        a.kind = AssistantAction::Kind::Call;
    } else if (action == "ask_info" || action == "summarize" || action == "answer") {
        if (trim(content).empty()) return std::nullopt;
        a.kind = action == "ask_info" ? AssistantAction::Kind::AskInfo
                 : action == "summarize" ? AssistantAction::Kind::Summarize
                                         : AssistantAction::Kind::Answer;
        a.text = content;
    } else {
        return std::nullopt;
    }
    return a;
}

VoteOutcome assistant_step(const StepContext& ctx, llm::LlmBackend& backend, std::size_t votes) {
    if (votes == 0 || votes % 2 == 0) throw ContractError("votes must be odd and positive");
    const auto& scripts = scripts_or_default(ctx.scripts);
    std::string prompt = scripts.assistant.render({{"tools", tools_json(ctx.tools).dump(2)},
                                                   {"history", history_text(ctx.history)},
                                                   {"guidance", "none"},
                                                   {"dialog_type", std::string(dialog_type_name(ctx.dialog_type))}});
    Json tools = tools_json(ctx.tools);
    Json history = history_json(ctx.history);
    for (std::size_t round = 0; round < 2; ++round) {
        std::vector<std::optional<AssistantAction>> sampled;
        std::map<std::string, std::size_t> counts;
        for (std::size_t v = 0; v < votes; ++v) {
            std::size_t index = round * votes + v;
            llm::ChatRequest req;
            req.messages = {{"system", prompt}, {"user", "Give the assistant's next action."}};
            req.sampling.seed = mix_seed(ctx.seed, index);
            req.meta = {{"task", "sdg.assistant"}, {"tools", tools},       {"history", history},
                        {"vote_index", index},     {"seed", ctx.seed}};
            auto action = parse_assistant_reply(backend.chat(req));
            if (action) ++counts[action->decision_class()];
            sampled.push_back(std::move(action));
        }
        for (const auto& a : sampled) {
            if (a && counts[a->decision_class()] * 2 > votes) return {*a, round + 1};
        }
    }
    throw ConsistencyFailure("assistant votes reached no majority after a re-vote");
}

Json tool_step(const StepContext& ctx, const FunctionCall& call, llm::LlmBackend& backend) {
    const auto& scripts = scripts_or_default(ctx.scripts);
    const ApiDefinition* api = nullptr;
    for (const auto& t : ctx.tools) {
        if (t.name == call.api_name) api = &t;
    }
    Json api_json = Json();
    if (api) {
        api_json = api_to_json(*api);
        api_json.erase("domain_path");
    }
    std::string call_text = render_call_string({call});
    llm::ChatRequest req;
    req.messages = {{"system", scripts.tool.render({{"tools", api ? api_json.dump(2) : std::string("(unknown API)")},
                                                    {"call", call_text},
                                                    {"history", history_text(ctx.history)},
                                                    {"guidance", "none"},
                                                    {"dialog_type", std::string(dialog_type_name(ctx.dialog_type))}})},
                    {"user", call_text}};
    req.sampling.temperature = 0.0;
    req.sampling.seed = ctx.seed;
    req.meta = {{"task", "sdg.tool"},
                {"call", {{"name", call.api_name}, {"arguments", to_json(Value(call.arguments))}}},
                {"api", api_json}};
    auto reply = backend.chat(req);
    if (auto j = llm::extract_json_object(reply)) return *j;
    return Json{{"result", trim(reply)}};
}

std::string default_system_prompt() {
    return "You can call the functions listed in the tool list. When a call is needed, reply with nothing but a "
           "bracketed call list like [api_name(arg1=value1, arg2=value2)]. If a required parameter is missing, ask "
           "for it. If no function fits the request, say so in plain text.";
}

namespace {

struct Draft {
    DataSample sample;
    std::string opening_query;
};

Draft draft_dialog(const DialogRequest& request, llm::LlmBackend& backend, const DialogLimits& limits,
                   std::size_t target_turns, std::uint64_t seed, Guidance guidance, const std::string& previous) {
    const auto& scripts = scripts_or_default(request.scripts);
    Draft d;
    auto& s = d.sample;
    s.sample_id = request.sample_id;
    s.system_prompt = request.system_prompt;
    s.tool_list = request.tools;
    s.dialog_type = request.dialog_type;
    s.turns.push_back(DialogTurn::system(request.system_prompt));
    Json tools = tools_json(request.tools);
    const std::string type_name(dialog_type_name(request.dialog_type));
    std::size_t step = 0;
    for (std::size_t t = 0; t < target_turns; ++t) {
        Guidance g = t == 0 ? guidance : Guidance::Keep;
        llm::ChatRequest ureq;
        ureq.messages = {{"system", scripts.user.render({{"tools", tools.dump(2)},
                                                         {"history", history_text(s.turns)},
                                                         {"guidance", guidance_text(g, previous)},
                                                         {"dialog_type", type_name}})},
                         {"user", "Write the next user message."}};
        ureq.sampling.seed = mix_seed(seed, 1000 + t);
        ureq.meta = {{"task", "sdg.user"},
                     {"dialog_type", type_name},
                     {"tools", tools},
                     {"history", history_json(s.turns)},
                     {"turn_index", t},
                     {"target_turns", target_turns},
                     {"guidance", guidance_name(g)},
                     {"previous_query", t == 0 ? previous : std::string{}},
                     {"seed", seed}};
        auto text = trim(backend.chat(ureq));
        if (text.empty()) throw Refusal("user agent produced an empty message");
        if (t == 0) d.opening_query = text;
        s.turns.push_back(DialogTurn::user(text));
        bool answered = false;
        for (std::size_t k = 0; k < limits.max_steps && !answered; ++k, ++step) {
            StepContext ctx{request.tools, s.turns, request.dialog_type, mix_seed(seed, 5000 + step), request.scripts};
            auto vote = assistant_step(ctx, backend, limits.votes);
            auto& a = vote.action;
            if (a.kind == AssistantAction::Kind::Call) {
                DialogTurn turn = DialogTurn::assistant_calls(a.calls);
                turn.thought = a.thought;
                s.turns.push_back(turn);
                for (const auto& call : a.calls) {
                    ctx.history = s.turns;
                    Json result = tool_step(ctx, call, backend);
                    s.turns.push_back(DialogTurn::tool(call.api_name, std::move(result)));
                }
            } else {
                DialogTurn turn = DialogTurn::assistant(a.text);
                turn.thought = a.thought;
                s.turns.push_back(std::move(turn));
                answered = true;
            }
        }
    }
    return d;
}

}  // namespace

DataSample generate_dialog(const DialogRequest& request, llm::LlmBackend& backend, llm::LlmBackend* scorer,
                           const std::optional<ComplexityRange>& range, const DialogLimits& limits) {
    if (request.tools.empty() && request.dialog_type != DialogType::NonToolUse) {
        throw ContractError("dialog generation needs candidate tools");
    }
    if (limits.min_turns == 0 || limits.min_turns > limits.max_turns) throw ContractError("invalid turn bounds");
    Rng rng(request.seed);
    const std::size_t target_turns = rng.between(limits.min_turns, limits.max_turns);
    std::string last_reason = "no attempt";
    for (int attempt = 0; attempt <= limits.type_retries; ++attempt) {
        const std::uint64_t seed = mix_seed(request.seed, 77 + static_cast<std::uint64_t>(attempt));
        Draft d = draft_dialog(request, backend, limits, target_turns, seed, Guidance::Keep, {});
        std::size_t rounds = 0;
        std::optional<DataSample> best;
        if (satisfies_dialog_type(d.sample)) best = d.sample;
        if (scorer != nullptr) {
            d.sample.complexity = evaluate_complexity(d.sample, *scorer);
            if (best) best->complexity = d.sample.complexity;
            while (range && rounds < limits.max_rounds) {
                Guidance g = guidance_for(*d.sample.complexity, *range);
                if (g == Guidance::Keep) break;
                ++rounds;
                d = draft_dialog(request, backend, limits, target_turns, seed, g, d.opening_query);
                d.sample.complexity = evaluate_complexity(d.sample, *scorer);
                if (satisfies_dialog_type(d.sample)) best = d.sample;
            }
        }
        if (best) {
            best->provenance = Json{{"dialog_type", dialog_type_name(request.dialog_type)},
                                    {"rounds_used", rounds},
                                    {"votes", limits.votes},
                                    {"seed", request.seed}};
            return *best;
        }
        last_reason = "draft does not satisfy " + std::string(dialog_type_name(request.dialog_type));
    }
    throw TypeUnsatisfied("dialog " + request.sample_id + ": " + last_reason);
}

}  // namespace toolforge::sdg
