#include "toolforge/llm/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

#include "toolforge/call_string.hpp"
#include "toolforge/dialog.hpp"
#include "toolforge/llm/structured.hpp"
#include "toolforge/serialize.hpp"

namespace toolforge::llm {

namespace {

std::string snake(std::string_view label, std::size_t max_words = 5) {
    auto words = word_tokens(label);
    std::string out;
    for (std::size_t i = 0; i < words.size() && i < max_words; ++i) {
        if (i) out.push_back('_');
        out += words[i];
    }
    return out.empty() ? std::string("tool") : out;
}

bool contains(std::string_view hay, std::string_view needle) { return hay.find(needle) != std::string_view::npos; }

const std::vector<std::string>& string_pool(const std::string& lname) {
    static const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> table = {
        {{"date"}, {"2021-04-01", "2021-05-01", "2024-03-15"}},
        {{"time"}, {"08:00", "14:30", "19:45"}},
        {{"email"}, {"user@example.com"}},
        {{"url", "link"}, {"https://example.com/data"}},
        {{"city", "location", "place", "region"}, {"Ottawa", "Paris", "Tokyo"}},
        {{"lang", "locale"}, {"en_US", "fr_FR"}},
        {{"currency"}, {"USD", "EUR"}},
        {{"category", "genre", "type"}, {"Theatre", "Dance", "Music"}},
        {{"id", "code"}, {"A123", "B456", "C789"}},
        {{"name", "user"}, {"Alice", "foo", "Bob"}},
    };
    static const std::vector<std::string> fallback = {"standard", "aurora", "river", "summit", "harbor"};
    for (const auto& [keys, pool] : table) {
        for (const auto& k : keys) {
            if (contains(lname, k)) return pool;
        }
    }
    return fallback;
}

bool pattern_accepts(const std::string& pattern, const std::string& s) {
    try {
        return std::regex_search(s, std::regex(pattern, std::regex::ECMAScript));
    } catch (const std::regex_error&) {
        return false;
    }
}

std::string synthesize_string(const ParamSchema& schema, const std::string& name, Rng& rng) {
    const auto& pool = string_pool(to_lower(name));
    std::string pick = pool[rng.below(pool.size())];
    if (!schema.pattern || pattern_accepts(*schema.pattern, pick)) return pick;
    static const std::vector<std::string> candidates = {
        "2021-04-01", "08:00", "2021-10-14 08:00:00", "42", "3.5", "standard", "ABC123", "user@example.com",
        "US", "en_US", "https://example.com/data", "Alice", "a1"};
    for (const auto& c : pool) {
        if (pattern_accepts(*schema.pattern, c)) return c;
    }
    for (const auto& c : candidates) {
        if (pattern_accepts(*schema.pattern, c)) return c;
    }
    return pick;
}

Json synthesize_result_json(const ParamSchema& s, const std::string& name, Rng& rng) {
    if (s.enum_values && s.enum_values->is_array() && !s.enum_values->empty()) {
        return (*s.enum_values)[rng.below(s.enum_values->size())];
    }
    switch (s.kind) {
        case ParamKind::Integer: return static_cast<std::int64_t>(rng.below(1000));
        case ParamKind::Float: return static_cast<double>(rng.below(100000)) / 100.0;
        case ParamKind::Boolean: return rng.below(2) == 0;
        case ParamKind::Array: {
            Json arr = Json::array();
            std::size_t n = 1 + rng.below(2);
            for (std::size_t i = 0; i < n; ++i) {
                arr.push_back(s.items ? synthesize_result_json(*s.items, name, rng) : Json(name));
            }
            return arr;
        }
        case ParamKind::Dict: {
            Json obj = Json::object();
            for (const auto& p : s.properties) obj[p.name] = synthesize_result_json(*p.schema, p.name, rng);
            return obj;
        }
        default: {
            auto lname = to_lower(name);
            if (lname == "status") return "success";
            if (contains(lname, "token")) return hex64(rng.next());
            return name + "-" + hex64(rng.next()).substr(0, 6);
        }
    }
}

std::vector<ApiDefinition> tools_from_meta(const Json& meta) {
    std::vector<ApiDefinition> tools;
    if (auto it = meta.find("tools"); it != meta.end() && it->is_array()) {
        for (const auto& t : *it) tools.push_back(api_from_json(t));
    }
    return tools;
}

std::vector<DialogTurn> history_from_meta(const Json& meta) {
    std::vector<DialogTurn> turns;
    if (auto it = meta.find("history"); it != meta.end() && it->is_array()) {
        for (const auto& t : *it) turns.push_back(turn_from_json(t));
    }
    return turns;
}

const ApiDefinition* find_tool(const std::vector<ApiDefinition>& tools, const std::string& name) {
    for (const auto& t : tools) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

// ---------------------------------------------------------------- clauses

struct Clause {
    std::string api;
    ValueMap args;
    bool deferred = false;
    std::string dep_field, dep_source, dep_param;
};

std::string render_args(const ValueMap& args) {
    std::string out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += args[i].key + "=" + render_value(args[i].value);
    }
    return out;
}

std::string render_clause(const Clause& c) {
    std::string out = c.deferred ? "Then call " : "Please call ";
    out += c.api;
    if (!c.args.empty()) out += " with " + render_args(c.args);
    else if (!c.deferred) out += " with no arguments";
    if (c.deferred) out += " using the " + c.dep_field + " returned by " + c.dep_source + " as " + c.dep_param;
    out += ".";
    return out;
}

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Clause> parse_clauses(const std::string& text) {
    std::vector<Clause> out;
    std::size_t pos = 0;
    while (true) {
        auto at = text.find("call ", pos);
        if (at == std::string::npos) break;
        if (at > 0 && ident_char(text[at - 1])) {
            pos = at + 5;
            continue;
        }
        Clause c;
        c.deferred = at >= 5 && text.compare(at - 5, 5, "Then ") == 0;
        std::size_t name_start = at + 5;
        auto with = text.find(" with ", name_start);
        auto using_ = text.find(" using the ", name_start);
        auto name_end = std::min(with, using_);
        if (name_end == std::string::npos) break;
        c.api = text.substr(name_start, name_end - name_start);
        std::size_t p = name_end;
        if (p == with) {
            p += 6;
            if (text.compare(p, 12, "no arguments") == 0) {
                p += 12;
            } else {
                while (p < text.size()) {
                    std::size_t id_end = p;
                    while (id_end < text.size() && ident_char(text[id_end])) ++id_end;
                    if (id_end == p || id_end >= text.size() || text[id_end] != '=') break;
                    std::string key = text.substr(p, id_end - p);
                    std::size_t consumed = 0;
                    try {
                        Value v = parse_value_prefix(std::string_view(text).substr(id_end + 1), consumed);
                        // "n=5." ends a sentence; the dot is not part of the number.
                        if (v.is_float() && consumed > 1 && text[id_end + consumed] == '.' &&
                            std::isdigit(static_cast<unsigned char>(text[id_end + consumed - 1]))) {
                            std::size_t shorter = 0;
                            v = parse_value_prefix(std::string_view(text).substr(id_end + 1, consumed - 1), shorter);
                            consumed = shorter;
                        }
                        c.args.push_back({key, std::move(v)});
                    } catch (const SyntaxError&) {
                        break;
                    }
                    p = id_end + 1 + consumed;
                    if (text.compare(p, 2, ", ") == 0) p += 2;
                    else break;
                }
            }
        }
        if (text.compare(p, 11, " using the ") == 0) {
            p += 11;
            auto by = text.find(" returned by ", p);
            auto as = by == std::string::npos ? by : text.find(" as ", by + 13);
            if (by != std::string::npos && as != std::string::npos) {
                c.dep_field = text.substr(p, by - p);
                c.dep_source = text.substr(by + 13, as - by - 13);
                std::size_t q = as + 4;
                std::size_t e = q;
                while (e < text.size() && ident_char(text[e])) ++e;
                c.dep_param = text.substr(q, e - q);
                p = e;
            }
        }
        out.push_back(std::move(c));
        pos = std::max(p, at + 5);
    }
    return out;
}

ValueMap synthesize_args(const ApiDefinition& api, Rng& rng, bool include_optional, const std::string& skip = {}) {
    ValueMap args;
    for (const auto& p : api.parameters.properties) {
        if (p.name == skip) continue;
        bool req = api.parameters.is_required(p.name);
        if (!req && !(include_optional && rng.below(2) == 0)) continue;
        args.push_back({p.name, synthesize_argument(*p.schema, p.name, rng)});
    }
    return args;
}

// ---------------------------------------------------------------- tasks

std::string reply_speciate(const Json& meta) {
    std::istringstream in(meta.value("document", std::string{}));
    std::string line, domain;
    std::vector<std::string> labels;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty()) continue;
        if (t.rfind("Domain:", 0) == 0) domain = trim(t.substr(7));
        else if (t.rfind("# ", 0) == 0 && domain.empty()) domain = trim(t.substr(2));
        else if (t.rfind("- ", 0) == 0 || t.rfind("* ", 0) == 0) labels.push_back(trim(t.substr(2)));
    }
    if (domain.empty() || labels.empty()) {
        return "This document describes a number of interesting capabilities that users may find helpful.";
    }
    Json j = Json::object();
    j["domain"] = domain;
    j["functionalities"] = labels;
    return "Here is the extracted domain and its functionalities.\n" + fenced_json(j);
}

std::shared_ptr<const ParamSchema> boxed(ParamSchema s) { return std::make_shared<const ParamSchema>(std::move(s)); }

std::string reply_evolve(const Json& meta) {
    std::vector<std::string> labels = meta.value("labels", std::vector<std::string>{});
    if (labels.empty()) return "I need at least one functionality to design an API.";
    const std::string domain = meta.value("domain", std::string("General"));
    const int attempt = meta.value("attempt", 0);
    ApiDefinition example = api_from_json(meta.value("example", Json::object()));
    std::vector<std::string> indicators = meta.value("indicators", std::vector<std::string>{});
    // A type mutation resets the schema it touches, so it has to run before constraints are added.
    std::stable_partition(indicators.begin(), indicators.end(),
                          [](const std::string& i) { return i == "mutate_parameter_type"; });

    std::string joined;
    for (const auto& l : labels) joined += l + "|";
    Rng rng(fnv1a(joined + std::to_string(attempt)));

    ApiDefinition api;
    api.name = snake(labels.front());
    if (attempt > 0) api.name += "_" + hex64(rng.next()).substr(0, 4);
    if (api.name == example.name) api.name += "_v2";
    api.description = "Helps users with " + to_lower(labels.front());
    if (labels.size() > 1) {
        api.description += ", including ";
        for (std::size_t i = 1; i < labels.size(); ++i) api.description += (i > 1 ? ", " : "") + to_lower(labels[i]);
    }
    api.description += " in the " + domain + " domain.";
    api.parameters = example.parameters;
    if (api.parameters.kind != ParamKind::Dict) api.parameters = ParamSchema::dict();
    api.returns = example.returns;

    for (const auto& ind : indicators) {
        if (ind == "add_functionality") {
            std::string extra = labels.size() > 1 ? "handle " + to_lower(labels.back()) + " requests"
                                                  : "summarize related " + to_lower(domain) + " details";
            api.description += " It can also " + extra + ".";
        } else if (ind == "add_parameter") {
            static const std::vector<std::pair<std::string, ParamKind>> extras = {
                {"max_results", ParamKind::Integer},
                {"language", ParamKind::String},
                {"include_details", ParamKind::Boolean},
                {"reference_note", ParamKind::String},
                {"page_size", ParamKind::Integer}};
            std::size_t start = rng.below(extras.size());
            bool added = false;
            for (std::size_t k = 0; k < extras.size() && !added; ++k) {
                const auto& [name, kind] = extras[(start + k) % extras.size()];
                if (api.parameters.property(name)) continue;
                api.parameters.add_property(name, ParamSchema::scalar(kind, "Optional " + name + " setting."));
                added = true;
            }
            if (!added) {
                api.parameters.add_property("option_" + hex64(rng.next()).substr(0, 4),
                                            ParamSchema::scalar(ParamKind::String, "Optional extra setting."));
            }
        } else if (ind == "mutate_parameter_type") {
            for (auto& p : api.parameters.properties) {
                ParamKind k = p.schema->kind;
                ParamSchema m = *p.schema;
                m.kind = k == ParamKind::Integer   ? ParamKind::Float
                         : k == ParamKind::Float   ? ParamKind::String
                         : k == ParamKind::String  ? ParamKind::Integer
                                                   : ParamKind::String;
                m.raw_kind.clear();
                m.items.reset();
                m.properties.clear();
                m.required.clear();
                m.pattern.reset();
                m.enum_values.reset();
                m.default_value.reset();
                p.schema = boxed(std::move(m));
                break;
            }
        } else if (ind == "add_constraint") {
            bool done = false;
            for (auto& p : api.parameters.properties) {
                if (p.schema->kind != ParamKind::String || p.schema->pattern || p.schema->enum_values) continue;
                ParamSchema m = *p.schema;
                m.pattern = "^[A-Za-z0-9 ,.:_@/+-]+$";
                p.schema = boxed(std::move(m));
                done = true;
                break;
            }
            if (!done) {
                std::string name = "priority";
                for (const char* c : {"priority", "tier", "visibility"}) {
                    name = c;
                    if (!api.parameters.property(name)) break;
                }
                if (api.parameters.property(name)) name = "level_" + hex64(rng.next()).substr(0, 4);
                ParamSchema pr = ParamSchema::scalar(ParamKind::String, "Request " + name + ".");
                pr.enum_values = Json::array({"low", "normal", "high"});
                api.parameters.add_property(name, std::move(pr));
            }
        } else if (ind == "update_returns") {
            if (api.returns && api.returns->kind == ParamKind::Dict) {
                ParamSchema r = *api.returns;
                if (!r.property("updated_at")) {
                    r.add_property("updated_at", ParamSchema::scalar(ParamKind::String, "Last update time."));
                } else {
                    r.add_property("revision_" + hex64(rng.next()).substr(0, 3),
                                   ParamSchema::scalar(ParamKind::Integer, "Revision number."));
                }
                api.returns = std::move(r);
            } else {
                ParamSchema r = ParamSchema::dict();
                r.add_property("status", ParamSchema::scalar(ParamKind::String, "Outcome of the request."));
                r.add_property("reference_id", ParamSchema::scalar(ParamKind::String, "Identifier of the result."));
                r.add_property("summary", ParamSchema::scalar(ParamKind::String, "Short description of the result."));
                api.returns = std::move(r);
            }
        }
    }
    Json j = api_to_json(api);
    j.erase("domain_path");
    return "Here is the new API definition.\n" + fenced_json(j);
}

struct DependencyPlan {
    const ApiDefinition* source = nullptr;
    std::string field;
    const ApiDefinition* target = nullptr;
    std::string param;
};

bool kinds_compatible(ParamKind field, ParamKind param) {
    return field == param || (field == ParamKind::Integer && param == ParamKind::Float);
}

std::optional<DependencyPlan> plan_dependency(const std::vector<ApiDefinition>& tools, Rng& rng) {
    if (tools.empty()) return std::nullopt;
    std::size_t offset = rng.below(tools.size());
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < tools.size(); ++i) {
            const auto& a = tools[(offset + i) % tools.size()];
            std::vector<std::pair<std::string, ParamKind>> fields;
            if (a.returns && a.returns->kind == ParamKind::Dict) {
                for (const auto& p : a.returns->properties) {
                    if (!p.schema->enum_values) fields.emplace_back(p.name, p.schema->kind);
                }
            } else if (!a.returns) {
                fields.emplace_back("result", ParamKind::String);
            }
            for (std::size_t j = 0; j < tools.size(); ++j) {
                const auto& b = tools[(offset + i + j) % tools.size()];
                if ((pass == 0) == (&a == &b)) continue;
                for (const auto& p : b.parameters.properties) {
                    if (p.schema->pattern || p.schema->enum_values) continue;
                    for (const auto& [fname, fkind] : fields) {
                        if (kinds_compatible(fkind, p.schema->kind)) return DependencyPlan{&a, fname, &b, p.name};
                    }
                }
            }
        }
    }
    return std::nullopt;
}

const ApiDefinition* tool_with_required(const std::vector<ApiDefinition>& tools, Rng& rng) {
    if (tools.empty()) return nullptr;
    std::size_t offset = rng.below(tools.size());
    for (std::size_t i = 0; i < tools.size(); ++i) {
        const auto& t = tools[(offset + i) % tools.size()];
        if (!t.parameters.required.empty()) return &t;
    }
    return nullptr;
}

std::string reply_user(const Json& meta) {
    const auto tools = tools_from_meta(meta);
    const auto history = history_from_meta(meta);
    const auto type = dialog_type_from_name(meta.value("dialog_type", std::string("single")));
    const auto turn_index = meta.value("turn_index", std::size_t{0});
    const auto target_turns = meta.value("target_turns", std::size_t{1});
    const auto guidance = meta.value("guidance", std::string("keep"));
    const auto previous = meta.value("previous_query", std::string{});
    Rng rng(mix_seed(meta.value("seed", std::uint64_t{0}), turn_index));
    const std::string complicate_prefix =
        "I am putting together a detailed plan for a client and want to be thorough about every step. ";

    if (turn_index > 0) {
        if (type == DialogType::NonToolUse) return "Thank you, that is all I needed.";
        // Answer an outstanding request for parameters.
        for (auto it = history.rbegin(); it != history.rend(); ++it) {
            if (it->role != Role::Assistant) continue;
            const std::string marker = "The function ";
            auto& c = it->content;
            if (c.rfind(marker, 0) == 0 && contains(c, "lacks the required parameters")) {
                auto end = c.find(" can help");
                if (const auto* t = find_tool(tools, c.substr(marker.size(), end - marker.size()))) {
                    Clause cl{t->name, synthesize_args(*t, rng, false)};
                    return "Sure. " + render_clause(cl);
                }
            }
            break;
        }
        if (tools.empty()) return "Thank you, that is all I needed.";
        const auto& t = tools[rng.below(tools.size())];
        return render_clause({t.name, synthesize_args(t, rng, true)});
    }

    switch (type) {
        case DialogType::NonToolUse: {
            const ApiDefinition* t = tool_with_required(tools, rng);
            if (t != nullptr && rng.below(2) == 0) return "I'd like to use " + t->name + ".";
            static const std::vector<std::string> topics = {
                "Can you check the showtimes for the film \"Avengers: Endgame\" at Cinema 21 and Cinema 45?",
                "Could you tell me what the tallest mountain in Europe is?",
                "Can you recommend a good recipe for banana bread?",
                "What is the history behind the Eiffel Tower?"};
            return topics[rng.below(topics.size())];
        }
        case DialogType::Single: {
            if (tools.empty()) return "Hello, can you help me?";
            bool ask_first = target_turns >= 2 && rng.below(3) == 0;
            const auto& t = tools[rng.below(tools.size())];
            if (ask_first && !t.parameters.required.empty()) return "I'd like to use " + t.name + ".";
            std::string q = render_clause({t.name, synthesize_args(t, rng, true)});
            return guidance == "complicate" ? complicate_prefix + q : q;
        }
        case DialogType::Parallel: {
            if (tools.empty()) return "Hello, can you help me?";
            // Choices that shape the request are drawn before anything guidance-dependent.
            bool same_tool = rng.below(2) == 0;
            std::size_t first = rng.below(tools.size());
            std::size_t n = 2;
            if (!previous.empty()) {
                std::size_t prev = parse_clauses(previous).size();
                if (guidance == "complicate") n = std::min<std::size_t>(prev + 1, 5);
                else if (guidance == "simplify") n = std::max<std::size_t>(2, prev > 0 ? prev - 1 : 2);
                else n = std::max<std::size_t>(2, prev);
            }
            std::string q;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& t = tools[same_tool ? first : (first + i) % tools.size()];
                Rng local(mix_seed(rng.next(), i));
                std::string clause = render_clause({t.name, synthesize_args(t, local, true)});
                if (i > 0) clause = "Also, please" + clause.substr(6);
                q += (i ? " " : "") + clause;
            }
            return q;
        }
        case DialogType::Dependent: {
            auto plan = plan_dependency(tools, rng);
            if (!plan) return "Hello, can you help me?";
            Clause first{plan->source->name, synthesize_args(*plan->source, rng, false)};
            Clause second{plan->target->name, synthesize_args(*plan->target, rng, false, plan->param)};
            second.deferred = true;
            second.dep_field = plan->field;
            second.dep_source = plan->source->name;
            second.dep_param = plan->param;
            std::string q = render_clause(first) + " " + render_clause(second);
            return guidance == "complicate" ? complicate_prefix + q : q;
        }
    }
    return "Hello, can you help me?";
}

Json assistant_json(const std::string& action, const std::string& content, const std::string& thought) {
    return Json{{"thought", thought}, {"action", action}, {"content", content}};
}

const Json* payload_results(const DialogTurn& t) {
    if (!t.tool_payload || !t.tool_payload->is_object()) return nullptr;
    auto it = t.tool_payload->find("results");
    return it == t.tool_payload->end() ? nullptr : &*it;
}

std::string reply_assistant(const Json& meta) {
    const auto tools = tools_from_meta(meta);
    const auto history = history_from_meta(meta);
    const auto vote = meta.value("vote_index", std::size_t{0});
    const auto seed = meta.value("seed", std::uint64_t{0});

    if (vote > 0 && mix_seed(seed, history.size() * 31 + vote) % 17 == 0) {
        return fenced_json(assistant_json("ask_info", "Could you clarify which details you would like me to use?",
                                          "The request might be ambiguous."));
    }

    std::size_t last_user = std::string::npos;
    for (std::size_t i = history.size(); i-- > 0;) {
        if (history[i].role == Role::User) {
            last_user = i;
            break;
        }
    }
    if (last_user == std::string::npos) {
        return fenced_json(assistant_json("answer", "Hello! How can I help you today?", "No request yet."));
    }
    const std::string& query = history[last_user].content;
    auto clauses = parse_clauses(query);

    if (clauses.empty()) {
        const std::string use = "I'd like to use ";
        if (query.rfind(use, 0) == 0) {
            std::string name = query.substr(use.size(), query.size() - use.size() - 1);
            if (const auto* t = find_tool(tools, name)) {
                std::string params;
                for (std::size_t i = 0; i < t->parameters.required.size(); ++i) {
                    if (i) params += i + 1 == t->parameters.required.size() ? ", and " : ", ";
                    params += t->parameters.required[i];
                }
                return fenced_json(assistant_json(
                    "ask_info",
                    "The function " + name + " can help with this, but it lacks the required parameters: " + params +
                        ". Please provide these details to proceed.",
                    "The user wants " + name + " but gave no parameter values."));
            }
        }
        if (query.rfind("Thank", 0) == 0) {
            return fenced_json(assistant_json("answer", "You're welcome! Let me know if there is anything else I can help with.",
                                              "The user is closing the conversation."));
        }
        return fenced_json(assistant_json(
            "answer", "The provided functions do not support this request, so I cannot help with it using the available tools.",
            "None of the candidate tools matches the request."));
    }

    // Calls and tool results since the last user turn.
    std::vector<const FunctionCall*> made;
    std::vector<std::pair<std::string, const Json*>> results;
    for (std::size_t i = last_user + 1; i < history.size(); ++i) {
        for (const auto& c : history[i].calls) made.push_back(&c);
        if (history[i].role == Role::Tool) results.emplace_back(history[i].tool_api_name(), payload_results(history[i]));
    }

    if (made.empty()) {
        std::vector<FunctionCall> calls;
        for (const auto& c : clauses) {
            if (!c.deferred) calls.push_back({c.api, c.args});
        }
        return fenced_json(assistant_json("call", render_call_string(calls),
                                          "The request maps to " + std::to_string(calls.size()) + " call(s)."));
    }
    for (const auto& c : clauses) {
        if (!c.deferred) continue;
        bool already = std::any_of(made.begin(), made.end(), [&](const FunctionCall* f) { return f->api_name == c.api; }) &&
                       c.api != c.dep_source;
        if (c.api == c.dep_source) {
            already = std::count_if(made.begin(), made.end(), [&](const FunctionCall* f) { return f->api_name == c.api; }) >= 2;
        }
        if (already) continue;
        for (const auto& [name, res] : results) {
            if (name != c.dep_source || res == nullptr || !res->is_object()) continue;
            auto f = res->find(c.dep_field);
            if (f == res->end()) continue;
            FunctionCall call{c.api, c.args};
            call.arguments.push_back({c.dep_param, value_from_json(*f)});
            return fenced_json(assistant_json("call", render_call_string({call}),
                                              "The " + c.dep_field + " from " + c.dep_source + " feeds the next call."));
        }
    }
    std::string summary = "Here is what I found: ";
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (i) summary += "; ";
        summary += results[i].first + " returned " + (results[i].second ? results[i].second->dump() : std::string("nothing"));
    }
    summary += ".";
    return fenced_json(assistant_json("summarize", summary, "All requested calls have results."));
}

std::string reply_tool(const Json& meta) {
    Json call = meta.value("call", Json::object());
    std::optional<ApiDefinition> api;
    if (auto it = meta.find("api"); it != meta.end() && it->is_object()) api = api_from_json(*it);
    return synthesize_tool_result(api ? &*api : nullptr, call.dump()).dump();
}

void collect_leaves(const Value& v, std::vector<Value>& out) {
    if (v.is_list()) {
        for (const auto& x : v.as_list()) collect_leaves(x, out);
    } else if (v.is_map()) {
        for (const auto& e : v.as_map()) collect_leaves(e.value, out);
    } else if (!v.is_bool()) {
        out.push_back(v);
    }
}

void collect_json_leaves(const Json& j, std::vector<Json>& out) {
    if (j.is_object() || j.is_array()) {
        for (const auto& x : j) collect_json_leaves(x, out);
    } else {
        out.push_back(j);
    }
}

Json verdict(bool passed, std::string rationale) { return Json{{"passed", passed}, {"rationale", std::move(rationale)}}; }

Json judge_hallucination(const DataSample& s) {
    std::string context = s.system_prompt;
    std::vector<Json> observed;
    for (const auto& t : s.turns) {
        if (t.role == Role::User) context += "\n" + t.content;
        if (t.role == Role::Tool && t.tool_payload) collect_json_leaves(*t.tool_payload, observed);
        for (const auto& c : t.calls) {
            for (const auto& a : c.arguments) {
                std::vector<Value> leaves;
                collect_leaves(a.value, leaves);
                for (const auto& leaf : leaves) {
                    bool seen = false;
                    Json lj = to_json(leaf);
                    for (const auto& o : observed) {
                        if ((o.is_number() && lj.is_number() && o.get<double>() == lj.get<double>()) || o == lj) seen = true;
                    }
                    if (!seen) {
                        std::string text = leaf.is_string() ? leaf.as_string() : render_value(leaf);
                        seen = contains(context, text);
                    }
                    if (!seen) {
                        return verdict(false, "argument " + a.key + " of " + c.api_name + " uses " + render_value(leaf) +
                                                  ", which appears in neither the user query nor the system prompt");
                    }
                }
            }
        }
    }
    return verdict(true, "all argument values are grounded in the dialog");
}

Json judge_consistency(const DataSample& s) {
    auto last = s.final_assistant_index();
    if (last == std::string::npos) return verdict(false, "the dialog has no assistant response");
    if (s.turns[last].content.empty() && !s.turns[last].has_calls()) return verdict(false, "the final response is empty");
    std::set<std::string> called;
    for (const auto& t : s.turns) {
        for (const auto& c : t.calls) called.insert(c.api_name);
    }
    for (const auto& t : s.turns) {
        if (t.role != Role::User) continue;
        for (const auto& c : parse_clauses(t.content)) {
            if (!called.count(c.api)) return verdict(false, "the user asked for " + c.api + " but it was never called");
        }
    }
    return verdict(true, "the responses complete the user's requests");
}

Json judge_tool_response(const DataSample& s) {
    for (const auto& t : s.turns) {
        if (t.role != Role::Tool) continue;
        const auto* api = s.tool(t.tool_api_name());
        if (api == nullptr || !api->returns || api->returns->kind != ParamKind::Dict) continue;
        const Json* res = payload_results(t);
        if (res == nullptr || !res->is_object()) return verdict(false, "tool response for " + api->name + " is not an object");
        for (auto it = res->begin(); it != res->end(); ++it) {
            if (!api->returns->property(it.key())) {
                return verdict(false, "tool response field " + it.key() + " is not declared by " + api->name);
            }
        }
    }
    return verdict(true, "tool responses match the API definitions");
}

std::string reply_judge(const Json& meta) {
    DataSample s = sample_from_json(meta.value("sample", Json::object()));
    const auto check = meta.value("check", std::string{});
    Json v;
    if (check == "hallucination") v = judge_hallucination(s);
    else if (check == "consistency") v = judge_consistency(s);
    else if (check == "tool_response") v = judge_tool_response(s);
    else v = verdict(true, "no opinion");
    return fenced_json(v);
}

}  // namespace

Value synthesize_argument(const ParamSchema& s, const std::string& name, Rng& rng) {
    if (s.enum_values && s.enum_values->is_array() && !s.enum_values->empty()) {
        const Json& pick = (*s.enum_values)[rng.below(s.enum_values->size())];
        if (!pick.is_null()) return value_from_json(pick);
    }
    switch (s.kind) {
        case ParamKind::Integer: return Value(static_cast<std::int64_t>(1 + rng.below(100)));
        case ParamKind::Float: return Value(static_cast<double>(1 + rng.below(9999)) / 100.0);
        case ParamKind::Boolean: return Value(rng.below(2) == 0);
        case ParamKind::Array: {
            ValueList items;
            std::size_t n = 1 + rng.below(2);
            for (std::size_t i = 0; i < n; ++i) {
                items.push_back(s.items ? synthesize_argument(*s.items, name, rng) : Value(std::string("item")));
            }
            return Value(std::move(items));
        }
        case ParamKind::Dict: {
            ValueMap m;
            for (const auto& p : s.properties) {
                if (s.is_required(p.name) || rng.below(2) == 0) m.push_back({p.name, synthesize_argument(*p.schema, p.name, rng)});
            }
            return Value(std::move(m));
        }
        default:
            return Value(synthesize_string(s, name, rng));
    }
}

Json synthesize_tool_result(const ApiDefinition* api, const std::string& call_text) {
    Rng rng(fnv1a(call_text));
    if (api != nullptr && api->returns) {
        if (api->returns->kind == ParamKind::Dict) return synthesize_result_json(*api->returns, "result", rng);
        return Json{{"result", synthesize_result_json(*api->returns, "result", rng)}};
    }
    return Json{{"result", "ok-" + hex64(rng.next()).substr(0, 6)}};
}

std::optional<std::string> simulate_reply(const ChatRequest& req) {
    if (!req.meta.is_object()) return std::nullopt;
    const auto task = req.meta.value("task", std::string{});
    if (task == "tss.speciate") return reply_speciate(req.meta);
    if (task == "tss.evolve") return reply_evolve(req.meta);
    if (task == "sdg.user") return reply_user(req.meta);
    if (task == "sdg.assistant") return reply_assistant(req.meta);
    if (task == "sdg.tool") return reply_tool(req.meta);
    if (task == "dlv.judge") return reply_judge(req.meta);
    return std::nullopt;
}

}  // namespace toolforge::llm
