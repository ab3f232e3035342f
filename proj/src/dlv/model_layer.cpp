#include <cctype>
#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "toolforge/dlv/dlv.hpp"
#include "toolforge/llm/structured.hpp"
#include "toolforge/serialize.hpp"
#include "toolforge/util.hpp"

namespace toolforge::dlv {

std::string_view check_name(Check c) {
    switch (c) {
        case Check::Hallucination: return "hallucination";
        case Check::Consistency: return "consistency";
        case Check::ToolResponse: return "tool_response";
        case Check::DegenerateText: return "degenerate_text";
    }
    return "";
}

namespace {

Check check_from_name(std::string_view name) {
    for (auto c : {Check::Hallucination, Check::Consistency, Check::ToolResponse, Check::DegenerateText}) {
        if (check_name(c) == name) return c;
    }
    throw ContractError("unknown model check: " + std::string(name));
}

Aspect aspect_from_name(std::string_view name) {
    for (auto a : {Aspect::ApiClarity, Aspect::Executability, Aspect::DialogCorrectness, Aspect::Consistency}) {
        if (aspect_name(a) == name) return a;
    }
    throw ContractError("unknown aspect: " + std::string(name));
}

const char* judge_instruction(Check c) {
    switch (c) {
        case Check::Hallucination:
            return "Check whether any argument value in the assistant's function calls is made up, that is, it "
                   "appears neither in the user's messages, the system prompt, nor an earlier tool response.";
        case Check::Consistency:
            return "Check whether the assistant's replies actually complete every task the user asked for.";
        case Check::ToolResponse:
            return "Check whether every simulated tool response agrees with the called API's definition and "
                   "returns schema.";
        default:
            return "";
    }
}

std::string filler_reason(const std::string& text) {
    std::size_t run = 0;
    char32_t prev = 0;
    std::size_t same = 0;
    for (char32_t cp : decode_utf8(text)) {
        bool letter = false;
        script_of(cp, &letter);
        bool linguistic = letter || (cp < 0x80 && std::isalnum(static_cast<int>(cp))) || cp == ' ' || cp == '\n' || cp == '\t';
        run = linguistic ? 0 : run + 1;
        same = cp == prev ? same + 1 : 1;
        prev = cp;
        if (run > 16) return "a run of more than 16 filler characters";
        if (same > 16 && cp != ' ') return "one character repeated more than 16 times";
    }
    return {};
}

}  // namespace

ModelVerdict degenerate_text(const DataSample& s) {
    for (std::size_t i = 0; i < s.turns.size(); ++i) {
        const auto& t = s.turns[i];
        if (t.role != Role::Assistant || t.has_calls()) continue;
        std::istringstream in(t.content);
        std::vector<std::string> tokens;
        for (std::string w; in >> w;) tokens.push_back(to_lower(w));
        if (tokens.size() >= 3) {
            std::map<std::string, std::size_t> grams;
            std::size_t best = 0;
            std::string best_gram;
            for (std::size_t k = 0; k + 2 < tokens.size(); ++k) {
                auto g = tokens[k] + " " + tokens[k + 1] + " " + tokens[k + 2];
                if (++grams[g] > best) {
                    best = grams[g];
                    best_gram = g;
                }
            }
            double positions = static_cast<double>(tokens.size() - 2);
            if (best >= 2 && static_cast<double>(best) > 0.3 * positions) {
                return {Check::DegenerateText, false,
                        "turn " + std::to_string(i) + " repeats \"" + best_gram + "\" " + std::to_string(best) + " times"};
            }
        }
        if (auto why = filler_reason(t.content); !why.empty()) {
            return {Check::DegenerateText, false, "turn " + std::to_string(i) + " contains " + why};
        }
    }
    return {Check::DegenerateText, true, "no repetitive or filler text"};
}

std::vector<ModelVerdict> run_model_layer(const DataSample& s, llm::LlmBackend& backend, const ModelLayerOptions& options) {
    static const Check judged[] = {Check::Hallucination, Check::Consistency, Check::ToolResponse};
    Json sample_json = sample_to_json(s);
    Json tools = Json::array();
    for (const auto& t : s.tool_list) tools.push_back(api_to_json(t));
    std::string transcript = "Tools: " + tools.dump() + "\n" + render_transcript(s.turns, 0, s.turns.size());
    auto verdicts = bounded_parallel_map<ModelVerdict>(3, std::max<std::size_t>(1, options.max_in_flight), [&](std::size_t i) {
        Check c = judged[i];
        std::string last = "no reply";
        for (int attempt = 0; attempt <= options.retries; ++attempt) {
            llm::ChatRequest req;
            req.messages = {{"system", std::string("You review synthetic function-calling dialogs. ") + judge_instruction(c) +
                                           " Reply with a ```json block {\"passed\": true|false, \"rationale\": \"...\"}; "
                                           "explain the problem in the rationale when it fails."},
                            {"user", transcript}};
            req.sampling.temperature = 0.0;
            req.sampling.seed = static_cast<std::uint64_t>(attempt);
            req.meta = {{"task", "dlv.judge"}, {"check", check_name(c)}, {"sample", sample_json}, {"attempt", attempt}};
            auto j = llm::extract_json_object(backend.chat(req));
            if (!j || !j->contains("passed") || !(*j)["passed"].is_boolean()) {
                last = "reply lacks a boolean \"passed\"";
                continue;
            }
            ModelVerdict v{c, (*j)["passed"].get<bool>(), ""};
            if (auto r = j->find("rationale"); r != j->end() && r->is_string()) v.rationale = r->get<std::string>();
            if (!v.passed && trim(v.rationale).empty()) {
                last = "failed verdict without a rationale";
                continue;
            }
            return v;
        }
        throw VerdictParseError(std::string(check_name(c)) + " judge: " + last);
    });
    verdicts.push_back(degenerate_text(s));
    return verdicts;
}

Disposition disposition_for(const std::vector<RuleViolation>& violations, const std::vector<ModelVerdict>& verdicts) {
    bool clean = violations.empty() &&
                 std::all_of(verdicts.begin(), verdicts.end(), [](const ModelVerdict& v) { return v.passed; });
    return clean ? Disposition::Keep : Disposition::Discard;
}

VerificationReport verify(const DataSample& s, llm::LlmBackend& backend, const RuleLimits& limits,
                          const ModelLayerOptions& options) {
    VerificationReport report;
    report.sample_id = s.sample_id;
    report.violations = run_rule_layer(s, limits);
    if (report.violations.empty()) {
        try {
            report.verdicts = run_model_layer(s, backend, options);
        } catch (const BackendError& e) {
            report.disposition = Disposition::Discard;
            throw VerificationFailed(e.what(), report);
        }
    }
    report.disposition = disposition_for(report.violations, report.verdicts);
    return report;
}

Json report_to_json(const VerificationReport& r) {
    Json violations = Json::array();
    for (const auto& v : r.violations) {
        violations.push_back({{"rule_id", v.rule_id},
                              {"aspect", aspect_name(v.aspect)},
                              {"message", v.message},
                              {"location", v.location},
                              {"turn_index", v.turn_index}});
    }
    Json verdicts = Json::array();
    for (const auto& v : r.verdicts) {
        verdicts.push_back({{"check", check_name(v.check)}, {"passed", v.passed}, {"rationale", v.rationale}});
    }
    return Json{{"sample_id", r.sample_id},
                {"violations", violations},
                {"verdicts", verdicts},
                {"disposition", r.disposition == Disposition::Keep ? "keep" : "discard"}};
}

VerificationReport report_from_json(const Json& j) {
    if (!j.is_object()) throw ContractError("report record must be an object");
    VerificationReport r;
    r.sample_id = j.value("sample_id", std::string{});
    for (const auto& v : j.value("violations", Json::array())) {
        r.violations.push_back({v.value("rule_id", std::string{}), aspect_from_name(v.value("aspect", std::string{})),
                                v.value("message", std::string{}), v.value("location", std::string{}),
                                v.value("turn_index", std::size_t{0})});
    }
    for (const auto& v : j.value("verdicts", Json::array())) {
        r.verdicts.push_back({check_from_name(v.value("check", std::string{})), v.value("passed", false),
                              v.value("rationale", std::string{})});
    }
    auto d = j.value("disposition", std::string("discard"));
    if (d != "keep" && d != "discard") throw ContractError("unknown disposition " + d);
    r.disposition = d == "keep" ? Disposition::Keep : Disposition::Discard;
    return r;
}

Json report_stats(const std::vector<VerificationReport>& reports) {
    std::size_t kept = 0;
    std::map<std::string, std::size_t> rule_samples;
    std::map<std::string, std::pair<std::size_t, std::size_t>> checks;  // passed, total
    for (const auto& r : reports) {
        if (r.disposition == Disposition::Keep) ++kept;
        std::set<std::string> seen;
        for (const auto& v : r.violations) seen.insert(v.rule_id);
        for (const auto& id : seen) ++rule_samples[id];
        for (const auto& v : r.verdicts) {
            auto& [p, t] = checks[std::string(check_name(v.check))];
            p += v.passed ? 1 : 0;
            ++t;
        }
    }
    const double n = static_cast<double>(reports.size());
    Json rules = Json::object();
    for (const auto& info : rule_catalog()) {
        std::size_t failed = rule_samples.count(std::string(info.rule_id)) ? rule_samples[std::string(info.rule_id)] : 0;
        rules[std::string(info.rule_id)] = {{"failed", failed}, {"pass_rate", n > 0 ? 1.0 - static_cast<double>(failed) / n : 1.0}};
    }
    Json cj = Json::object();
    for (const auto& [name, pt] : checks) {
        cj[name] = {{"passed", pt.first}, {"total", pt.second},
                    {"pass_rate", pt.second ? static_cast<double>(pt.first) / static_cast<double>(pt.second) : 1.0}};
    }
    return Json{{"reports", reports.size()}, {"kept", kept}, {"discarded", reports.size() - kept}, {"rules", rules}, {"checks", cj}};
}

}  // namespace toolforge::dlv
