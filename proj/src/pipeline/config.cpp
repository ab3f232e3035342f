#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "toolforge/llm/mock_backend.hpp"
#include "toolforge/llm/openai_backend.hpp"
#include "toolforge/pipeline/pipeline.hpp"
#include "toolforge/serialize.hpp"

namespace toolforge::pipeline {

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(std::string("config key \"") + key + "\" has the wrong type");
    }
}

std::size_t count_or(const Json& j, const char* key, std::size_t fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
        throw ConfigError(std::string("config key \"") + key + "\" must be a count >= 0");
    }
    return it->get<std::size_t>();
}

const Json& section(const Json& j, const char* key) {
    static const Json empty = Json::object();
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return empty;
    if (!it->is_object()) throw ConfigError(std::string("config section \"") + key + "\" must be an object");
    return *it;
}

std::optional<std::filesystem::path> path_or(const Json& j, const char* key, const std::filesystem::path& base) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ConfigError(std::string("config key \"") + key + "\" must be a path");
    std::filesystem::path p = it->get<std::string>();
    return p.is_absolute() ? p : base / p;
}

}  // namespace

PipelineConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    PipelineConfig c;
    c.source = j;
    c.seed = get_or<std::uint64_t>(j, "seed", 0);

    const Json& stages = section(j, "stages");
    c.run_tss = get_or(stages, "tss", true);
    c.run_sdg = get_or(stages, "sdg", true);
    c.run_dlv = get_or(stages, "dlv", true);

    const Json& counts = section(j, "counts");
    c.n_apis = count_or(counts, "apis", c.n_apis);
    c.n_dialogs = count_or(counts, "dialogs", c.n_dialogs);
    if (auto it = counts.find("mix"); it != counts.end() && !it->is_null()) {
        if (!it->is_object()) throw ConfigError("counts.mix must be an object");
        c.mix.clear();
        for (auto m = it->begin(); m != it->end(); ++m) {
            DialogType t;
            try {
                t = dialog_type_from_name(m.key());
            } catch (const ContractError&) {
                throw ConfigError("counts.mix has unknown dialog type " + m.key());
            }
            if (!m.value().is_number() || m.value().get<double>() < 0) throw ConfigError("mix fractions must be >= 0");
            c.mix[t] = m.value().get<double>();
        }
    }
    double total = 0;
    for (const auto& [_, f] : c.mix) total += f;
    if (std::fabs(total - 1.0) > 1e-9) throw ConfigError("counts.mix must sum to 1");

    const Json& tss = section(j, "tss");
    c.tss.n_apis = c.n_apis;
    c.tss.generations = count_or(tss, "generations", c.tss.generations);
    c.tss.breadth = count_or(tss, "breadth", c.tss.breadth);
    c.tss.max_indicators = count_or(tss, "max_indicators", c.tss.max_indicators);
    c.tss.buffer_capacity = count_or(tss, "buffer_capacity", c.tss.buffer_capacity);
    c.tss.retries = static_cast<int>(count_or(tss, "retries", static_cast<std::size_t>(c.tss.retries)));
    if (c.tss.breadth == 0 || c.tss.buffer_capacity == 0) throw ConfigError("tss.breadth and tss.buffer_capacity must be positive");
    c.seed_docs = path_or(tss, "seed_docs", base_dir);
    c.exemplars = path_or(tss, "exemplars", base_dir);
    c.initial_tree = path_or(tss, "tree", base_dir);

    const Json& sdg = section(j, "sdg");
    c.limits.votes = count_or(sdg, "votes", c.limits.votes);
    c.limits.max_rounds = count_or(sdg, "max_rounds", c.limits.max_rounds);
    c.limits.min_turns = count_or(sdg, "min_turns", c.limits.min_turns);
    c.limits.max_turns = count_or(sdg, "max_turns", c.limits.max_turns);
    c.limits.max_steps = count_or(sdg, "max_steps", c.limits.max_steps);
    c.limits.type_retries = static_cast<int>(count_or(sdg, "type_retries", static_cast<std::size_t>(c.limits.type_retries)));
    if (c.limits.votes % 2 == 0) throw ConfigError("sdg.votes must be odd");
    if (c.limits.min_turns == 0 || c.limits.min_turns > c.limits.max_turns) throw ConfigError("sdg turn bounds are invalid");
    if (auto it = sdg.find("tools_per_dialog"); it != sdg.end() && !it->is_null()) {
        if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_unsigned() || !(*it)[1].is_number_unsigned()) {
            throw ConfigError("sdg.tools_per_dialog must be [min, max]");
        }
        c.tools_min = (*it)[0].get<std::size_t>();
        c.tools_max = (*it)[1].get<std::size_t>();
        if (c.tools_min == 0 || c.tools_min > c.tools_max) throw ConfigError("sdg.tools_per_dialog bounds are invalid");
    }
    c.prompts = path_or(sdg, "prompts", base_dir);
    const Json& cx = section(sdg, "complexity");
    c.complexity = get_or(cx, "enabled", true);
    if (cx.contains("lower") || cx.contains("upper")) {
        sdg::ComplexityRange r{get_or(cx, "lower", 0.0), get_or(cx, "upper", 0.0)};
        if (r.lower > r.upper) throw ConfigError("sdg.complexity.lower exceeds upper");
        c.range = r;
    }
    c.mastered = path_or(cx, "mastered", base_dir);
    c.unlearned = path_or(cx, "unlearned", base_dir);

    const Json& dlv = section(j, "dlv");
    c.rule_limits.max_chars = count_or(dlv, "max_chars", c.rule_limits.max_chars);
    c.model_options.retries = static_cast<int>(count_or(dlv, "retries", static_cast<std::size_t>(c.model_options.retries)));

    const Json& backends = section(j, "backends");
    static const std::set<std::string> roles = {"default", "generator", "user", "assistant", "tool", "judge", "scorer"};
    for (auto it = backends.begin(); it != backends.end(); ++it) {
        if (!roles.count(it.key())) throw ConfigError("unknown backend role " + it.key());
        if (!it.value().is_object()) throw ConfigError("backend spec for " + it.key() + " must be an object");
        Json spec = it.value();
        auto type = spec.value("type", std::string("mock"));
        if (type != "mock" && type != "openai") throw ConfigError("unknown backend type " + type);
        if (spec.contains("script") && spec["script"].is_string()) {
            std::filesystem::path p = spec["script"].get<std::string>();
            spec["script"] = (p.is_absolute() ? p : base_dir / p).string();
        }
        c.backends[it.key()] = std::move(spec);
    }

    const Json& conc = section(j, "concurrency");
    c.max_in_flight = std::max<std::size_t>(1, count_or(conc, "max_in_flight", c.max_in_flight));
    c.per_minute = count_or(conc, "per_minute", c.per_minute);
    c.tss.max_in_flight = c.max_in_flight;

    const Json& refill = section(j, "refill");
    c.refill = get_or(refill, "enabled", false);
    c.refill_budget = count_or(refill, "budget", 0);

    const Json& paths = section(j, "paths");
    for (auto it = paths.begin(); it != paths.end(); ++it) {
        if (!c.files.count(it.key())) throw ConfigError("unknown path key " + it.key());
        if (!it.value().is_string() || it.value().get<std::string>().empty()) throw ConfigError("paths." + it.key() + " must be a file name");
        c.files[it.key()] = it.value().get<std::string>();
    }
    std::set<std::string> distinct;
    for (const auto& [_, f] : c.files) {
        if (!distinct.insert(f).second) throw ConfigError("output paths must be distinct: " + f);
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    Json j = Json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
    return config_from_json(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

std::string config_hash(const PipelineConfig& config) {
    return hex64(fnv1a(config.source.dump() + "\x1f" + std::to_string(config.seed)));
}

std::map<DialogType, std::size_t> allocate_mix(const std::map<DialogType, double>& mix, std::size_t total) {
    std::map<DialogType, std::size_t> out;
    std::vector<std::pair<double, DialogType>> remainders;
    std::size_t assigned = 0;
    for (auto t : kAllDialogTypes) {
        auto it = mix.find(t);
        double share = it == mix.end() ? 0.0 : it->second * static_cast<double>(total);
        auto whole = static_cast<std::size_t>(std::floor(share + 1e-9));
        out[t] = whole;
        assigned += whole;
        remainders.emplace_back(share - static_cast<double>(whole), t);
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i, ++assigned) ++out[remainders[i].second];
    return out;
}

namespace {

llm::BackendPtr build_backend(const Json& spec) {
    auto type = spec.value("type", std::string("mock"));
    if (type == "openai") {
        llm::OpenAIOptions o;
        o.base_url = spec.value("base_url", o.base_url);
        o.chat_model = spec.value("chat_model", o.chat_model);
        o.score_model = spec.value("score_model", o.score_model);
        o.timeout = std::chrono::seconds(spec.value("timeout_s", 60));
        o.retry.max_attempts = spec.value("max_attempts", o.retry.max_attempts);
        return std::make_shared<llm::OpenAIBackend>(o);
    }
    llm::MockOptions o;
    o.chat = llm::chat_fallthrough_from_name(spec.value("chat", std::string("simulate")));
    o.score = llm::score_fallthrough_from_name(spec.value("score", std::string("uniform")));
    o.uniform_p = spec.value("uniform_p", o.uniform_p);
    o.seed = spec.value("seed", o.seed);
    o.api_count_base = spec.value("api_count_base", o.api_count_base);
    o.api_count_step = spec.value("api_count_step", o.api_count_step);
    if (!(o.uniform_p > 0.0 && o.uniform_p <= 1.0)) throw ConfigError("uniform_p must be in (0, 1]");
    if (auto it = spec.find("script"); it != spec.end() && it->is_string()) {
        try {
            return llm::MockBackend::from_script(it->get<std::string>(), o);
        } catch (const ScriptParseError& e) {
            throw ConfigError(e.what());
        }
    }
    return std::make_shared<llm::MockBackend>(o);
}

// Dispatches chat requests by their meta task tag.
class RoutedBackend final : public llm::LlmBackend {
public:
    RoutedBackend(llm::BackendPtr user, llm::BackendPtr assistant, llm::BackendPtr tool)
        : user_(std::move(user)), assistant_(std::move(assistant)), tool_(std::move(tool)) {}

    std::string chat(const llm::ChatRequest& req) override {
        auto task = req.meta.is_object() ? req.meta.value("task", std::string{}) : std::string{};
        if (task == "sdg.user") return user_->chat(req);
        if (task == "sdg.tool") return tool_->chat(req);
        return assistant_->chat(req);
    }

private:
    llm::BackendPtr user_, assistant_, tool_;
};

}  // namespace

Backends make_backends(const PipelineConfig& config) {
    std::map<std::string, llm::BackendPtr> built;
    auto for_role = [&](const std::string& role) -> llm::BackendPtr {
        Json spec = Json{{"type", "mock"}, {"chat", "simulate"}, {"score", "uniform"}};
        if (auto it = config.backends.find(role); it != config.backends.end()) spec = it->second;
        else if (auto d = config.backends.find("default"); d != config.backends.end()) spec = d->second;
        auto key = spec.dump();
        auto it = built.find(key);
        if (it != built.end()) return it->second;
        auto b = llm::make_limited(build_backend(spec), config.max_in_flight, config.per_minute);
        built[key] = b;
        return b;
    };
    Backends b;
    b.generator = for_role("generator");
    auto user = for_role("user"), assistant = for_role("assistant"), tool = for_role("tool");
    b.dialog = user == assistant && assistant == tool ? user : std::make_shared<RoutedBackend>(user, assistant, tool);
    b.judge = for_role("judge");
    b.scorer = for_role("scorer");
    return b;
}

}  // namespace toolforge::pipeline
