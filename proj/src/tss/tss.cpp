#include "toolforge/tss/tss.hpp"

#include <map>

#include "toolforge/llm/structured.hpp"

namespace toolforge::tss {

std::string_view indicator_name(Indicator ind) {
    switch (ind) {
        case Indicator::AddFunctionality: return "add_functionality";
        case Indicator::AddParameter: return "add_parameter";
        case Indicator::AddConstraint: return "add_constraint";
        case Indicator::MutateParameterType: return "mutate_parameter_type";
        case Indicator::UpdateReturns: return "update_returns";
    }
    return "";
}

Indicator indicator_from_name(std::string_view name) {
    for (auto ind : kAllIndicators) {
        if (indicator_name(ind) == name) return ind;
    }
    throw ContractError("unknown diversity indicator: " + std::string(name));
}

namespace {

void flatten(const ParamSchema& s, const std::string& path, std::map<std::string, const ParamSchema*>& out) {
    out[path] = &s;
    if (s.items) flatten(*s.items, path + "[]", out);
    for (const auto& p : s.properties) flatten(*p.schema, path.empty() ? p.name : path + "." + p.name, out);
}

Json constraint_of(const ParamSchema& s) {
    Json c = Json::object();
    if (s.pattern) c["pattern"] = *s.pattern;
    if (s.enum_values) c["enum"] = *s.enum_values;
    for (const char* k : {"minimum", "maximum"}) {
        if (s.extras.contains(k)) c[k] = s.extras[k];
    }
    return c;
}

}  // namespace

std::set<Indicator> classify_diff(const ApiDefinition& before, const ApiDefinition& after) {
    std::set<Indicator> out;
    std::map<std::string, const ParamSchema*> a, b;
    flatten(before.parameters, "", a);
    flatten(after.parameters, "", b);
    for (const auto& [path, s] : b) {
        auto it = a.find(path);
        Json c = constraint_of(*s);
        if (it == a.end()) {
            out.insert(Indicator::AddParameter);
            if (!c.empty()) out.insert(Indicator::AddConstraint);
            continue;
        }
        const ParamSchema& old = *it->second;
        if (old.kind != s->kind) out.insert(Indicator::MutateParameterType);
        Json oc = constraint_of(old);
        for (auto ci = c.begin(); ci != c.end(); ++ci) {
            if (!oc.contains(ci.key()) || oc[ci.key()] != ci.value()) out.insert(Indicator::AddConstraint);
        }
        for (const auto& r : s->required) {
            if (!old.is_required(r)) out.insert(Indicator::AddConstraint);
        }
    }
    if (before.returns.has_value() != after.returns.has_value() ||
        (before.returns && schema_to_json(*before.returns) != schema_to_json(*after.returns))) {
        out.insert(Indicator::UpdateReturns);
    }
    auto old_words = word_tokens(before.description);
    std::set<std::string> known(old_words.begin(), old_words.end());
    for (const auto& w : word_tokens(after.description)) {
        if (!known.count(w)) {
            out.insert(Indicator::AddFunctionality);
            break;
        }
    }
    return out;
}

ExampleBuffer::ExampleBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ContractError("example buffer capacity must be positive");
}

void ExampleBuffer::push(ApiDefinition api) {
    std::lock_guard lock(mu_);
    items_.push_back(std::move(api));
    while (items_.size() > capacity_) items_.pop_front();
}

std::size_t ExampleBuffer::size() const {
    std::lock_guard lock(mu_);
    return items_.size();
}

ApiDefinition ExampleBuffer::at(std::size_t i) const {
    std::lock_guard lock(mu_);
    return items_.at(i);
}

std::vector<ApiDefinition> ExampleBuffer::snapshot() const {
    std::lock_guard lock(mu_);
    return {items_.begin(), items_.end()};
}

Speciation speciate(const std::string& document, llm::LlmBackend& backend, int retries, std::uint64_t seed) {
    if (trim(document).empty()) throw ContractError("speciation needs a nonempty document");
    std::string last = "no reply";
    for (int attempt = 0; attempt <= retries; ++attempt) {
        llm::ChatRequest req;
        req.messages = {
            {"system",
             "Read the document and extract one API domain and every API functionality it suggests. Reply with a "
             "```json block {\"domain\": string, \"functionalities\": [string, ...]}. Nest a functionality under "
             "another with \"Parent > Child\"."},
            {"user", document}};
        req.sampling.temperature = 0.0;
        req.sampling.seed = seed + static_cast<std::uint64_t>(attempt);
        req.meta = {{"task", "tss.speciate"}, {"document", document}, {"attempt", attempt}};
        auto reply = backend.chat(req);
        auto j = llm::extract_json_object(reply);
        if (!j) {
            last = "reply has no structured block";
            continue;
        }
        if (!j->contains("domain") || !(*j)["domain"].is_string() || trim((*j)["domain"].get<std::string>()).empty()) {
            last = "structured block lacks a domain";
            continue;
        }
        Speciation out{trim((*j)["domain"].get<std::string>()), {}};
        std::set<std::string> seen;
        if (auto f = j->find("functionalities"); f != j->end() && f->is_array()) {
            for (const auto& l : *f) {
                if (!l.is_string()) continue;
                auto label = trim(l.get<std::string>());
                if (!label.empty() && seen.insert(to_lower(label)).second) out.functionalities.push_back(label);
            }
        }
        if (out.functionalities.empty()) {
            last = "structured block lists no functionalities";
            continue;
        }
        return out;
    }
    throw ExtractionError("speciation failed after " + std::to_string(retries + 1) + " attempts: " + last);
}

ApiDefinition evolve_api(const SubtreeSample& subtree, const ApiDefinition& example,
                         const std::vector<Indicator>& indicators, llm::LlmBackend& backend,
                         const EvolveOptions& options) {
    if (subtree.labels.empty()) throw ContractError("evolution needs at least one functionality");
    Json labels = subtree.labels;
    Json inds = Json::array();
    std::string ind_text;
    for (auto i : indicators) {
        inds.push_back(indicator_name(i));
        ind_text += (ind_text.empty() ? "" : ", ") + std::string(indicator_name(i));
    }
    Json example_json = api_to_json(example);
    example_json.erase("domain_path");
    std::string last = "no reply";
    for (int k = 0; k <= options.retries; ++k) {
        int attempt = options.first_attempt + k;
        llm::ChatRequest req;
        std::string user = "Domain: " + subtree.domain + "\nFunctionalities:\n";
        for (const auto& l : subtree.labels) user += "- " + l + "\n";
        user += "Example API:\n" + example_json.dump(2) + "\n";
        user += "Diversity changes to apply: " + (ind_text.empty() ? std::string("none") : ind_text) + "\n";
        req.messages = {{"system",
                         "Design one new API covering the listed functionalities. Use the example for format, give "
                         "the new API a different name, apply every requested diversity change, and reply with a "
                         "```json block holding name, description, parameters and returns."},
                        {"user", user}};
        req.sampling.seed = options.seed + static_cast<std::uint64_t>(attempt);
        req.meta = {{"task", "tss.evolve"},  {"domain", subtree.domain}, {"labels", labels},
                    {"example", example_json}, {"indicators", inds},       {"attempt", attempt}};
        auto reply = backend.chat(req);
        auto j = llm::extract_json_object(reply);
        if (!j) {
            last = "reply has no structured block";
            continue;
        }
        ApiDefinition api;
        try {
            api = validate_api(*j);
        } catch (const SchemaError& e) {
            last = e.what();
            continue;
        }
        if (api.name == example.name) {
            last = "generated API reuses the example name " + api.name;
            continue;
        }
        auto diff = classify_diff(example, api);
        std::string missing;
        for (auto i : indicators) {
            if (!diff.count(i)) missing += (missing.empty() ? "" : ", ") + std::string(indicator_name(i));
        }
        if (!missing.empty()) {
            last = "requested changes not present: " + missing;
            continue;
        }
        api.domain_path = subtree.domain_path();
        return api;
    }
    throw RejectedGeneration("evolution rejected after " + std::to_string(options.retries + 1) + " attempts: " + last);
}

ApiDefinition default_exemplar() {
    ApiDefinition api;
    api.name = "get_weather_forecast";
    api.description = "Returns the weather forecast for a city on a given date.";
    api.parameters.add_property("city", ParamSchema::scalar(ParamKind::String, "City name."), true);
    api.parameters.add_property("date", ParamSchema::scalar(ParamKind::String, "Date in YYYY-MM-DD format."));
    api.parameters.add_property("days", ParamSchema::scalar(ParamKind::Integer, "Number of forecast days."));
    ParamSchema ret = ParamSchema::dict();
    ret.add_property("temperature", ParamSchema::scalar(ParamKind::Float, "Temperature in Celsius."));
    ret.add_property("condition", ParamSchema::scalar(ParamKind::String, "Short weather summary."));
    api.returns = std::move(ret);
    return api;
}

namespace {

struct Planned {
    SubtreeSample subtree;
    ApiDefinition example;
    std::vector<Indicator> indicators;
    std::uint64_t seed = 0;
};

struct Outcome {
    std::optional<ApiDefinition> api;
    std::string error;
};

}  // namespace

TssResult run_tss(const TssConfig& config, const std::vector<std::string>& seed_docs,
                  const std::vector<ApiDefinition>& exemplars, llm::LlmBackend& backend, ContextTree tree) {
    TssResult result;
    if (config.n_apis == 0) {
        result.tree = std::move(tree);
        return result;
    }
    for (std::size_t i = 0; i < seed_docs.size(); ++i) {
        try {
            auto sp = speciate(seed_docs[i], backend, config.retries, mix_seed(config.seed, 1000 + i));
            tree = grow_tree(std::move(tree), sp.domain, sp.functionalities);
        } catch (const ExtractionError& e) {
            result.failures.push_back({"speciate", i, e.what()});
        }
    }
    result.tree = std::move(tree);
    if (result.tree.empty()) throw EmptyTree("speciation produced no domains");

    ExampleBuffer buffer(std::max<std::size_t>(1, config.buffer_capacity));
    if (exemplars.empty()) buffer.push(default_exemplar());
    for (const auto& e : exemplars) buffer.push(e);

    Rng rng(mix_seed(config.seed, 0x7555));
    std::set<std::string> used;
    const std::size_t gens = std::max<std::size_t>(1, std::min(config.generations, config.n_apis));
    std::size_t item = 0;
    for (std::size_t g = 0; g < gens; ++g) {
        std::size_t count = config.n_apis / gens + (g < config.n_apis % gens ? 1 : 0);
        std::vector<Planned> plan;
        for (std::size_t i = 0; i < count; ++i) {
            Planned p;
            p.subtree = sample_subtree(result.tree, std::max<std::size_t>(1, config.breadth), rng);
            p.example = buffer.at(rng.below(buffer.size()));
            std::vector<Indicator> pool(std::begin(kAllIndicators), std::end(kAllIndicators));
            rng.shuffle(pool);
            std::size_t n_ind = config.max_indicators == 0 ? 0 : rng.between(1, std::min<std::size_t>(config.max_indicators, pool.size()));
            p.indicators.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_ind));
            p.seed = rng.next();
            plan.push_back(std::move(p));
        }
        auto outcomes = bounded_parallel_map<Outcome>(plan.size(), config.max_in_flight, [&](std::size_t i) {
            Outcome o;
            try {
                o.api = evolve_api(plan[i].subtree, plan[i].example, plan[i].indicators, backend,
                                   {config.retries, plan[i].seed, 0});
            } catch (const RejectedGeneration& e) {
                o.error = e.what();
            } catch (const BackendError& e) {
                o.error = e.what();
            }
            return o;
        });
        std::vector<ApiDefinition> batch;
        for (std::size_t i = 0; i < outcomes.size(); ++i, ++item) {
            if (!outcomes[i].api) {
                result.failures.push_back({"evolve", item, outcomes[i].error});
                continue;
            }
            ApiDefinition api = std::move(*outcomes[i].api);
            if (used.count(api.name)) {
                try {
                    auto again = evolve_api(plan[i].subtree, plan[i].example, plan[i].indicators, backend,
                                            {config.retries, plan[i].seed, config.retries + 1});
                    if (!used.count(again.name)) api = std::move(again);
                } catch (const Error&) {
                }
            }
            if (used.count(api.name)) {
                std::string base = api.name;
                for (std::size_t k = 2; used.count(api.name); ++k) api.name = base + "_" + std::to_string(k);
            }
            used.insert(api.name);
            result.evolutions.push_back({plan[i].example, plan[i].indicators, result.pool.size()});
            result.pool.push_back(api);
            batch.push_back(std::move(api));
        }
        for (auto& api : batch) buffer.push(std::move(api));
    }
    if (result.pool.empty()) throw Error("evolution produced no APIs");
    return result;
}

}  // namespace toolforge::tss
