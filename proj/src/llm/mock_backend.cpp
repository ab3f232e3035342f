#include "toolforge/llm/mock_backend.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "toolforge/call_string.hpp"
#include "toolforge/llm/simulator.hpp"
#include "toolforge/util.hpp"

namespace toolforge::llm {

ChatFallthrough chat_fallthrough_from_name(std::string_view name) {
    if (name == "strict") return ChatFallthrough::Strict;
    if (name == "echo") return ChatFallthrough::Echo;
    if (name == "simulate") return ChatFallthrough::Simulate;
    throw ConfigError("unknown chat fallthrough: " + std::string(name));
}

ScoreFallthrough score_fallthrough_from_name(std::string_view name) {
    if (name == "unsupported") return ScoreFallthrough::Unsupported;
    if (name == "uniform") return ScoreFallthrough::Uniform;
    if (name == "stochastic") return ScoreFallthrough::Stochastic;
    if (name == "api_count") return ScoreFallthrough::ApiCount;
    throw ConfigError("unknown score fallthrough: " + std::string(name));
}

std::vector<std::string> mock_tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i;
        if (out.empty()) {
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        }
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

MockBackend::MockBackend(MockOptions options) : options_(options) {}

std::shared_ptr<MockBackend> MockBackend::from_script(const std::filesystem::path& path, MockOptions options) {
    std::ifstream in(path);
    if (!in) throw ScriptParseError("cannot open mock script " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_script_text(ss.str(), options);
}

std::shared_ptr<MockBackend> MockBackend::from_script_text(std::string_view text, MockOptions options) {
    auto mock = std::make_shared<MockBackend>(options);
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    std::set<std::pair<std::string, std::string>> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto where = "mock script line " + std::to_string(lineno) + ": ";
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ScriptParseError(where + "not a JSON object");
        if (!j.contains("fingerprint") || !j["fingerprint"].is_string()) {
            throw ScriptParseError(where + "missing string \"fingerprint\"");
        }
        if (!j.contains("kind") || !j["kind"].is_string()) throw ScriptParseError(where + "missing string \"kind\"");
        if (!j.contains("reply")) throw ScriptParseError(where + "missing \"reply\"");
        auto fp = j["fingerprint"].get<std::string>();
        auto kind = j["kind"].get<std::string>();
        if (!seen.insert({fp, kind}).second) throw ScriptParseError(where + "duplicate fingerprint " + fp);
        const Json& reply = j["reply"];
        if (kind == "chat") {
            if (!reply.is_string()) throw ScriptParseError(where + "chat reply must be a string");
            mock->add_chat(fp, reply.get<std::string>());
        } else if (kind == "score") {
            ScoreResponse r;
            const Json* lps = &reply;
            if (reply.is_object()) {
                if (!reply.contains("token_logprobs")) throw ScriptParseError(where + "score reply lacks token_logprobs");
                lps = &reply["token_logprobs"];
                if (reply.contains("token_texts")) {
                    for (const auto& t : reply["token_texts"]) {
                        if (!t.is_string()) throw ScriptParseError(where + "token_texts must be strings");
                        r.token_texts.push_back(t.get<std::string>());
                    }
                }
            }
            if (!lps->is_array()) throw ScriptParseError(where + "score reply must list log-probs");
            for (const auto& v : *lps) {
                if (!v.is_number() || v.get<double>() > 0) throw ScriptParseError(where + "log-probs must be numbers <= 0");
                r.token_logprobs.push_back(v.get<double>());
            }
            if (r.token_texts.empty()) r.token_texts.assign(r.token_logprobs.size(), "");
            if (r.token_texts.size() != r.token_logprobs.size()) {
                throw ScriptParseError(where + "token_texts and token_logprobs differ in length");
            }
            mock->add_score(fp, std::move(r));
        } else {
            throw ScriptParseError(where + "kind must be chat or score");
        }
    }
    return mock;
}

void MockBackend::add_chat(const std::string& fp, std::string reply) {
    std::lock_guard lock(mu_);
    chat_table_[fp] = std::move(reply);
}

void MockBackend::add_score(const std::string& fp, ScoreResponse reply) {
    std::lock_guard lock(mu_);
    score_table_[fp] = std::move(reply);
    has_scores_ = true;
}

void MockBackend::push_chat_reply(std::string reply) {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(reply));
}

void MockBackend::set_responder(Responder responder) {
    std::lock_guard lock(mu_);
    responder_ = std::move(responder);
}

std::string MockBackend::chat(const ChatRequest& req) {
    check_request(req);
    auto fp = fingerprint(req);
    Responder responder;
    {
        std::lock_guard lock(mu_);
        ++chat_calls_;
        ++by_task_[req.meta.is_object() ? req.meta.value("task", std::string{}) : std::string{}];
        if (auto it = chat_table_.find(fp); it != chat_table_.end()) return it->second;
        if (!queue_.empty()) {
            auto reply = std::move(queue_.front());
            queue_.pop_front();
            return reply;
        }
        responder = responder_;
    }
    switch (options_.chat) {
        case ChatFallthrough::Strict:
            break;
        case ChatFallthrough::Echo:
            return "Echo: " + req.messages.back().text;
        case ChatFallthrough::Simulate: {
            auto reply = responder ? responder(req) : simulate_reply(req);
            if (reply) return *reply;
            break;
        }
    }
    throw Refusal("mock has no reply for fingerprint " + fp);
}

namespace {

std::size_t distinct_called_apis(const std::string& text) {
    std::set<std::string> names;
    std::istringstream in(text);
    std::string line;
    const std::string marker = "Assistant: [";
    while (std::getline(in, line)) {
        auto pos = line.find(marker);
        if (pos != 0) continue;
        try {
            for (const auto& c : parse_call_string(line.substr(marker.size() - 1))) names.insert(c.api_name);
        } catch (const SyntaxError&) {
        }
    }
    return names.size();
}

}  // namespace

ScoreResponse MockBackend::score(const ScoreRequest& req) {
    check_request(req);
    auto fp = fingerprint(req);
    {
        std::lock_guard lock(mu_);
        ++score_calls_;
        if (auto it = score_table_.find(fp); it != score_table_.end()) return it->second;
    }
    ScoreResponse r;
    r.token_texts = mock_tokenize(req.target);
    const std::size_t n = r.token_texts.size();
    switch (options_.score) {
        case ScoreFallthrough::Unsupported:
            throw ScoringUnsupported("mock configured without scoring");
        case ScoreFallthrough::Uniform:
            r.token_logprobs.assign(n, std::log(options_.uniform_p));
            break;
        case ScoreFallthrough::Stochastic: {
            std::uint64_t h = fnv1a(req.prompt + "\x1f" + req.target, mix_seed(options_.seed, 17));
            Rng rng(h);
            double level = 0.1 + 1.8 * rng.unit();
            for (std::size_t i = 0; i < n; ++i) r.token_logprobs.push_back(-level * (0.75 + 0.5 * rng.unit()));
            break;
        }
        case ScoreFallthrough::ApiCount: {
            auto m = static_cast<double>(distinct_called_apis(req.prompt + req.target));
            r.token_logprobs.assign(n, -(options_.api_count_base + options_.api_count_step * m));
            break;
        }
    }
    return r;
}

std::size_t MockBackend::chat_calls() const {
    std::lock_guard lock(mu_);
    return chat_calls_;
}

std::size_t MockBackend::score_calls() const {
    std::lock_guard lock(mu_);
    return score_calls_;
}

std::map<std::string, std::size_t> MockBackend::chat_calls_by_task() const {
    std::lock_guard lock(mu_);
    return by_task_;
}

void MockBackend::reset_counts() {
    std::lock_guard lock(mu_);
    chat_calls_ = 0;
    score_calls_ = 0;
    by_task_.clear();
}

}  // namespace toolforge::llm
