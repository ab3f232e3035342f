#include "toolforge/llm/openai_backend.hpp"

#include <cstdlib>
#include <thread>

#include "httplib.h"

namespace toolforge::llm {

OpenAIBackend::OpenAIBackend(OpenAIOptions options, Sleeper sleep)
    : options_(std::move(options)), sleep_(std::move(sleep)) {
    if (options_.api_key.empty()) {
        if (const char* env = std::getenv("TOOLFORGE_API_KEY")) options_.api_key = env;
    }
    if (options_.api_key.empty()) throw ConfigError("TOOLFORGE_API_KEY is not set");
    auto scheme = options_.base_url.find("://");
    if (scheme == std::string::npos) throw ConfigError("base_url needs a scheme: " + options_.base_url);
    auto slash = options_.base_url.find('/', scheme + 3);
    origin_ = options_.base_url.substr(0, slash);
    if (slash != std::string::npos) {
        prefix_ = options_.base_url.substr(slash);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
    if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

Json OpenAIBackend::chat_payload(const ChatRequest& req, const std::string& model) {
    Json messages = Json::array();
    for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.text}});
    Json body = {{"model", model},
                 {"messages", messages},
                 {"temperature", req.sampling.temperature},
                 {"top_p", req.sampling.top_p},
                 {"max_tokens", req.sampling.max_tokens}};
    if (req.sampling.seed) body["seed"] = *req.sampling.seed;
    return body;
}

Json OpenAIBackend::post(const std::string& path, const Json& body) const {
    httplib::Client client(origin_);
    auto secs = options_.timeout.count();
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    httplib::Headers headers = {{"Authorization", "Bearer " + options_.api_key}};
    auto res = client.Post(prefix_ + path, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request to " + origin_ + prefix_ + path + " failed: " + httplib::to_string(res.error()));
    if (res->status == 429) throw RateLimited("rate limited by " + origin_);
    if (res->status >= 500) throw TransportError("server error " + std::to_string(res->status));
    if (res->status == 404 && path == "/v1/completions") throw ScoringUnsupported("completions endpoint not available");
    if (res->status != 200) {
        throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    Json j = Json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw TransportError("malformed response body");
    return j;
}

std::string OpenAIBackend::chat(const ChatRequest& req) {
    check_request(req);
    Json body = chat_payload(req, options_.chat_model);
    Json j = with_retries(options_.retry, [&] { return post("/v1/chat/completions", body); }, sleep_);
    const Json* choice = nullptr;
    if (auto it = j.find("choices"); it != j.end() && it->is_array() && !it->empty()) choice = &(*it)[0];
    if (choice == nullptr) throw Refusal("completion has no choices");
    if (choice->value("finish_reason", std::string{}) == "content_filter") throw Refusal("completion was filtered");
    std::string content;
    if (auto m = choice->find("message"); m != choice->end() && m->is_object()) {
        if (auto c = m->find("content"); c != m->end() && c->is_string()) content = c->get<std::string>();
    }
    if (content.empty()) throw Refusal("completion is empty");
    return content;
}

ScoreResponse OpenAIBackend::score(const ScoreRequest& req) {
    check_request(req);
    if (!supports_scoring()) throw ScoringUnsupported("no score_model configured");
    Json body = {{"model", options_.score_model},
                 {"prompt", req.prompt + req.target},
                 {"max_tokens", 0},
                 {"echo", true},
                 {"logprobs", 1},
                 {"temperature", 0.0}};
    Json j = with_retries(options_.retry, [&] { return post("/v1/completions", body); }, sleep_);
    const Json* lp = nullptr;
    if (auto it = j.find("choices"); it != j.end() && it->is_array() && !it->empty()) {
        if (auto l = (*it)[0].find("logprobs"); l != (*it)[0].end() && l->is_object()) lp = &*l;
    }
    if (lp == nullptr || !lp->contains("token_logprobs") || !lp->contains("text_offset")) {
        throw ScoringUnsupported("provider returned no log-probabilities");
    }
    const Json& values = (*lp)["token_logprobs"];
    const Json& offsets = (*lp)["text_offset"];
    const Json tokens = lp->value("tokens", Json::array());
    ScoreResponse out;
    for (std::size_t i = 0; i < values.size() && i < offsets.size(); ++i) {
        if (offsets[i].get<std::size_t>() < req.prompt.size()) continue;
        if (values[i].is_null()) {
            if (i == 0) continue;
            throw ScoringUnsupported("provider omitted a log-probability");
        }
        out.token_logprobs.push_back(values[i].get<double>());
        out.token_texts.push_back(i < tokens.size() && tokens[i].is_string() ? tokens[i].get<std::string>() : "");
    }
    return out;
}

}  // namespace toolforge::llm
