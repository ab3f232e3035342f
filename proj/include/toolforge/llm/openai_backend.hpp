#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "toolforge/llm/backend.hpp"

namespace toolforge::llm {

struct OpenAIOptions {
    std::string base_url = "https://api.openai.com";  // scheme://host[:port][/prefix]
    std::string chat_model = "gpt-4o-mini";
    std::string score_model;  // empty: scoring disabled
    std::string api_key;      // empty: read TOOLFORGE_API_KEY
    std::chrono::seconds timeout{60};
    RetryPolicy retry;
};

/// OpenAI-compatible HTTP backend.
///
/// chat  -> POST {prefix}/v1/chat/completions
/// score -> POST {prefix}/v1/completions with echo=true, logprobs=1,
///          max_tokens=0; the log-probs of tokens starting at or after the
///          prompt length are returned.
///
/// 429 maps to RateLimited, 5xx and connection failures to TransportError
/// (both retried), an empty or filtered completion to Refusal.
class OpenAIBackend final : public LlmBackend {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    /// Throws ConfigError when no API key is available.
    explicit OpenAIBackend(OpenAIOptions options, Sleeper sleep = {});

    std::string chat(const ChatRequest& req) override;
    ScoreResponse score(const ScoreRequest& req) override;
    bool supports_scoring() const override { return !options_.score_model.empty(); }

    static Json chat_payload(const ChatRequest& req, const std::string& model);

private:
    Json post(const std::string& path, const Json& body) const;

    OpenAIOptions options_;
    std::string origin_;
    std::string prefix_;
    Sleeper sleep_;
};

}  // namespace toolforge::llm
