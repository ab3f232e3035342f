#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "toolforge/errors.hpp"
#include "toolforge/value.hpp"

namespace toolforge::llm {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string text;
};

struct Sampling {
    double temperature = 0.7;
    double top_p = 1.0;
    int max_tokens = 1024;
    std::optional<std::uint64_t> seed;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    Sampling sampling;
    std::optional<std::string> structured_hint;  // JSON schema text of the expected reply
    /// Structured request context ({"task": ..., ...}). Never transmitted to
    /// remote providers; the simulated mock reads it.
    Json meta = Json::object();
};

struct ScoreRequest {
    std::string prompt;
    std::string target;
};

struct ScoreResponse {
    std::vector<double> token_logprobs;  // each <= 0
    std::vector<std::string> token_texts;
};

/// Throws ContractError when messages are empty or temperature < 0.
void check_request(const ChatRequest& req);
/// Throws ContractError when the target is empty.
void check_request(const ScoreRequest& req);

/// Request fingerprint used to key scripted replies:
///   FNV-1a-64 over, for each message, role + ":" + text + "\x1e", followed
///   by "seed:" + decimal seed (or "seed:-" when unset); 16 lowercase hex digits.
std::string fingerprint(const ChatRequest& req);
/// FNV-1a-64 over "score\x1e" + prompt + "\x1f" + target.
std::string fingerprint(const ScoreRequest& req);

/// Chat generation plus optional per-token log-probability scoring.
/// Implementations must tolerate concurrent callers.
class LlmBackend {
public:
    virtual ~LlmBackend() = default;

    virtual std::string chat(const ChatRequest& req) = 0;
    /// Default: the backend cannot score.
    virtual ScoreResponse score(const ScoreRequest& req);
    virtual bool supports_scoring() const { return false; }
};

using BackendPtr = std::shared_ptr<LlmBackend>;

struct RetryPolicy {
    int max_attempts = 4;  // total attempts, including the first
    std::chrono::milliseconds base_delay{250};
    double multiplier = 2.0;
    std::chrono::milliseconds max_delay{8000};
};

/// Delay before retry number `attempt` (1-based) under `policy`.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt);

/// Calls `fn` until it succeeds or `policy.max_attempts` is reached. Only
/// TransportError and RateLimited are retried; the last one is rethrown.
template <typename F>
auto with_retries(const RetryPolicy& policy, F&& fn,
                  const std::function<void(std::chrono::milliseconds)>& sleep) -> decltype(fn()) {
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const TransportError&) {
            if (attempt >= policy.max_attempts) throw;
        } catch (const RateLimited&) {
            if (attempt >= policy.max_attempts) throw;
        }
        sleep(backoff_delay(policy, attempt));
    }
}

/// Wraps a backend with a max-in-flight limit and a per-minute request budget.
BackendPtr make_limited(BackendPtr inner, std::size_t max_in_flight, std::size_t per_minute);

}  // namespace toolforge::llm
