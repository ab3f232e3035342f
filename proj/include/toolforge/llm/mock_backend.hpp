#pragma once

#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "toolforge/llm/backend.hpp"

namespace toolforge::llm {

/// What the mock does with a chat request whose fingerprint is not scripted.
enum class ChatFallthrough {
    Strict,    // Refusal
    Echo,      // "Echo: <last message text>"
    Simulate,  // deterministic task-aware simulator (see simulator.hpp)
};

/// What the mock does with a score request whose fingerprint is not scripted.
enum class ScoreFallthrough {
    Unsupported,  // the mock advertises no scoring capability
    Uniform,      // every token gets ln(uniform_p)
    Stochastic,   // seeded pseudo-random log-probs keyed on (prompt, target)
    ApiCount,     // per-token loss grows with the distinct APIs called in the text
};

struct MockOptions {
    ChatFallthrough chat = ChatFallthrough::Strict;
    ScoreFallthrough score = ScoreFallthrough::Uniform;
    double uniform_p = 0.5;
    std::uint64_t seed = 0;
    // ApiCount mode: loss/token = api_count_base + api_count_step * distinct APIs.
    double api_count_base = 0.2;
    double api_count_step = 0.3;
};

ChatFallthrough chat_fallthrough_from_name(std::string_view name);
ScoreFallthrough score_fallthrough_from_name(std::string_view name);

/// Splits text into whitespace-delimited tokens whose concatenation is the text.
std::vector<std::string> mock_tokenize(std::string_view text);

/// Table-driven backend for offline runs and tests.
///
/// Script format: JSON lines of {"fingerprint": hex, "kind": "chat"|"score", "reply": ...}
/// where a chat reply is a string and a score reply is either a list of
/// log-probs or {"token_logprobs": [...], "token_texts": [...]}.
class MockBackend final : public LlmBackend {
public:
    using Responder = std::function<std::optional<std::string>(const ChatRequest&)>;

    explicit MockBackend(MockOptions options = {});

    /// Throws ScriptParseError on malformed lines or duplicate fingerprints.
    static std::shared_ptr<MockBackend> from_script(const std::filesystem::path& path, MockOptions options = {});
    static std::shared_ptr<MockBackend> from_script_text(std::string_view text, MockOptions options = {});

    void add_chat(const std::string& fingerprint, std::string reply);
    void add_score(const std::string& fingerprint, ScoreResponse reply);
    /// Replies consumed in FIFO order for unscripted chat requests, before the fallthrough.
    void push_chat_reply(std::string reply);
    /// Overrides the Simulate fallthrough.
    void set_responder(Responder responder);

    std::string chat(const ChatRequest& req) override;
    ScoreResponse score(const ScoreRequest& req) override;
    bool supports_scoring() const override { return options_.score != ScoreFallthrough::Unsupported || has_scores_; }

    std::size_t chat_calls() const;
    std::size_t score_calls() const;
    /// Chat call count per meta "task" tag ("" when untagged).
    std::map<std::string, std::size_t> chat_calls_by_task() const;
    void reset_counts();

    const MockOptions& options() const { return options_; }

private:
    MockOptions options_;
    mutable std::mutex mu_;
    std::map<std::string, std::string> chat_table_;
    std::map<std::string, ScoreResponse> score_table_;
    std::deque<std::string> queue_;
    Responder responder_;
    bool has_scores_ = false;
    std::size_t chat_calls_ = 0;
    std::size_t score_calls_ = 0;
    std::map<std::string, std::size_t> by_task_;
};

}  // namespace toolforge::llm
