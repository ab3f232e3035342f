#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "oracles.hpp"
#include "toolforge/llm/mock_backend.hpp"
#include "toolforge/llm/openai_backend.hpp"
#include "toolforge/llm/structured.hpp"
#include "toolforge/util.hpp"

using namespace toolforge;
using namespace toolforge::llm;

namespace {

ChatRequest ask(const std::string& text, std::optional<std::uint64_t> seed = std::nullopt) {
    ChatRequest r;
    r.messages = {{"system", "You are terse."}, {"user", text}};
    r.sampling.seed = seed;
    return r;
}

// Local OpenAI-compatible stub on an ephemeral port.
class StubServer {
public:
    StubServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

OpenAIOptions local(const StubServer& s) {
    OpenAIOptions o;
    o.base_url = s.url();
    o.api_key = "test-key";
    o.score_model = "scorer";
    o.timeout = std::chrono::seconds(5);
    o.retry.max_attempts = 3;
    return o;
}

const OpenAIBackend::Sleeper kNoSleep = [](std::chrono::milliseconds) {};

}  // namespace

TEST_SUITE("llm") {

TEST_CASE("fingerprint follows the documented FNV-1a layout") {
    auto req = ask("hi", 7);
    std::string material = "system:You are terse.\x1euser:hi\x1eseed:7";
    CHECK(fingerprint(req) == hex64(fnv1a(material)));
    req.sampling.seed.reset();
    CHECK(fingerprint(req) == hex64(fnv1a("system:You are terse.\x1euser:hi\x1eseed:-")));
    req.meta = Json{{"task", "anything"}};
    CHECK(fingerprint(req) == hex64(fnv1a("system:You are terse.\x1euser:hi\x1eseed:-")));
    CHECK(fingerprint(ScoreRequest{"p", "t"}) == hex64(fnv1a("score\x1ep\x1ft")));
}

TEST_CASE("manual FNV-1a matches the published test vector") {
    CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
    CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
}

TEST_CASE("scripted replies are looked up by fingerprint") {
    auto req = ask("hello", 1);
    std::string script = Json{{"fingerprint", fingerprint(req)}, {"kind", "chat"}, {"reply", "scripted"}}.dump() + "\n" +
                         Json{{"fingerprint", fingerprint(ScoreRequest{"p", "a b"})}, {"kind", "score"},
                              {"reply", Json::array({-0.5, -1.5})}}.dump() + "\n";
    auto mock = MockBackend::from_script_text(script);
    CHECK(mock->chat(req) == "scripted");
    CHECK_THROWS_AS(mock->chat(ask("other", 1)), Refusal);
    auto s = mock->score({"p", "a b"});
    CHECK(s.token_logprobs == std::vector<double>{-0.5, -1.5});
    CHECK(mock->chat_calls() == 2);
}

TEST_CASE("malformed scripts are rejected with line numbers") {
    CHECK_THROWS_AS(MockBackend::from_script_text("not json"), ScriptParseError);
    CHECK_THROWS_AS(MockBackend::from_script_text(R"({"kind": "chat", "reply": "x"})"), ScriptParseError);
    CHECK_THROWS_AS(MockBackend::from_script_text(R"({"fingerprint": "a", "kind": "poem", "reply": "x"})"),
                    ScriptParseError);
    CHECK_THROWS_AS(MockBackend::from_script_text(R"({"fingerprint": "a", "kind": "score", "reply": [0.5]})"),
                    ScriptParseError);
    try {
        MockBackend::from_script_text("{\"fingerprint\": \"a\", \"kind\": \"chat\", \"reply\": \"x\"}\n"
                                      "{\"fingerprint\": \"a\", \"kind\": \"chat\", \"reply\": \"y\"}\n");
        FAIL("duplicate accepted");
    } catch (const ScriptParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("fallthrough modes") {
    MockBackend echo({ChatFallthrough::Echo});
    CHECK(echo.chat(ask("ping")) == "Echo: ping");
    MockBackend queued;
    queued.push_chat_reply("first");
    CHECK(queued.chat(ask("x")) == "first");
    CHECK_THROWS_AS(queued.chat(ask("x")), Refusal);
    MockBackend none({ChatFallthrough::Strict, ScoreFallthrough::Unsupported});
    CHECK_FALSE(none.supports_scoring());
    CHECK_THROWS_AS(none.score({"p", "t"}), ScoringUnsupported);
}

TEST_CASE("uniform scoring assigns ln p per token") {
    MockBackend m;
    auto r = m.score({"prompt", "one two three"});
    REQUIRE(r.token_logprobs.size() == 3);
    for (double lp : r.token_logprobs) CHECK(lp == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    std::string joined;
    for (const auto& t : r.token_texts) joined += t;
    CHECK(joined == "one two three");
}

TEST_CASE("stochastic scoring is deterministic per input") {
    MockBackend a({ChatFallthrough::Strict, ScoreFallthrough::Stochastic, 0.5, 3});
    MockBackend b({ChatFallthrough::Strict, ScoreFallthrough::Stochastic, 0.5, 3});
    CHECK(a.score({"p", "x y z"}).token_logprobs == b.score({"p", "x y z"}).token_logprobs);
    CHECK(a.score({"p", "x y z"}).token_logprobs != a.score({"q", "x y z"}).token_logprobs);
    for (double lp : a.score({"p", "x y z"}).token_logprobs) CHECK(lp < 0);
}

TEST_CASE("request contracts") {
    MockBackend m({ChatFallthrough::Echo});
    CHECK_THROWS_AS(m.chat(ChatRequest{}), ContractError);
    auto r = ask("x");
    r.sampling.temperature = -1;
    CHECK_THROWS_AS(m.chat(r), ContractError);
    CHECK_THROWS_AS(m.score({"p", ""}), ContractError);
}

TEST_CASE("structured block extraction") {
    CHECK(extract_json_object("noise ```json\n{\"a\": 1}\n``` tail")->at("a") == 1);
    CHECK(extract_json_object("I think {\"a\": \"}\"} is right")->at("a") == "}");
    CHECK(extract_json_object("{broken {\"b\": 2}")->at("b") == 2);
    CHECK_FALSE(extract_json_object("no json here").has_value());
}

TEST_CASE("backoff grows geometrically and caps") {
    RetryPolicy p;
    CHECK(backoff_delay(p, 1).count() == 250);
    CHECK(backoff_delay(p, 2).count() == 500);
    CHECK(backoff_delay(p, 10).count() == 8000);
}

TEST_CASE("limited backend caps concurrency") {
    std::atomic<int> current{0}, peak{0};
    auto mock = std::make_shared<MockBackend>(MockOptions{ChatFallthrough::Simulate});
    mock->set_responder([&](const ChatRequest&) -> std::optional<std::string> {
        int now = ++current;
        int old = peak.load();
        while (now > old && !peak.compare_exchange_weak(old, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --current;
        return "ok";
    });
    auto limited = make_limited(mock, 2, 0);
    bounded_parallel_map<int>(16, 8, [&](std::size_t) {
        limited->chat(ask("x"));
        return 0;
    });
    CHECK(peak.load() <= 2);
    CHECK(peak.load() >= 1);
}

TEST_CASE("openai backend requires a key") {
    unsetenv("TOOLFORGE_API_KEY");
    CHECK_THROWS_AS(OpenAIBackend(OpenAIOptions{}), ConfigError);
    setenv("TOOLFORGE_API_KEY", "from-env", 1);
    CHECK_NOTHROW(OpenAIBackend(OpenAIOptions{}));
    unsetenv("TOOLFORGE_API_KEY");
}

TEST_CASE("chat payload carries messages and sampling but not meta") {
    auto req = ask("hi", 5);
    req.meta = Json{{"task", "secret"}};
    Json p = OpenAIBackend::chat_payload(req, "m");
    CHECK(p["model"] == "m");
    CHECK(p["messages"].size() == 2);
    CHECK(p["messages"][1]["content"] == "hi");
    CHECK(p["seed"] == 5);
    CHECK(p.dump().find("secret") == std::string::npos);
}

TEST_CASE("openai chat against a local stub") {
    StubServer stub;
    std::string seen_auth;
    Json seen_body;
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = Json::parse(req.body);
        res.set_content(R"({"choices": [{"message": {"role": "assistant", "content": "pong"}, "finish_reason": "stop"}]})",
                        "application/json");
    });
    OpenAIBackend b(local(stub), kNoSleep);
    CHECK(b.chat(ask("ping")) == "pong");
    CHECK(seen_auth == "Bearer test-key");
    CHECK(seen_body["messages"][1]["content"] == "ping");
}

TEST_CASE("openai error mapping and retries") {
    StubServer stub;
    std::atomic<int> calls{0};
    std::atomic<int> mode{0};
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        switch (mode.load()) {
            case 0: res.status = 503; break;
            case 1: res.status = 429; break;
            case 2: res.status = 400; res.set_content("{\"error\": \"bad\"}", "application/json"); break;
            case 3: res.set_content("not json", "text/plain"); break;
            default:
                res.set_content(R"({"choices": [{"message": {"content": ""}, "finish_reason": "content_filter"}]})",
                                "application/json");
        }
    });
    int sleeps = 0;
    OpenAIBackend b(local(stub), [&](std::chrono::milliseconds) { ++sleeps; });
    CHECK_THROWS_AS(b.chat(ask("x")), TransportError);
    CHECK(calls == 3);
    CHECK(sleeps == 2);
    mode = 1;
    calls = 0;
    CHECK_THROWS_AS(b.chat(ask("x")), RateLimited);
    CHECK(calls == 3);
    mode = 2;
    calls = 0;
    CHECK_THROWS_AS(b.chat(ask("x")), BackendError);
    CHECK(calls == 1);
    mode = 3;
    CHECK_THROWS_AS(b.chat(ask("x")), TransportError);
    mode = 4;
    CHECK_THROWS_AS(b.chat(ask("x")), Refusal);
}

TEST_CASE("transient failure then success") {
    StubServer stub;
    std::atomic<int> calls{0};
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 502;
            return;
        }
        res.set_content(R"({"choices": [{"message": {"content": "late"}}]})", "application/json");
    });
    OpenAIBackend b(local(stub), kNoSleep);
    CHECK(b.chat(ask("x")) == "late");
    CHECK(calls == 3);
}

TEST_CASE("openai scoring keeps only target tokens") {
    StubServer stub;
    Json seen;
    stub.server().Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = Json::parse(req.body);
        Json lp = {{"tokens", {"Q", ":", " A", " B"}},
                   {"token_logprobs", {nullptr, -0.1, -0.7, -0.2}},
                   {"text_offset", {0, 1, 2, 4}}};
        res.set_content(Json{{"choices", {{{"text", "Q: A B"}, {"logprobs", lp}}}}}.dump(), "application/json");
    });
    OpenAIBackend b(local(stub), kNoSleep);
    auto r = b.score({"Q:", " A B"});
    CHECK(r.token_logprobs == std::vector<double>{-0.7, -0.2});
    CHECK(r.token_texts == std::vector<std::string>{" A", " B"});
    CHECK(seen["echo"] == true);
    CHECK(seen["max_tokens"] == 0);
    CHECK(seen["prompt"] == "Q: A B");
}

TEST_CASE("scoring endpoint absent means scoring unsupported") {
    StubServer stub;
    OpenAIBackend b(local(stub), kNoSleep);
    CHECK_THROWS_AS(b.score({"Q:", " A"}), ScoringUnsupported);
    auto o = local(stub);
    o.score_model.clear();
    OpenAIBackend no_model(o, kNoSleep);
    CHECK_FALSE(no_model.supports_scoring());
    CHECK_THROWS_AS(no_model.score({"Q:", " A"}), ScoringUnsupported);
}

TEST_CASE("unreachable server is a transport error") {
    OpenAIOptions o;
    o.base_url = "http://127.0.0.1:1";
    o.api_key = "k";
    o.retry.max_attempts = 2;
    o.timeout = std::chrono::seconds(2);
    OpenAIBackend b(o, kNoSleep);
    CHECK_THROWS_AS(b.chat(ask("x")), TransportError);
}

}
