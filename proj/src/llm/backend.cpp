#include "toolforge/llm/backend.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "toolforge/util.hpp"

namespace toolforge::llm {

void check_request(const ChatRequest& req) {
    if (req.messages.empty()) throw ContractError("chat request needs at least one message");
    if (req.sampling.temperature < 0) throw ContractError("temperature must be >= 0");
}

void check_request(const ScoreRequest& req) {
    if (req.target.empty()) throw ContractError("score request target must be nonempty");
}

std::string fingerprint(const ChatRequest& req) {
    std::string buf;
    for (const auto& m : req.messages) {
        buf += m.role;
        buf += ':';
        buf += m.text;
        buf += '\x1e';
    }
    buf += "seed:";
    buf += req.sampling.seed ? std::to_string(*req.sampling.seed) : std::string("-");
    return hex64(fnv1a(buf));
}

std::string fingerprint(const ScoreRequest& req) {
    return hex64(fnv1a("score\x1e" + req.prompt + "\x1f" + req.target));
}

ScoreResponse LlmBackend::score(const ScoreRequest&) {
    throw ScoringUnsupported("backend does not provide token log-probabilities");
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
    double ms = static_cast<double>(policy.base_delay.count());
    for (int i = 1; i < attempt; ++i) ms *= policy.multiplier;
    ms = std::min(ms, static_cast<double>(policy.max_delay.count()));
    return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

namespace {

class LimitedBackend final : public LlmBackend {
public:
    LimitedBackend(BackendPtr inner, std::size_t max_in_flight, std::size_t per_minute)
        : inner_(std::move(inner)), max_in_flight_(std::max<std::size_t>(1, max_in_flight)), per_minute_(per_minute) {}

    std::string chat(const ChatRequest& req) override {
        Slot slot(*this);
        return inner_->chat(req);
    }

    ScoreResponse score(const ScoreRequest& req) override {
        Slot slot(*this);
        return inner_->score(req);
    }

    bool supports_scoring() const override { return inner_->supports_scoring(); }

private:
    using Clock = std::chrono::steady_clock;

    struct Slot {
        explicit Slot(LimitedBackend& b) : owner(b) { owner.acquire(); }
        ~Slot() { owner.release(); }
        LimitedBackend& owner;
    };

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
        ++in_flight_;
        if (per_minute_ == 0) return;
        while (true) {
            auto now = Clock::now();
            while (!window_.empty() && now - window_.front() >= std::chrono::minutes(1)) window_.pop_front();
            if (window_.size() < per_minute_) {
                window_.push_back(now);
                return;
            }
            auto wake = window_.front() + std::chrono::minutes(1);
            lock.unlock();
            std::this_thread::sleep_until(wake);
            lock.lock();
        }
    }

    void release() {
        {
            std::lock_guard lock(mu_);
            --in_flight_;
        }
        cv_.notify_one();
    }

    BackendPtr inner_;
    std::size_t max_in_flight_;
    std::size_t per_minute_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t in_flight_ = 0;
    std::deque<Clock::time_point> window_;
};

}  // namespace

BackendPtr make_limited(BackendPtr inner, std::size_t max_in_flight, std::size_t per_minute) {
    return std::make_shared<LimitedBackend>(std::move(inner), max_in_flight, per_minute);
}

}  // namespace toolforge::llm
