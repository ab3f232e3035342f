#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <random>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace toolforge {

/// Seeded random source with portable draws (std distributions differ
/// between standard libraries; these helpers do not).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [0, n); n must be > 0.
    std::size_t below(std::size_t n);
    /// Uniform integer in [lo, hi].
    std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
    /// Uniform real in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
/// Mixes two 64-bit values (splitmix finaliser); used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
/// Lowercase alphanumeric word tokens.
std::vector<std::string> word_tokens(std::string_view s);

/// Decodes UTF-8 into code points; invalid bytes become U+FFFD and set *valid=false.
std::vector<char32_t> decode_utf8(std::string_view s, bool* valid = nullptr);

enum class Script { Latin, Cjk, Cyrillic, Greek, Arabic, Hebrew, Thai, Devanagari, Hangul, Other };
/// Script class of a letter; nullopt-like Other for non-letters is signalled by `is_letter`.
Script script_of(char32_t cp, bool* is_letter);

/// Runs fn(i) for i in [0, n) with at most `limit` in flight. Results keep
/// index order; the first exception (by index) is rethrown after all finish.
template <typename R>
std::vector<R> bounded_parallel_map(std::size_t n, std::size_t limit, const std::function<R(std::size_t)>& fn) {
    std::vector<R> out(n);
    if (n == 0) return out;
    limit = std::max<std::size_t>(1, std::min(limit, n));
    if (limit == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::counting_semaphore<> slots(static_cast<std::ptrdiff_t>(limit));
    std::vector<std::future<R>> futures;
    futures.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        slots.acquire();
        futures.push_back(std::async(std::launch::async, [&, i] {
            struct Release {
                std::counting_semaphore<>& s;
                ~Release() { s.release(); }
            } release{slots};
            return fn(i);
        }));
    }
    std::exception_ptr first;
    for (std::size_t i = 0; i < n; ++i) {
        try {
            out[i] = futures[i].get();
        } catch (...) {
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
    return out;
}

}  // namespace toolforge
