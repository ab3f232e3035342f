#include "toolforge/llm/structured.hpp"

#include <string>

namespace toolforge::llm {

namespace {

std::optional<Json> parse_object(std::string_view text) {
    Json j = Json::parse(text.begin(), text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
}

// End of the balanced object starting at `open`, honouring JSON strings.
std::size_t balanced_end(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i + 1;
    }
    return std::string_view::npos;
}

}  // namespace

std::optional<Json> extract_json_object(std::string_view reply) {
    auto fence = reply.find("```json");
    if (fence != std::string_view::npos) {
        auto body = fence + 7;
        auto close = reply.find("```", body);
        if (close != std::string_view::npos) {
            if (auto j = parse_object(reply.substr(body, close - body))) return j;
        }
    }
    for (std::size_t open = reply.find('{'); open != std::string_view::npos; open = reply.find('{', open + 1)) {
        auto end = balanced_end(reply, open);
        if (end == std::string_view::npos) continue;
        if (auto j = parse_object(reply.substr(open, end - open))) return j;
    }
    return std::nullopt;
}

std::string fenced_json(const Json& j) { return "```json\n" + j.dump() + "\n```"; }

}  // namespace toolforge::llm
