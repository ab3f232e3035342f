#pragma once

#include <optional>
#include <string_view>

#include "toolforge/value.hpp"

namespace toolforge::llm {

/// Finds the structured block in a model reply: the first ```json fenced
/// block if present, otherwise the first balanced {...} span that parses as
/// a JSON object.
std::optional<Json> extract_json_object(std::string_view reply);

/// Wraps a JSON object as a fenced block, the shape agents are asked to emit.
std::string fenced_json(const Json& j);

}  // namespace toolforge::llm
