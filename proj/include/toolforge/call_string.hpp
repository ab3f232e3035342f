#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "toolforge/value.hpp"

namespace toolforge {

/// One parsed invocation: API name plus ordered named arguments.
struct FunctionCall {
    std::string api_name;
    ValueMap arguments;

    const Value* argument(const std::string& name) const;
    bool operator==(const FunctionCall&) const = default;
};

/// Parses a bracketed call list such as
///   [get_weather_data(coordinates=[45.4215, -75.6972]), calc(n=10, k=5.0)]
///
/// Values follow a Python-literal-like grammar: single- or double-quoted
/// strings, signed ints and floats, true/false (True/False), bracketed lists
/// and braced maps with quoted keys. API names may contain letters, digits,
/// '_', '.' and inner spaces ("Get Live Events Count by Sport").
///
/// Throws SyntaxError with the byte offset and the expected token. Never
/// crashes on arbitrary input; nesting deeper than kMaxCallNesting is
/// reported as a SyntaxError.
std::vector<FunctionCall> parse_call_string(std::string_view text);

/// Parses a single literal value with the call-string value grammar.
Value parse_value_literal(std::string_view text);
/// Parses one literal at the start of `text` (after optional whitespace) and
/// reports how many bytes it consumed; trailing text is left alone.
Value parse_value_prefix(std::string_view text, std::size_t& consumed);

/// Canonical rendering: double-quoted strings, ", " separators, floats in
/// shortest round-trip form that always keeps a decimal point or exponent.
std::string render_call_string(const std::vector<FunctionCall>& calls);
std::string render_value(const Value& v);

inline constexpr int kMaxCallNesting = 256;

}  // namespace toolforge
