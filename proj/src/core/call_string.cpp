#include "toolforge/call_string.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>

#include "toolforge/errors.hpp"

namespace toolforge {

SyntaxError::SyntaxError(std::size_t position, std::string expected)
    : Error("syntax error at offset " + std::to_string(position) + ": expected " + expected),
      position_(position),
      expected_(std::move(expected)) {}

const Value* FunctionCall::argument(const std::string& name) const {
    for (const auto& e : arguments) {
        if (e.key == name) return &e.value;
    }
    return nullptr;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) { return is_alpha(c) || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }
bool is_api_name_char(char c) { return is_ident_char(c) || c == '.' || c == ' '; }

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    std::vector<FunctionCall> calls() {
        std::vector<FunctionCall> out;
        skip_ws();
        expect('[', "'['");
        skip_ws();
        if (peek() == ']') {
            ++pos_;
        } else {
            while (true) {
                out.push_back(call());
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    skip_ws();
                    continue;
                }
                expect(']', "',' or ']'");
                break;
            }
        }
        finish();
        return out;
    }

    Value lone_value() {
        skip_ws();
        Value v = value(0);
        finish();
        return v;
    }

    Value prefix_value(std::size_t& consumed) {
        skip_ws();
        Value v = value(0);
        consumed = pos_;
        return v;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }

    [[noreturn]] void fail(std::string expected) const { throw SyntaxError(pos_, std::move(expected)); }

    void expect(char c, const char* what) {
        if (at_end() || s_[pos_] != c) fail(what);
        ++pos_;
    }

    void skip_ws() {
        while (!at_end() && is_space(s_[pos_])) ++pos_;
    }

    void finish() {
        skip_ws();
        if (!at_end()) fail("end of input");
    }

    FunctionCall call() {
        FunctionCall fc;
        if (at_end() || !(is_ident_start(peek()) || is_digit(peek()))) fail("API name");
        std::size_t start = pos_;
        while (!at_end() && is_api_name_char(s_[pos_])) ++pos_;
        std::size_t end = pos_;
        while (end > start && s_[end - 1] == ' ') --end;
        fc.api_name.assign(s_.substr(start, end - start));
        skip_ws();
        expect('(', "'('");
        skip_ws();
        if (peek() == ')') {
            ++pos_;
            return fc;
        }
        while (true) {
            std::size_t name_pos = pos_;
            std::string name = identifier();
            if (fc.argument(name) != nullptr) {
                pos_ = name_pos;
                fail("unique argument name");
            }
            skip_ws();
            expect('=', "'='");
            skip_ws();
            Value v = value(1);
            fc.arguments.push_back({std::move(name), std::move(v)});
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                skip_ws();
                continue;
            }
            expect(')', "',' or ')'");
            break;
        }
        return fc;
    }

    std::string identifier() {
        if (at_end() || !is_ident_start(s_[pos_])) fail("argument name");
        std::size_t start = pos_;
        while (!at_end() && is_ident_char(s_[pos_])) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    Value value(int depth) {
        if (depth > kMaxCallNesting) fail("shallower nesting");
        char c = peek();
        if (c == '"' || c == '\'') return Value(string_literal());
        if (c == '[') return list(depth);
        if (c == '{') return map(depth);
        if (c == '-' || c == '+' || c == '.' || is_digit(c)) return number();
        if (is_alpha(c)) return keyword();
        fail("value");
    }

    Value list(int depth) {
        ++pos_;
        ValueList out;
        skip_ws();
        if (peek() == ']') {
            ++pos_;
            return Value(std::move(out));
        }
        while (true) {
            out.push_back(value(depth + 1));
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                skip_ws();
                continue;
            }
            expect(']', "',' or ']'");
            return Value(std::move(out));
        }
    }

    Value map(int depth) {
        ++pos_;
        ValueMap out;
        skip_ws();
        if (peek() == '}') {
            ++pos_;
            return Value(std::move(out));
        }
        while (true) {
            if (peek() != '"' && peek() != '\'') fail("quoted map key");
            std::size_t key_pos = pos_;
            std::string key = string_literal();
            for (const auto& e : out) {
                if (e.key == key) {
                    pos_ = key_pos;
                    fail("unique map key");
                }
            }
            skip_ws();
            expect(':', "':'");
            skip_ws();
            Value v = value(depth + 1);
            out.push_back({std::move(key), std::move(v)});
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                skip_ws();
                continue;
            }
            expect('}', "',' or '}'");
            return Value(std::move(out));
        }
    }

    std::uint32_t hex4() {
        if (pos_ + 4 > s_.size()) fail("four hex digits");
        std::uint32_t cp = 0;
        for (int i = 0; i < 4; ++i) {
            char h = s_[pos_++];
            cp <<= 4;
            if (h >= '0' && h <= '9') cp |= static_cast<std::uint32_t>(h - '0');
            else if (h >= 'a' && h <= 'f') cp |= static_cast<std::uint32_t>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F') cp |= static_cast<std::uint32_t>(h - 'A' + 10);
            else {
                --pos_;
                fail("hex digit");
            }
        }
        return cp;
    }

    std::string string_literal() {
        const char quote = s_[pos_++];
        std::string out;
        while (true) {
            if (at_end()) fail(std::string("closing ") + quote);
            char c = s_[pos_++];
            if (c == quote) return out;
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (at_end()) fail("escape character");
            char e = s_[pos_++];
            switch (e) {
                case '\\': out.push_back('\\'); break;
                case '"': out.push_back('"'); break;
                case '\'': out.push_back('\''); break;
                case '/': out.push_back('/'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case 'b': out.push_back('\b'); break;
                case 'f': out.push_back('\f'); break;
                case 'u': {
                    std::uint32_t cp = hex4();
                    if (cp >= 0xD800 && cp <= 0xDBFF && pos_ + 1 < s_.size() && s_[pos_] == '\\' &&
                        s_[pos_ + 1] == 'u') {
                        std::size_t save = pos_;
                        pos_ += 2;
                        std::uint32_t lo = hex4();
                        if (lo >= 0xDC00 && lo <= 0xDFFF) {
                            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
                        } else {
                            pos_ = save;
                        }
                    }
                    append_utf8(out, cp);
                    break;
                }
                default:
                    // Python keeps unknown escapes verbatim ("\d" stays backslash-d).
                    out.push_back('\\');
                    out.push_back(e);
                    break;
            }
        }
    }

    Value number() {
        std::size_t start = pos_;
        bool negative = false;
        if (peek() == '+' || peek() == '-') {
            negative = peek() == '-';
            ++pos_;
        }
        if (is_alpha(peek())) {
            std::size_t word = pos_;
            while (!at_end() && is_alpha(s_[pos_])) ++pos_;
            if (s_.substr(word, pos_ - word) == "inf") {
                return Value(negative ? -HUGE_VAL : HUGE_VAL);
            }
            pos_ = word;
            fail("number");
        }
        std::size_t digits = 0;
        bool is_float = false;
        while (is_digit(peek())) ++pos_, ++digits;
        if (peek() == '.') {
            is_float = true;
            ++pos_;
            while (is_digit(peek())) ++pos_, ++digits;
        }
        if (digits == 0) fail("digit");
        if (peek() == 'e' || peek() == 'E') {
            is_float = true;
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (!is_digit(peek())) fail("exponent digits");
            while (is_digit(peek())) ++pos_;
        }
        std::size_t body = start;
        if (s_[body] == '+') ++body;
        const char* first = s_.data() + body;
        const char* last = s_.data() + pos_;
        if (is_float) {
            double d = 0;
            auto [ptr, ec] = std::from_chars(first, last, d);
            if (ec == std::errc::result_out_of_range) {
                // from_chars reports overflow/underflow; follow strtod semantics.
                d = std::strtod(std::string(first, last).c_str(), nullptr);
            } else if (ec != std::errc() || ptr != last) {
                pos_ = start;
                fail("number");
            }
            return Value(d);
        }
        std::int64_t i = 0;
        auto [ptr, ec] = std::from_chars(first, last, i);
        if (ec != std::errc() || ptr != last) {
            pos_ = start;
            fail("integer within 64-bit range");
        }
        return Value(i);
    }

    Value keyword() {
        std::size_t start = pos_;
        while (!at_end() && is_ident_char(s_[pos_])) ++pos_;
        auto word = s_.substr(start, pos_ - start);
        if (word == "true" || word == "True") return Value(true);
        if (word == "false" || word == "False") return Value(false);
        if (word == "nan") return Value(std::nan(""));
        if (word == "inf") return Value(HUGE_VAL);
        pos_ = start;
        fail("value");
    }
};

void render_string(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    static const char* hex = "0123456789abcdef";
                    out += "\\u00";
                    out.push_back(hex[(c >> 4) & 0xF]);
                    out.push_back(hex[c & 0xF]);
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

void render_float(std::string& out, double d) {
    if (std::isnan(d)) {
        out += "nan";
        return;
    }
    if (std::isinf(d)) {
        out += d < 0 ? "-inf" : "inf";
        return;
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string_view text(buf, static_cast<std::size_t>(ptr - buf));
    out += text;
    if (text.find_first_of(".eE") == std::string_view::npos) out += ".0";
}

void render_into(std::string& out, const Value& v) {
    std::visit(
        [&out](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) {
                render_string(out, x);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                out += std::to_string(x);
            } else if constexpr (std::is_same_v<T, double>) {
                render_float(out, x);
            } else if constexpr (std::is_same_v<T, bool>) {
                out += x ? "true" : "false";
            } else if constexpr (std::is_same_v<T, ValueList>) {
                out.push_back('[');
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (i) out += ", ";
                    render_into(out, x[i]);
                }
                out.push_back(']');
            } else {
                out.push_back('{');
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (i) out += ", ";
                    render_string(out, x[i].key);
                    out += ": ";
                    render_into(out, x[i].value);
                }
                out.push_back('}');
            }
        },
        v.storage());
}

}  // namespace

std::vector<FunctionCall> parse_call_string(std::string_view text) { return Parser(text).calls(); }

Value parse_value_literal(std::string_view text) { return Parser(text).lone_value(); }

Value parse_value_prefix(std::string_view text, std::size_t& consumed) { return Parser(text).prefix_value(consumed); }

std::string render_value(const Value& v) {
    std::string out;
    render_into(out, v);
    return out;
}

std::string render_call_string(const std::vector<FunctionCall>& calls) {
    std::string out = "[";
    for (std::size_t i = 0; i < calls.size(); ++i) {
        if (i) out += ", ";
        out += calls[i].api_name;
        out.push_back('(');
        for (std::size_t j = 0; j < calls[i].arguments.size(); ++j) {
            if (j) out += ", ";
            out += calls[i].arguments[j].key;
            out.push_back('=');
            render_into(out, calls[i].arguments[j].value);
        }
        out.push_back(')');
    }
    out.push_back(']');
    return out;
}

}  // namespace toolforge
