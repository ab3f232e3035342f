#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace toolforge {

using Json = nlohmann::ordered_json;

class Value;
struct ValueEntry;

using ValueList = std::vector<Value>;
/// String-keyed map that keeps insertion order.
using ValueMap = std::vector<ValueEntry>;

/// Literal argument value of a function call: string, int, float, bool, list or map.
class Value {
public:
    using Storage = std::variant<std::string, std::int64_t, double, bool, ValueList, ValueMap>;

    Value() : data_(std::string{}) {}
    Value(std::string s) : data_(std::move(s)) {}
    Value(const char* s) : data_(std::string(s)) {}
    Value(std::int64_t i) : data_(i) {}
    Value(int i) : data_(static_cast<std::int64_t>(i)) {}
    Value(double d) : data_(d) {}
    Value(bool b) : data_(b) {}
    Value(ValueList l) : data_(std::move(l)) {}
    Value(ValueMap m) : data_(std::move(m)) {}

    bool is_string() const { return std::holds_alternative<std::string>(data_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(data_); }
    bool is_float() const { return std::holds_alternative<double>(data_); }
    bool is_bool() const { return std::holds_alternative<bool>(data_); }
    bool is_list() const { return std::holds_alternative<ValueList>(data_); }
    bool is_map() const { return std::holds_alternative<ValueMap>(data_); }

    const std::string& as_string() const { return std::get<std::string>(data_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
    double as_float() const { return std::get<double>(data_); }
    bool as_bool() const { return std::get<bool>(data_); }
    const ValueList& as_list() const { return std::get<ValueList>(data_); }
    const ValueMap& as_map() const { return std::get<ValueMap>(data_); }

    const Storage& storage() const { return data_; }

    /// Nested lookup in a map value; nullptr when absent or not a map.
    const Value* find(const std::string& key) const;

    bool operator==(const Value& other) const;

private:
    Storage data_;
};

struct ValueEntry {
    std::string key;
    Value value;

    bool operator==(const ValueEntry& other) const = default;
};

Json to_json(const Value& v);
/// Throws ContractError on null values.
Value value_from_json(const Json& j);

}  // namespace toolforge
