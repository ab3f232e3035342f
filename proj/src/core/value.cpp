#include "toolforge/value.hpp"

#include "toolforge/errors.hpp"

namespace toolforge {

const Value* Value::find(const std::string& key) const {
    if (!is_map()) return nullptr;
    for (const auto& e : as_map()) {
        if (e.key == key) return &e.value;
    }
    return nullptr;
}

bool Value::operator==(const Value& other) const { return data_ == other.data_; }

Json to_json(const Value& v) {
    return std::visit(
        [](const auto& x) -> Json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ValueList>) {
                Json arr = Json::array();
                for (const auto& item : x) arr.push_back(to_json(item));
                return arr;
            } else if constexpr (std::is_same_v<T, ValueMap>) {
                Json obj = Json::object();
                for (const auto& e : x) obj[e.key] = to_json(e.value);
                return obj;
            } else {
                return Json(x);
            }
        },
        v.storage());
}

Value value_from_json(const Json& j) {
    switch (j.type()) {
        case Json::value_t::string:
            return Value(j.get<std::string>());
        case Json::value_t::boolean:
            return Value(j.get<bool>());
        case Json::value_t::number_integer:
            return Value(j.get<std::int64_t>());
        case Json::value_t::number_unsigned: {
            auto u = j.get<std::uint64_t>();
            if (u > static_cast<std::uint64_t>(INT64_MAX)) throw ContractError("integer out of 64-bit signed range");
            return Value(static_cast<std::int64_t>(u));
        }
        case Json::value_t::number_float:
            return Value(j.get<double>());
        case Json::value_t::array: {
            ValueList out;
            out.reserve(j.size());
            for (const auto& item : j) out.push_back(value_from_json(item));
            return Value(std::move(out));
        }
        case Json::value_t::object: {
            ValueMap out;
            for (auto it = j.begin(); it != j.end(); ++it) out.push_back({it.key(), value_from_json(it.value())});
            return Value(std::move(out));
        }
        default:
            throw ContractError("null or non-literal JSON value cannot be a call argument");
    }
}

}  // namespace toolforge
