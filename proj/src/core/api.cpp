#include "toolforge/api.hpp"

#include <regex>

#include "toolforge/call_string.hpp"

namespace toolforge {

SchemaError::SchemaError(std::vector<SchemaDefect> defects)
    : Error([&] {
          std::string msg = "invalid API definition:";
          for (const auto& d : defects) msg += " [" + d.kind + " " + d.path + ": " + d.detail + "]";
          return msg;
      }()),
      defects_(std::move(defects)) {}

bool SchemaError::has(const std::string& kind, const std::string& detail) const {
    for (const auto& d : defects_) {
        if (d.kind == kind && (detail.empty() || d.detail == detail)) return true;
    }
    return false;
}

std::string_view kind_name(ParamKind kind) {
    switch (kind) {
        case ParamKind::String: return "string";
        case ParamKind::Integer: return "integer";
        case ParamKind::Float: return "float";
        case ParamKind::Boolean: return "boolean";
        case ParamKind::Array: return "array";
        case ParamKind::Dict: return "dict";
        case ParamKind::Unknown: return "unknown";
    }
    return "unknown";
}

ParamKind kind_from_name(std::string_view name) {
    if (name == "string") return ParamKind::String;
    if (name == "integer") return ParamKind::Integer;
    if (name == "float" || name == "number") return ParamKind::Float;
    if (name == "boolean") return ParamKind::Boolean;
    if (name == "array") return ParamKind::Array;
    if (name == "dict" || name == "object") return ParamKind::Dict;
    return ParamKind::Unknown;
}

const ParamSchema* ParamSchema::property(std::string_view name) const {
    for (const auto& p : properties) {
        if (p.name == name) return p.schema.get();
    }
    return nullptr;
}

bool ParamSchema::is_required(std::string_view name) const {
    for (const auto& r : required) {
        if (r == name) return true;
    }
    return false;
}

bool ParamSchema::operator==(const ParamSchema& o) const {
    if (kind != o.kind || raw_kind != o.raw_kind || description != o.description || required != o.required ||
        pattern != o.pattern || enum_values != o.enum_values || default_value != o.default_value ||
        extras != o.extras || properties.size() != o.properties.size()) {
        return false;
    }
    if (static_cast<bool>(items) != static_cast<bool>(o.items)) return false;
    if (items && !(*items == *o.items)) return false;
    for (std::size_t i = 0; i < properties.size(); ++i) {
        const auto& a = properties[i];
        const auto& b = o.properties[i];
        if (a.name != b.name || static_cast<bool>(a.schema) != static_cast<bool>(b.schema)) return false;
        if (a.schema && !(*a.schema == *b.schema)) return false;
    }
    return true;
}

ParamSchema ParamSchema::scalar(ParamKind kind, std::string description) {
    ParamSchema s;
    s.kind = kind;
    s.description = std::move(description);
    return s;
}

ParamSchema ParamSchema::array_of(ParamSchema items, std::string description) {
    ParamSchema s;
    s.kind = ParamKind::Array;
    s.description = std::move(description);
    s.items = std::make_shared<const ParamSchema>(std::move(items));
    return s;
}

ParamSchema ParamSchema::dict() {
    ParamSchema s;
    s.kind = ParamKind::Dict;
    return s;
}

ParamSchema& ParamSchema::add_property(std::string name, ParamSchema schema, bool req) {
    if (req) required.push_back(name);
    properties.push_back({std::move(name), std::make_shared<const ParamSchema>(std::move(schema))});
    return *this;
}

bool is_valid_api_name(std::string_view name) {
    if (name.empty() || name.front() == ' ' || name.back() == ' ') return false;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                  c == '.' || c == ' ';
        if (!ok) return false;
    }
    return true;
}

namespace {

void schema_defects_into(const ParamSchema& s, const std::string& path, std::vector<SchemaDefect>& out) {
    if (s.kind == ParamKind::Unknown) {
        out.push_back({"unknown_kind", path + ".type", s.raw_kind.empty() ? "<missing>" : s.raw_kind});
        return;
    }
    if (s.kind == ParamKind::Array) {
        if (!s.items) {
            out.push_back({"missing", path, "items"});
        } else {
            schema_defects_into(*s.items, path + ".items", out);
        }
    } else if (s.items) {
        out.push_back({"invalid", path, "items on non-array kind"});
    }
    if (s.kind == ParamKind::Dict) {
        for (const auto& p : s.properties) {
            if (p.name.empty()) out.push_back({"invalid", path + ".properties", "empty property name"});
            if (p.schema) schema_defects_into(*p.schema, path + ".properties." + p.name, out);
        }
        for (const auto& r : s.required) {
            if (s.property(r) == nullptr) out.push_back({"dangling_required", path + ".required", r});
        }
    } else if (!s.properties.empty() || !s.required.empty()) {
        out.push_back({"invalid", path, "properties on non-dict kind"});
    }
    if (s.pattern) {
        if (s.kind != ParamKind::String) out.push_back({"invalid", path + ".pattern", "pattern on non-string kind"});
        try {
            std::regex re(*s.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error&) {
            out.push_back({"invalid", path + ".pattern", "malformed regular expression"});
        }
    }
    if (s.enum_values && (!s.enum_values->is_array() || s.enum_values->empty())) {
        out.push_back({"invalid", path + ".enum", "enum must be a nonempty array"});
    }
}

}  // namespace

std::vector<SchemaDefect> schema_defects(const ApiDefinition& api) {
    std::vector<SchemaDefect> out;
    if (api.name.empty()) {
        out.push_back({"missing", "name", "name"});
    } else if (!is_valid_api_name(api.name)) {
        out.push_back({"invalid", "name", "name contains characters outside [A-Za-z0-9_. ]"});
    }
    if (api.description.empty()) out.push_back({"missing", "description", "description"});
    if (api.parameters.kind != ParamKind::Dict && api.parameters.kind != ParamKind::Unknown) {
        out.push_back({"invalid", "parameters.type", "root parameters must be dict"});
    }
    schema_defects_into(api.parameters, "parameters", out);
    if (api.returns) schema_defects_into(*api.returns, "returns", out);
    return out;
}

Json schema_to_json(const ParamSchema& s) {
    Json j = Json::object();
    j["type"] = s.kind == ParamKind::Unknown ? s.raw_kind : std::string(kind_name(s.kind));
    if (!s.description.empty()) j["description"] = s.description;
    if (s.items) j["items"] = schema_to_json(*s.items);
    if (s.kind == ParamKind::Dict) {
        Json props = Json::object();
        for (const auto& p : s.properties) props[p.name] = p.schema ? schema_to_json(*p.schema) : Json::object();
        j["properties"] = std::move(props);
        j["required"] = s.required;
    }
    if (s.pattern) j["pattern"] = *s.pattern;
    if (s.enum_values) j["enum"] = *s.enum_values;
    if (s.default_value) j["default"] = *s.default_value;
    for (auto it = s.extras.begin(); it != s.extras.end(); ++it) j[it.key()] = it.value();
    return j;
}

Json api_to_json(const ApiDefinition& api) {
    Json j = Json::object();
    j["name"] = api.name;
    j["description"] = api.description;
    j["parameters"] = schema_to_json(api.parameters);
    j["returns"] = api.returns ? schema_to_json(*api.returns) : Json(nullptr);
    j["domain_path"] = api.domain_path;
    return j;
}

namespace {

ParamSchema schema_from_json(const Json& j, const std::string& path, std::vector<SchemaDefect>& defects) {
    ParamSchema s;
    if (!j.is_object()) {
        defects.push_back({"invalid", path, "schema must be an object"});
        s.kind = ParamKind::Unknown;
        return s;
    }
    auto type = j.find("type");
    if (type == j.end()) {
        defects.push_back({"missing", path, "type"});
        s.kind = ParamKind::Unknown;
    } else if (!type->is_string()) {
        defects.push_back({"invalid", path + ".type", "type must be a string"});
        s.kind = ParamKind::Unknown;
    } else {
        s.kind = kind_from_name(type->get<std::string>());
        if (s.kind == ParamKind::Unknown) s.raw_kind = type->get<std::string>();
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const Json& v = it.value();
        if (key == "type") continue;
        if (key == "description") {
            if (v.is_string()) s.description = v.get<std::string>();
            else defects.push_back({"invalid", path + ".description", "description must be a string"});
        } else if (key == "items") {
            s.items = std::make_shared<const ParamSchema>(schema_from_json(v, path + ".items", defects));
        } else if (key == "properties") {
            if (!v.is_object()) {
                defects.push_back({"invalid", path + ".properties", "properties must be an object"});
                continue;
            }
            for (auto p = v.begin(); p != v.end(); ++p) {
                s.properties.push_back({p.key(), std::make_shared<const ParamSchema>(schema_from_json(
                                                     p.value(), path + ".properties." + p.key(), defects))});
            }
        } else if (key == "required") {
            if (!v.is_array()) {
                defects.push_back({"invalid", path + ".required", "required must be a list of names"});
                continue;
            }
            for (const auto& r : v) {
                if (r.is_string()) s.required.push_back(r.get<std::string>());
                else defects.push_back({"invalid", path + ".required", "required entries must be strings"});
            }
        } else if (key == "pattern") {
            if (v.is_string()) s.pattern = v.get<std::string>();
            else defects.push_back({"invalid", path + ".pattern", "pattern must be a string"});
        } else if (key == "enum") {
            s.enum_values = v;
        } else if (key == "default") {
            s.default_value = v;
        } else {
            s.extras[key] = v;
        }
    }
    return s;
}

}  // namespace

ApiDefinition api_from_json(const Json& j, std::vector<SchemaDefect>* defects) {
    std::vector<SchemaDefect> local;
    auto& out = defects ? *defects : local;
    ApiDefinition api;
    if (!j.is_object()) {
        out.push_back({"invalid", "", "API definition must be a JSON object"});
        api.parameters.kind = ParamKind::Unknown;
        return api;
    }
    if (auto it = j.find("name"); it != j.end()) {
        if (it->is_string()) api.name = it->get<std::string>();
        else out.push_back({"invalid", "name", "name must be a string"});
    }
    if (auto it = j.find("description"); it != j.end()) {
        if (it->is_string()) api.description = it->get<std::string>();
        else out.push_back({"invalid", "description", "description must be a string"});
    }
    if (auto it = j.find("parameters"); it != j.end()) {
        api.parameters = schema_from_json(*it, "parameters", out);
    } else {
        out.push_back({"missing", "parameters", "parameters"});
    }
    if (auto it = j.find("returns"); it != j.end() && !it->is_null()) {
        api.returns = schema_from_json(*it, "returns", out);
    }
    if (auto it = j.find("domain_path"); it != j.end() && !it->is_null()) {
        if (it->is_array()) {
            for (const auto& label : *it) {
                if (label.is_string()) api.domain_path.push_back(label.get<std::string>());
                else out.push_back({"invalid", "domain_path", "labels must be strings"});
            }
        } else {
            out.push_back({"invalid", "domain_path", "domain_path must be a list"});
        }
    }
    return api;
}

ApiDefinition validate_api(const Json& j) {
    std::vector<SchemaDefect> defects;
    ApiDefinition api = api_from_json(j, &defects);
    for (auto& d : schema_defects(api)) {
        bool dup = false;
        for (const auto& e : defects) dup = dup || e == d;
        if (!dup) defects.push_back(std::move(d));
    }
    if (!defects.empty()) throw SchemaError(std::move(defects));
    return api;
}

ApiDefinition validate_api_json(std::string_view doc) {
    Json j = Json::parse(doc.begin(), doc.end(), nullptr, false);
    if (j.is_discarded()) {
        try {
            j = to_json(parse_value_literal(doc));
        } catch (const Error&) {
            throw SchemaError({{"invalid", "", "document is neither JSON nor a Python-style literal"}});
        }
    }
    return validate_api(j);
}

}  // namespace toolforge
