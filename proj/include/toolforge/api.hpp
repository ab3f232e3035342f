#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toolforge/errors.hpp"
#include "toolforge/value.hpp"

namespace toolforge {

enum class ParamKind { String, Integer, Float, Boolean, Array, Dict, Unknown };

std::string_view kind_name(ParamKind kind);
/// Accepts the canonical names plus the JSON-Schema spellings "object" and "number".
ParamKind kind_from_name(std::string_view name);

struct ParamSchema;

struct PropertyEntry {
    std::string name;
    std::shared_ptr<const ParamSchema> schema;
};

/// Parameter schema tree node. A plain aggregate so that malformed
/// definitions read from disk can still be represented and diagnosed.
struct ParamSchema {
    ParamKind kind = ParamKind::String;
    std::string raw_kind;  // original "type" text when kind == Unknown
    std::string description;
    std::shared_ptr<const ParamSchema> items;  // arrays
    std::vector<PropertyEntry> properties;     // dicts, declaration order
    std::vector<std::string> required;         // dicts
    std::optional<std::string> pattern;
    std::optional<Json> enum_values;  // JSON array of literals
    std::optional<Json> default_value;
    Json extras = Json::object();  // unrecognised keys, kept verbatim

    const ParamSchema* property(std::string_view name) const;
    bool is_required(std::string_view name) const;

    bool operator==(const ParamSchema& other) const;

    static ParamSchema scalar(ParamKind kind, std::string description = {});
    static ParamSchema array_of(ParamSchema items, std::string description = {});
    static ParamSchema dict();
    ParamSchema& add_property(std::string name, ParamSchema schema, bool required = false);
};

struct ApiDefinition {
    std::string name;
    std::string description;
    ParamSchema parameters = ParamSchema::dict();
    std::optional<ParamSchema> returns;
    std::vector<std::string> domain_path;

    bool operator==(const ApiDefinition&) const = default;
};

/// API names: letters, digits, '_', '.', and inner spaces.
bool is_valid_api_name(std::string_view name);

/// Structural problems of an in-memory definition (empty description,
/// dangling required names, unknown kinds, malformed patterns, ...).
std::vector<SchemaDefect> schema_defects(const ApiDefinition& api);

Json schema_to_json(const ParamSchema& schema);
Json api_to_json(const ApiDefinition& api);

/// Lenient conversion used when loading stored corpora: never throws on
/// shape problems, reports them in `defects` instead.
ApiDefinition api_from_json(const Json& j, std::vector<SchemaDefect>* defects = nullptr);

/// Strict entry point: parses `doc` (JSON, or a Python-style literal with
/// single quotes as printed in prompts) and returns the definition, or throws
/// SchemaError listing every defect found.
ApiDefinition validate_api_json(std::string_view doc);

/// Strict validation of an already-parsed JSON object.
ApiDefinition validate_api(const Json& j);

}  // namespace toolforge
