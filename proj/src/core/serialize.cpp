#include "toolforge/serialize.hpp"

#include <fstream>
#include <sstream>

namespace toolforge {

namespace {

Json call_to_json(const FunctionCall& call) {
    Json args = Json::object();
    for (const auto& a : call.arguments) args[a.key] = to_json(a.value);
    return Json{{"name", call.api_name}, {"arguments", std::move(args)}};
}

FunctionCall call_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
        throw ContractError("call record needs a string \"name\"");
    }
    FunctionCall call;
    call.api_name = j["name"].get<std::string>();
    if (auto it = j.find("arguments"); it != j.end()) {
        if (!it->is_object()) throw ContractError("call \"arguments\" must be an object");
        for (auto a = it->begin(); a != it->end(); ++a) call.arguments.push_back({a.key(), value_from_json(a.value())});
    }
    return call;
}

std::string string_field(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) throw ContractError(std::string("field \"") + key + "\" must be a string");
    return it->get<std::string>();
}

}  // namespace

Json turn_to_json(const DialogTurn& turn) {
    Json j = Json::object();
    j["role"] = std::string(role_name(turn.role));
    switch (turn.role) {
        case Role::Assistant:
            if (turn.has_calls()) {
                Json calls = Json::array();
                for (const auto& c : turn.calls) calls.push_back(call_to_json(c));
                j["calls"] = std::move(calls);
                j["call_string"] = render_call_string(turn.calls);
            } else {
                j["content"] = turn.content;
            }
            if (turn.thought) j["thought"] = *turn.thought;
            break;
        case Role::Tool:
            j["payload"] = turn.tool_payload ? *turn.tool_payload : Json(nullptr);
            break;
        default:
            j["content"] = turn.content;
    }
    return j;
}

DialogTurn turn_from_json(const Json& j) {
    if (!j.is_object()) throw ContractError("turn record must be an object");
    DialogTurn t;
    t.role = role_from_name(string_field(j, "role"));
    t.content = string_field(j, "content");
    if (t.role == Role::Assistant) {
        if (auto it = j.find("calls"); it != j.end() && it->is_array() && !it->empty()) {
            for (const auto& c : *it) t.calls.push_back(call_from_json(c));
        } else if (auto cs = j.find("call_string"); cs != j.end() && cs->is_string()) {
            try {
                t.calls = parse_call_string(cs->get<std::string>());
            } catch (const SyntaxError&) {
                t.content = cs->get<std::string>();
            }
        }
        if (auto th = j.find("thought"); th != j.end() && th->is_string()) t.thought = th->get<std::string>();
    } else if (t.role == Role::Tool) {
        if (auto it = j.find("payload"); it != j.end() && !it->is_null()) t.tool_payload = *it;
    }
    return t;
}

Json sample_to_json(const DataSample& s) {
    Json j = Json::object();
    j["sample_id"] = s.sample_id;
    j["system_prompt"] = s.system_prompt;
    Json tools = Json::array();
    for (const auto& api : s.tool_list) tools.push_back(api_to_json(api));
    j["tools"] = std::move(tools);
    Json turns = Json::array();
    for (std::size_t i = 0; i < s.turns.size(); ++i) {
        if (i == 0 && s.turns[i].role == Role::System && s.turns[i].content == s.system_prompt) continue;
        turns.push_back(turn_to_json(s.turns[i]));
    }
    j["turns"] = std::move(turns);
    j["dialog_type"] = std::string(dialog_type_name(s.dialog_type));
    if (s.complexity) {
        j["complexity"] = Json{{"loss", s.complexity->loss}, {"token_count", s.complexity->token_count}};
    } else {
        j["complexity"] = nullptr;
    }
    j["provenance"] = s.provenance;
    return j;
}

DataSample sample_from_json(const Json& j) {
    if (!j.is_object()) throw ContractError("sample record must be an object");
    DataSample s;
    s.sample_id = string_field(j, "sample_id");
    s.system_prompt = string_field(j, "system_prompt");
    if (auto it = j.find("tools"); it != j.end() && it->is_array()) {
        for (const auto& t : *it) s.tool_list.push_back(api_from_json(t));
    }
    s.turns.push_back(DialogTurn::system(s.system_prompt));
    if (auto it = j.find("turns"); it != j.end()) {
        if (!it->is_array()) throw ContractError("\"turns\" must be a list");
        for (const auto& t : *it) s.turns.push_back(turn_from_json(t));
    }
    s.dialog_type = dialog_type_from_name(string_field(j, "dialog_type"));
    if (auto it = j.find("complexity"); it != j.end() && it->is_object()) {
        ComplexityScore c;
        c.loss = it->value("loss", 0.0);
        c.token_count = it->value("token_count", std::size_t{0});
        s.complexity = c;
    }
    if (auto it = j.find("provenance"); it != j.end() && it->is_object()) s.provenance = *it;
    return s;
}

std::string to_jsonl_line(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<Json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed JSON line");
        out.push_back(std::move(j));
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& r : records) out << to_jsonl_line(r) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<DataSample> read_samples(const std::filesystem::path& path) {
    std::vector<DataSample> out;
    for (const auto& j : read_jsonl(path)) out.push_back(sample_from_json(j));
    return out;
}

void write_samples(const std::filesystem::path& path, const std::vector<DataSample>& samples) {
    std::vector<Json> records;
    records.reserve(samples.size());
    for (const auto& s : samples) records.push_back(sample_to_json(s));
    write_jsonl(path, records);
}

std::vector<ApiDefinition> read_apis(const std::filesystem::path& path) {
    std::vector<ApiDefinition> out;
    for (const auto& j : read_jsonl(path)) out.push_back(api_from_json(j));
    return out;
}

void write_apis(const std::filesystem::path& path, const std::vector<ApiDefinition>& apis) {
    std::vector<Json> records;
    records.reserve(apis.size());
    for (const auto& a : apis) records.push_back(api_to_json(a));
    write_jsonl(path, records);
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    Json j = Json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) throw IoError(path.string() + ": malformed JSON");
    return j;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace toolforge
