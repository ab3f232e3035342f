#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "toolforge/api.hpp"
#include "toolforge/call_string.hpp"
#include "toolforge/dlv/dlv.hpp"
#include "toolforge/sdg/complexity.hpp"
#include "toolforge/serialize.hpp"

namespace py = pybind11;
using namespace toolforge;

// JSON crosses the boundary as text; the Python side wraps it with json.loads.

namespace {

std::string calls_to_json(const std::vector<FunctionCall>& calls) {
    Json out = Json::array();
    for (const auto& c : calls) {
        Json args = Json::object();
        for (const auto& [k, v] : c.arguments) args[k] = to_json(v);
        out.push_back({{"name", c.api_name}, {"arguments", args}});
    }
    return out.dump();
}

std::string violations_json(const std::vector<dlv::RuleViolation>& vs) {
    Json out = Json::array();
    for (const auto& v : vs) {
        out.push_back({{"rule_id", v.rule_id}, {"aspect", dlv::aspect_name(v.aspect)}, {"message", v.message},
                       {"location", v.location}});
    }
    return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    // Translators are tried newest first, so the base class goes first.
    auto base = py::register_exception<Error>(m, "ToolforgeError", PyExc_RuntimeError);
    py::register_exception<SyntaxError>(m, "CallSyntaxError", base.ptr());
    py::register_exception<SchemaError>(m, "SchemaError", base.ptr());

    m.def("parse_calls", [](const std::string& text) { return calls_to_json(parse_call_string(text)); },
          "Parse a call-string into a JSON list of {name, arguments}.");
    m.def("normalize_calls", [](const std::string& text) { return render_call_string(parse_call_string(text)); },
          "Canonical rendering of a call-string.");
    m.def("validate_api", [](const std::string& doc) { return api_to_json(validate_api_json(doc)).dump(); },
          "Validate an API definition; returns its canonical JSON or raises SchemaError.");
    m.def("check_record", [](const std::string& record) { return violations_json(dlv::run_rule_layer(Json::parse(record))); },
          "Rule-layer violations for one sample record, as JSON.");
    m.def("rule_ids", [] {
        std::vector<std::string> ids;
        for (const auto& r : dlv::rule_catalog()) ids.emplace_back(r.rule_id);
        return ids;
    });
    m.def("loss_from_logprobs", [](const std::vector<double>& lps) { return sdg::loss_from_logprobs(lps).loss; });
}
