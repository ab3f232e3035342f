#include <doctest.h>

#include "oracles.hpp"
#include "toolforge/api.hpp"
#include "toolforge/call_string.hpp"
#include "toolforge/dialog.hpp"
#include "toolforge/serialize.hpp"

using namespace toolforge;

namespace {

const char* kTwoCalls =
    "[get_weather_data(coordinates=[45.4215, -75.6972]), calc_binomial_probability(n=10, k=5.0, p=0.5)]";
const char* kIntegral =
    "[calculus.integralSolver(function=\"lambda x: 3*x**2\", limits={\"lower\": \"0\", \"upper\": \"4\"})]";

}  // namespace

TEST_SUITE("core") {

TEST_CASE("two-call line parses to the documented structure") {
    auto calls = parse_call_string(kTwoCalls);
    REQUIRE(calls.size() == 2);
    CHECK(calls[0].api_name == "get_weather_data");
    REQUIRE(calls[0].arguments.size() == 1);
    const auto& coords = calls[0].arguments[0].value.as_list();
    REQUIRE(coords.size() == 2);
    CHECK(coords[0].as_float() == 45.4215);
    CHECK(coords[1].as_float() == -75.6972);
    CHECK(calls[1].argument("n")->as_int() == 10);
    CHECK(calls[1].argument("k")->is_float());
    CHECK(calls[1].argument("k")->as_float() == 5.0);
    CHECK(calls[1].argument("p")->as_float() == 0.5);
    CHECK(render_call_string(calls) == kTwoCalls);
}

TEST_CASE("nested dict argument parses and renders unchanged") {
    auto calls = parse_call_string(kIntegral);
    REQUIRE(calls.size() == 1);
    CHECK(calls[0].api_name == "calculus.integralSolver");
    CHECK(calls[0].argument("function")->as_string() == "lambda x: 3*x**2");
    const Value* limits = calls[0].argument("limits");
    REQUIRE(limits->is_map());
    CHECK(limits->find("lower")->as_string() == "0");
    CHECK(limits->find("upper")->as_string() == "4");
    CHECK(render_call_string(calls) == kIntegral);
}

TEST_CASE("single quotes normalize to double quotes") {
    auto calls = parse_call_string("[GetUserToken(username='foo', password='bar')]");
    CHECK(render_call_string(calls) == "[GetUserToken(username=\"foo\", password=\"bar\")]");
}

TEST_CASE("api names with inner spaces and empty argument lists") {
    auto calls = parse_call_string("[Get Live Events Count by Sport(sport=\"tennis\"), ping()]");
    REQUIRE(calls.size() == 2);
    CHECK(calls[0].api_name == "Get Live Events Count by Sport");
    CHECK(calls[1].arguments.empty());
}

TEST_CASE("malformed call strings raise SyntaxError") {
    for (const char* bad : {"", "[", "]", "[f(", "[f(x=)]", "[f(x=1,)]", "[f(x=1) g()]", "[f(x=\"open)]",
                            "[f(=1)]", "[f(x=1)] trailing", "[f(x={1: 2})]", "[(x=1)]", "[f(x=nul)]"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_call_string(bad), SyntaxError);
    }
}

TEST_CASE("deep nesting is rejected without crashing") {
    std::string s = "[f(x=" + std::string(5000, '[') + std::string(5000, ']') + ")]";
    CHECK_THROWS_AS(parse_call_string(s), SyntaxError);
}

TEST_CASE("random byte strings never crash the parser") {
    oracle::CallGen gen(99);
    const std::string alphabet = "[](){}=,:.'\"\\ abc_019-eE+TrueFalse\n\xff";
    for (int i = 0; i < 3000; ++i) {
        std::string s;
        for (std::size_t k = 0, n = gen.pick(40); k < n; ++k) s.push_back(alphabet[gen.pick(alphabet.size())]);
        try {
            auto calls = parse_call_string(s);
            CHECK(parse_call_string(render_call_string(calls)) == calls);
        } catch (const SyntaxError&) {
        }
    }
}

TEST_CASE("property: canonical rendering round-trips and alternate spellings agree") {
    oracle::CallGen gen(20240601);
    int checked = 0;
    for (int i = 0; i < 1500; ++i) {
        auto calls = gen.calls();
        std::string canonical = render_call_string(calls);
        auto back = parse_call_string(canonical);
        REQUIRE(back == calls);
        REQUIRE(render_call_string(back) == canonical);
        std::string alt = oracle::alt_render(calls);
        CAPTURE(alt);
        REQUIRE(parse_call_string(alt) == calls);
        ++checked;
    }
    CHECK(checked == 1500);
}

TEST_CASE("reference tool JSON validates") {
    auto apis = read_apis(oracle::fixture("tools/reference_tools.jsonl"));
    REQUIRE(apis.size() == 4);
    for (const auto& a : apis) CHECK(schema_defects(a).empty());
    const auto& pressure = apis[2];
    CHECK(pressure.name == "calc_absolute_pressure");
    CHECK(pressure.parameters.is_required("gauge_pressure"));
    CHECK_FALSE(pressure.parameters.is_required("atm_pressure"));
}

TEST_CASE("python-literal tool definitions are accepted") {
    auto api = validate_api_json(oracle::slurp(oracle::fixture("tools/calc_absolute_pressure.txt")));
    CHECK(api.name == "calc_absolute_pressure");
    CHECK(api.parameters.property("atm_pressure")->kind == ParamKind::Integer);
}

TEST_CASE("schema defects are all reported") {
    Json j = Json::parse(R"({"name": "f", "description": "",
        "parameters": {"type": "dict", "properties": {"a": {"type": "tuple", "description": "x"}}, "required": ["a", "b"]}})");
    try {
        validate_api(j);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        std::set<std::string> kinds;
        for (const auto& d : e.defects()) kinds.insert(d.kind);
        CHECK(kinds.count("missing"));
        CHECK(kinds.count("unknown_kind"));
        CHECK(kinds.count("dangling_required"));
    }
    CHECK_THROWS_AS(validate_api(Json::parse(R"({"name": "", "description": "d", "parameters": {"type": "dict"}})")),
                    SchemaError);
}

TEST_CASE("api JSON round-trips") {
    for (const auto& a : read_apis(oracle::fixture("tools/reference_tools.jsonl"))) {
        auto back = api_from_json(api_to_json(a));
        CHECK(api_to_json(back) == api_to_json(a));
    }
}

TEST_CASE("sample JSONL round-trips byte-identically") {
    auto path = oracle::fixture("dlv/clean.jsonl");
    auto samples = read_samples(path);
    REQUIRE(samples.size() == 20);
    std::string first;
    for (const auto& s : samples) first += to_jsonl_line(sample_to_json(s)) + "\n";
    std::string second;
    for (const auto& j : read_jsonl(path)) second += to_jsonl_line(sample_to_json(sample_from_json(j))) + "\n";
    CHECK(first == second);
    auto tmp = std::filesystem::temp_directory_path() / "toolforge_roundtrip.jsonl";
    write_samples(tmp, samples);
    CHECK(oracle::slurp(tmp) == first);
    std::filesystem::remove(tmp);
}

TEST_CASE("dialog types follow the structural definitions") {
    for (const auto& j : read_jsonl(oracle::fixture("dlv/clean.jsonl"))) {
        auto s = sample_from_json(j);
        CAPTURE(s.sample_id);
        CHECK(satisfies_dialog_type(s) == oracle::record_has_type(j));
        CHECK(satisfies_dialog_type(s));
    }
}

TEST_CASE("dialog type labels flip with the turn structure") {
    auto samples = read_samples(oracle::fixture("dlv/clean.jsonl"));
    for (auto s : samples) {
        auto j = sample_to_json(s);
        for (auto t : kAllDialogTypes) {
            s.dialog_type = t;
            j["dialog_type"] = std::string(dialog_type_name(t));
            CHECK(satisfies_dialog_type(s) == oracle::record_has_type(j));
        }
    }
}

TEST_CASE("transcript rendering uses role prefixes") {
    auto s = read_samples(oracle::fixture("dlv/clean.jsonl")).front();
    auto text = render_transcript(s.turns, 1, 3);
    CHECK(text.rfind("User: ", 0) == 0);
    CHECK(text.find("\nAssistant: [get_weather_data(coordinates=[") != std::string::npos);
}

}
