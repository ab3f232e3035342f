#include <doctest.h>

#include <atomic>

#include "oracles.hpp"
#include "toolforge/dlv/dlv.hpp"
#include "toolforge/llm/mock_backend.hpp"
#include "toolforge/llm/structured.hpp"
#include "toolforge/util.hpp"

using namespace toolforge;
using namespace toolforge::dlv;

namespace {

std::vector<Json> faults() { return read_jsonl(oracle::fixture("dlv/faults.jsonl")); }
std::vector<Json> clean() { return read_jsonl(oracle::fixture("dlv/clean.jsonl")); }

std::set<std::string> rule_ids(const std::vector<RuleViolation>& v) {
    std::set<std::string> out;
    for (const auto& x : v) out.insert(x.rule_id);
    return out;
}

// Judge that answers each check with a fixed verdict and counts calls.
struct Judge {
    std::map<std::string, bool> passed = {{"hallucination", true}, {"consistency", true}, {"tool_response", true}};
    std::shared_ptr<llm::MockBackend> mock = std::make_shared<llm::MockBackend>(llm::MockOptions{llm::ChatFallthrough::Simulate});

    Judge() {
        mock->set_responder([this](const llm::ChatRequest& r) -> std::optional<std::string> {
            std::string check = r.meta.value("check", "");
            bool ok = passed.at(check);
            return llm::fenced_json(Json{{"passed", ok}, {"rationale", ok ? "" : check + " problem found"}});
        });
    }
};

ApiDefinition reference_tool(std::size_t i) { return read_apis(oracle::fixture("tools/reference_tools.jsonl")).at(i); }

DataSample with_text(const std::string& text) {
    auto s = sample_from_json(clean()[3]);
    s.turns[2].content = text;
    return s;
}

}  // namespace

TEST_SUITE("dlv") {

TEST_CASE("catalog ids are unique and every fixture names one of them") {
    std::set<std::string> ids;
    for (const auto& r : rule_catalog()) CHECK(ids.insert(std::string(r.rule_id)).second);
    CHECK(ids.size() >= 13);
    std::set<std::string> covered;
    for (const auto& f : faults()) {
        CHECK(find_rule(f["expect"].get<std::string>()) != nullptr);
        covered.insert(f["expect"].get<std::string>());
    }
    CHECK(covered == ids);
}

TEST_CASE("each seeded fault triggers exactly its rule") {
    for (const auto& f : faults()) {
        auto v = run_rule_layer(f["record"]);
        CAPTURE(f["expect"].get<std::string>());
        for (const auto& x : v) CAPTURE(x.message);
        CHECK(rule_ids(v) == std::set<std::string>{f["expect"].get<std::string>()});
        for (const auto& x : v) CHECK(find_rule(x.rule_id)->aspect == x.aspect);
    }
}

TEST_CASE("clean corpus has no violations and covers every dialog type") {
    std::set<std::string> types;
    for (const auto& rec : clean()) {
        auto v = run_rule_layer(rec);
        CAPTURE(rec["sample_id"].get<std::string>());
        for (const auto& x : v) CAPTURE(x.message);
        CHECK(v.empty());
        types.insert(rec["dialog_type"].get<std::string>());
    }
    CHECK(types.size() == 4);
}

TEST_CASE("three independent faults give exactly three rule ids, ordered") {
    Json rec = clean()[0];
    rec["turns"][1]["calls"][0]["arguments"]["units"] = "metric";
    rec["turns"][1].erase("call_string");
    rec["turns"][3]["content"] = "It is 12.5 degrees and";
    rec["tools"][1]["description"] = "";
    auto v = run_rule_layer(rec);
    REQUIRE(v.size() == 3);
    CHECK(v[0].rule_id == "missing_description");
    CHECK(v[1].rule_id == "unknown_param");
    CHECK(v[2].rule_id == "incomplete_response");
    CHECK(run_rule_layer(rec) == v);
}

TEST_CASE("reference tool examples") {
    auto pressure = reference_tool(2);
    CHECK(check_api_clarity(pressure).empty());
    auto calls = parse_call_string("[calc_absolute_pressure(atm_pressure=1)]");
    auto v = check_executability(calls, {pressure});
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule_id == "missing_required");
    CHECK(v[0].message.find("gauge_pressure") != std::string::npos);
    auto two = parse_call_string(
        "[get_weather_data(coordinates=[45.4215, -75.6972]), calc_binomial_probability(n=10, k=5.0, p=0.5)]");
    CHECK(check_executability(two, {reference_tool(0), reference_tool(1)}).empty());
    auto integral = parse_call_string(
        "[calculus.integralSolver(function=\"lambda x: 3*x**2\", limits={\"lower\": \"0\", \"upper\": \"4\"})]");
    CHECK(check_executability(integral, {reference_tool(3)}).empty());
    auto bad_limit = parse_call_string(
        "[calculus.integralSolver(function=\"f\", limits={\"lower\": \"zero\", \"upper\": \"4\"})]");
    CHECK(rule_ids(check_executability(bad_limit, {reference_tool(3)})) == std::set<std::string>{"pattern_mismatch"});
    auto wrong = parse_call_string("[get_weather_data(coordinates=\"45.4\")]");
    CHECK(rule_ids(check_executability(wrong, {reference_tool(0)})) == std::set<std::string>{"type_mismatch"});
}

TEST_CASE("int is accepted for float but not the reverse") {
    auto binom = reference_tool(1);
    CHECK(check_executability(parse_call_string("[calc_binomial_probability(n=10, k=5, p=1)]"), {binom}).empty());
    CHECK(rule_ids(check_executability(parse_call_string("[calc_binomial_probability(n=10.0, k=5, p=1)]"), {binom})) ==
          std::set<std::string>{"type_mismatch"});
}

TEST_CASE("length limit is exact") {
    RuleLimits limits;
    limits.max_chars = 50;
    auto ok = with_text(std::string(49, 'a') + ".");
    CHECK(check_dialog_correctness(ok, limits).empty());
    auto over = with_text(std::string(50, 'a') + ".");
    CHECK(rule_ids(check_dialog_correctness(over, limits)) == std::set<std::string>{"response_too_long"});
}

TEST_CASE("mixed-language verdicts agree with the script-share oracle") {
    const std::vector<std::string> texts = {
        "This answer is entirely in English.",
        "This answer mixes 中文和英文的句子内容在一起。",
        "Mostly English text here with a single 字.",
        "Русский текст и English words together here.",
        "全部都是中文的回答内容。",
    };
    RuleLimits limits;
    for (const auto& t : texts) {
        auto cps = decode_utf8(t);
        auto shares = oracle::script_shares(std::u32string(cps.begin(), cps.end()));
        std::size_t big = 0;
        for (const auto& [k, v] : shares) big += v >= limits.script_share;
        auto v = rule_ids(check_dialog_correctness(with_text(t), limits));
        CAPTURE(t);
        CHECK((v.count("mixed_language") == 1) == (big >= 2));
    }
}

TEST_CASE("invalid characters") {
    for (const std::string bad : {std::string("ok\x01 text."), std::string("bad \xef\xbf\xbd char."),
                                  std::string("bom \xef\xbb\xbf here."), std::string("\xff broken utf8.")}) {
        CAPTURE(bad);
        CHECK(rule_ids(check_dialog_correctness(with_text(bad))) == std::set<std::string>{"invalid_characters"});
    }
    CHECK(check_dialog_correctness(with_text("Newlines\nand tabs\tare fine.")).empty());
}

TEST_CASE("consistency rules") {
    auto s = sample_from_json(clean()[0]);
    s.turns[3].tool_payload = Json{{"name", "AddAlarm"}, {"results", Json::object()}};
    CHECK(rule_ids(check_sample_consistency(s)) == std::set<std::string>{"call_response_name_mismatch"});
    auto orphan = sample_from_json(clean()[3]);
    orphan.turns.insert(orphan.turns.begin() + 1, DialogTurn::tool("x", Json::object()));
    CHECK(rule_ids(check_sample_consistency(orphan)) == std::set<std::string>{"orphan_tool_response"});
    CHECK(check_sample_consistency(sample_from_json(clean()[16])).empty());
}

TEST_CASE("degenerate text agrees with the n-gram oracle") {
    const std::vector<std::string> texts = {
        "ha ha ha ha ha ha ha ha",
        "The forecast is mild with light rain and a gentle breeze.",
        "It is cloudy. It is cloudy. It is cloudy. It is cloudy.",
        "Sure, the alarm is set. The alarm is set for seven.",
    };
    for (const auto& t : texts) {
        std::size_t top = 0;
        double share = oracle::top_trigram_share(t, &top);
        bool expect_fail = top >= 2 && share > 0.3;
        CAPTURE(t);
        CHECK(degenerate_text(with_text(t)).passed == !expect_fail);
    }
    CHECK_FALSE(degenerate_text(with_text("Result: ==================== done.")).passed);
    CHECK(degenerate_text(with_text("Result: ================ done.")).passed);
}

TEST_CASE("model layer returns four verdicts and keeps rationale") {
    Judge judge;
    auto s = sample_from_json(clean()[0]);
    auto verdicts = run_model_layer(s, *judge.mock);
    REQUIRE(verdicts.size() == 4);
    for (const auto& v : verdicts) CHECK(v.passed);
    judge.passed["hallucination"] = false;
    auto report = verify(s, *judge.mock);
    CHECK(report.disposition == Disposition::Discard);
    bool found = false;
    for (const auto& v : report.verdicts) {
        if (v.check == Check::Hallucination) {
            CHECK_FALSE(v.passed);
            CHECK(v.rationale == "hallucination problem found");
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("invented values are caught by the simulated judge") {
    auto mock = std::make_shared<llm::MockBackend>(llm::MockOptions{llm::ChatFallthrough::Simulate});
    auto s = sample_from_json(clean()[2]);
    // The second call uses a city that neither the user nor any tool produced.
    s.turns[4].calls[0].arguments[0].value = Value(std::string("Atlantis"));
    auto verdicts = run_model_layer(s, *mock);
    CHECK_FALSE(verdicts[0].passed);
    CHECK_FALSE(verdicts[0].rationale.empty());
    auto fine = run_model_layer(sample_from_json(clean()[2]), *mock);
    for (const auto& v : fine) CHECK(v.passed);
}

TEST_CASE("unreadable verdicts are retried then rejected") {
    llm::MockBackend mock({llm::ChatFallthrough::Echo});
    CHECK_THROWS_AS(run_model_layer(sample_from_json(clean()[0]), mock), VerdictParseError);
    llm::MockBackend lazy;
    lazy.set_responder([](const llm::ChatRequest&) { return std::optional<std::string>(R"({"passed": false})"); });
    llm::MockBackend lazy_sim({llm::ChatFallthrough::Simulate});
    lazy_sim.set_responder([](const llm::ChatRequest&) { return std::optional<std::string>(R"({"passed": false})"); });
    CHECK_THROWS_AS(run_model_layer(sample_from_json(clean()[0]), lazy_sim), VerdictParseError);
}

TEST_CASE("disposition law over all combinations") {
    RuleViolation v{"unknown_api", Aspect::Executability, "m", "l", 1};
    for (bool has_violation : {false, true}) {
        for (int mask = 0; mask < 16; ++mask) {
            std::vector<ModelVerdict> verdicts;
            bool all = true;
            for (int c = 0; c < 4; ++c) {
                bool ok = (mask >> c) & 1;
                all = all && ok;
                verdicts.push_back({static_cast<Check>(c), ok, ok ? "" : "bad"});
            }
            std::vector<RuleViolation> vs;
            if (has_violation) vs.push_back(v);
            CHECK((disposition_for(vs, verdicts) == Disposition::Keep) == (!has_violation && all));
        }
    }
}

TEST_CASE("rule violations skip the model layer entirely") {
    Judge judge;
    for (const auto& f : faults()) {
        judge.mock->reset_counts();
        auto s = sample_from_json(f["record"]);
        if (run_rule_layer(s).empty()) continue;  // record-level faults only show on the raw record
        auto report = verify(s, *judge.mock);
        CHECK(report.disposition == Disposition::Discard);
        CHECK(report.verdicts.empty());
        CHECK(judge.mock->chat_calls() == 0);
    }
}

TEST_CASE("backend failure carries the partial report") {
    llm::MockBackend strict;
    try {
        verify(sample_from_json(clean()[0]), strict);
        FAIL("expected failure");
    } catch (const VerificationFailed& e) {
        CHECK(e.partial().sample_id == "clean-single-0");
        CHECK(e.partial().disposition == Disposition::Discard);
    }
}

TEST_CASE("report JSON round-trips and stats count per rule") {
    Judge judge;
    std::vector<VerificationReport> reports;
    for (const auto& f : faults()) reports.push_back(verify(sample_from_json(f["record"]), *judge.mock));
    for (const auto& r : clean()) reports.push_back(verify(sample_from_json(r), *judge.mock));
    for (const auto& r : reports) {
        auto back = report_from_json(report_to_json(r));
        CHECK(report_to_json(back) == report_to_json(r));
    }
    Json stats = report_stats(reports);
    CHECK(stats["reports"] == reports.size());
    CHECK(stats["kept"].get<std::size_t>() == 20);
    CHECK(stats["rules"]["unknown_api"]["failed"] == 1);
}

}
