#pragma once

#include <optional>
#include <string>
#include <vector>

#include "toolforge/dialog.hpp"
#include "toolforge/llm/backend.hpp"

namespace toolforge::dlv {

enum class Aspect { ApiClarity, Executability, DialogCorrectness, Consistency };
std::string_view aspect_name(Aspect a);

struct RuleInfo {
    std::string_view rule_id;
    Aspect aspect;
    std::string_view summary;
};

/// Every rule the rule layer can report.
const std::vector<RuleInfo>& rule_catalog();
const RuleInfo* find_rule(std::string_view rule_id);

struct RuleViolation {
    std::string rule_id;
    Aspect aspect = Aspect::ApiClarity;
    std::string message;
    std::string location;   // e.g. "turns[3].calls[0].city", "tools[1].description"
    std::size_t turn_index = 0;  // ordering key; tool-list problems sort with the system turn

    bool operator==(const RuleViolation&) const = default;
};

struct RuleLimits {
    std::size_t max_chars = 4096;       // per assistant text turn, in code points
    double script_share = 0.20;         // mixed_language: minimum share of each script
    std::size_t min_letters_for_script = 8;
};

std::vector<RuleViolation> check_api_clarity(const ApiDefinition& api, const std::string& location = "tool");
std::vector<RuleViolation> check_executability(const std::vector<FunctionCall>& calls,
                                               const std::vector<ApiDefinition>& tools,
                                               const std::string& location = "calls", std::size_t turn_index = 0);
std::vector<RuleViolation> check_dialog_correctness(const DataSample& sample, const RuleLimits& limits = {});
std::vector<RuleViolation> check_sample_consistency(const DataSample& sample);

/// Fields a stored sample record must carry; missing ones become missing_field.
std::vector<RuleViolation> check_record_fields(const Json& record);

/// All four aspects over the sample's own tool list, sorted by (turn index, rule_id).
std::vector<RuleViolation> run_rule_layer(const DataSample& sample, const RuleLimits& limits = {});
/// Stored-record variant: field presence first, then the sample rules.
std::vector<RuleViolation> run_rule_layer(const Json& record, const RuleLimits& limits = {});

enum class Check { Hallucination, Consistency, ToolResponse, DegenerateText };
std::string_view check_name(Check c);

struct ModelVerdict {
    Check check = Check::Hallucination;
    bool passed = true;
    std::string rationale;

    bool operator==(const ModelVerdict&) const = default;
};

/// Deterministic repetition/filler filter over assistant text turns: fails
/// when one 3-gram fills more than 30% of a turn's 3-gram positions (at least
/// twice), or when a run of more than 16 filler characters appears.
ModelVerdict degenerate_text(const DataSample& sample);

struct ModelLayerOptions {
    int retries = 2;
    std::size_t max_in_flight = 3;
};

/// Three judge queries (hallucination, consistency, tool response) issued
/// concurrently, plus degenerate_text. Throws VerdictParseError when a judge
/// reply stays unreadable after the retries.
std::vector<ModelVerdict> run_model_layer(const DataSample& sample, llm::LlmBackend& backend,
                                          const ModelLayerOptions& options = {});

enum class Disposition { Keep, Discard };

struct VerificationReport {
    std::string sample_id;
    std::vector<RuleViolation> violations;
    std::vector<ModelVerdict> verdicts;
    Disposition disposition = Disposition::Discard;
};

/// keep iff no violations and every verdict passed.
Disposition disposition_for(const std::vector<RuleViolation>& violations, const std::vector<ModelVerdict>& verdicts);

/// Backend failure during verification, carrying the report built so far.
class VerificationFailed : public BackendError {
public:
    VerificationFailed(const std::string& what, VerificationReport partial)
        : BackendError(what), partial_(std::move(partial)) {}
    const VerificationReport& partial() const noexcept { return partial_; }

private:
    VerificationReport partial_;
};

/// Rule layer, then the model layer only when the rule layer is clean.
VerificationReport verify(const DataSample& sample, llm::LlmBackend& backend, const RuleLimits& limits = {},
                          const ModelLayerOptions& options = {});

Json report_to_json(const VerificationReport& r);
VerificationReport report_from_json(const Json& j);

/// Pass rates per rule_id and per check over a set of reports.
Json report_stats(const std::vector<VerificationReport>& reports);

}  // namespace toolforge::dlv
