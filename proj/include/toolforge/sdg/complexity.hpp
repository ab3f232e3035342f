#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "toolforge/dialog.hpp"
#include "toolforge/llm/backend.hpp"

namespace toolforge::sdg {

/// Scoring split of a sample: `prompt` is the system prompt, the tool list
/// and every turn before the final assistant turn, ending in "Assistant: ";
/// `target` is that final turn (canonical call-string or text).
llm::ScoreRequest scoring_request(const DataSample& sample);

/// Mean negative log-probability of the final assistant turn given the rest.
/// Throws ScoringUnsupported, TokenizationEmpty, ContractError (no assistant turn).
ComplexityScore evaluate_complexity(const DataSample& sample, llm::LlmBackend& scorer);

/// Loss from a raw log-prob stream; throws TokenizationEmpty when empty.
ComplexityScore loss_from_logprobs(const std::vector<double>& logprobs);

struct ComplexityRange {
    double lower = 0.0;
    double upper = 0.0;
};

/// lower = max mastered loss, upper = min unlearned loss. When lower > upper
/// both collapse onto their midpoint and widen by half the population
/// standard deviation of the mastered losses.
ComplexityRange calibrate_from_losses(const std::vector<double>& mastered, const std::vector<double>& unlearned);
ComplexityRange calibrate_range(const std::vector<DataSample>& mastered, const std::vector<DataSample>& unlearned,
                                llm::LlmBackend& scorer);

enum class Guidance { Complicate, Simplify, Keep };
std::string_view guidance_name(Guidance g);

/// Closed interval: boundary losses keep.
Guidance guidance_for(const ComplexityScore& score, const ComplexityRange& range);

/// 1 - Jaccard similarity between the word sets of the query and of the
/// tools' names and descriptions. Diagnostic only.
double query_api_dissimilarity(std::string_view query, const std::vector<ApiDefinition>& tools);

}  // namespace toolforge::sdg
