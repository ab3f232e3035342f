#pragma once

#include <optional>
#include <string>

#include "toolforge/api.hpp"
#include "toolforge/llm/backend.hpp"
#include "toolforge/util.hpp"

namespace toolforge::llm {

// Deterministic stand-in for the generator and judge agents. It reads the
// request's `meta` object, never the prompt text, and derives every choice
// from meta fields, so identical requests always produce identical replies.
//
// Task tags and the meta fields each one reads:
//   tss.speciate    document
//   tss.evolve      domain, labels, example (API JSON), indicators, attempt
//   sdg.user        dialog_type, tools, history, turn_index, target_turns,
//                   guidance (complicate|simplify|keep), previous_query, seed
//   sdg.assistant   tools, history, vote_index, seed
//   sdg.tool        call {name, arguments}, api (API JSON or null)
//   dlv.judge       check (hallucination|consistency|tool_response), sample
//
// User queries use a fixed phrasing the simulated assistant can read back:
//   "Please call NAME with a=LIT, b=LIT."  (several clauses form a parallel request)
//   "Then call NAME with a=LIT using the FIELD returned by PREV as PARAM."
//   "I'd like to use NAME."                (no arguments given; assistant asks for them)

/// Returns nullopt for unknown or missing task tags.
std::optional<std::string> simulate_reply(const ChatRequest& req);

/// Deterministic argument value satisfying `schema` (enum, pattern, kind).
Value synthesize_argument(const ParamSchema& schema, const std::string& name, Rng& rng);

/// Deterministic tool result conforming to `returns` when given.
Json synthesize_tool_result(const ApiDefinition* api, const std::string& call_text);

}  // namespace toolforge::llm
