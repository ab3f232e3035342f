#pragma once

#include <deque>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "toolforge/api.hpp"
#include "toolforge/llm/backend.hpp"
#include "toolforge/tss/context_tree.hpp"

namespace toolforge::tss {

enum class Indicator { AddFunctionality, AddParameter, AddConstraint, MutateParameterType, UpdateReturns };
inline constexpr Indicator kAllIndicators[] = {Indicator::AddFunctionality, Indicator::AddParameter,
                                               Indicator::AddConstraint, Indicator::MutateParameterType,
                                               Indicator::UpdateReturns};

std::string_view indicator_name(Indicator ind);
Indicator indicator_from_name(std::string_view name);  // throws ContractError

/// Change classes observed between two definitions:
///   add_parameter          a parameter path exists only in `after`
///   mutate_parameter_type  a shared path changed kind
///   add_constraint         pattern/enum/minimum/maximum added or changed, or a
///                          name became required
///   update_returns         the return schema differs
///   add_functionality      the description gained a word
std::set<Indicator> classify_diff(const ApiDefinition& before, const ApiDefinition& after);

/// Bounded FIFO of exemplar definitions, safe for concurrent use.
class ExampleBuffer {
public:
    explicit ExampleBuffer(std::size_t capacity = 64);

    void push(ApiDefinition api);
    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }
    ApiDefinition at(std::size_t i) const;
    std::vector<ApiDefinition> snapshot() const;

private:
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::deque<ApiDefinition> items_;
};

struct Speciation {
    std::string domain;
    std::vector<std::string> functionalities;
};

/// Asks the backend for the document's domain and functionalities. Labels
/// are deduplicated case-insensitively. Throws ExtractionError when no
/// usable structured block arrives within `retries` extra attempts.
Speciation speciate(const std::string& document, llm::LlmBackend& backend, int retries = 2, std::uint64_t seed = 0);

struct EvolveOptions {
    int retries = 2;
    std::uint64_t seed = 0;
    int first_attempt = 0;  // offsets the attempt counter sent to the backend
};

/// Generates a new API for `subtree` modelled on `example` and diversified by
/// `indicators`. The result validates, is renamed, and its structural diff
/// against `example` covers every requested indicator; otherwise the call is
/// retried and finally throws RejectedGeneration.
ApiDefinition evolve_api(const SubtreeSample& subtree, const ApiDefinition& example,
                         const std::vector<Indicator>& indicators, llm::LlmBackend& backend,
                         const EvolveOptions& options = {});

struct TssConfig {
    std::size_t n_apis = 10;
    std::size_t generations = 3;
    std::size_t breadth = 3;
    std::size_t max_indicators = 2;
    std::size_t buffer_capacity = 64;
    int retries = 2;
    std::size_t max_in_flight = 4;
    std::uint64_t seed = 0;
};

struct TssFailure {
    std::string stage;  // speciate | evolve
    std::size_t index = 0;
    std::string error;
};

struct EvolveRecord {
    ApiDefinition example;
    std::vector<Indicator> indicators;
    std::size_t pool_index = 0;
};

struct TssResult {
    ContextTree tree;
    std::vector<ApiDefinition> pool;
    std::vector<TssFailure> failures;
    std::vector<EvolveRecord> evolutions;  // one per pool entry, for auditing
};

/// Speciation over the documents (merged into `tree`), then `generations`
/// batches of evolution. Per-item failures are collected; throws Error only
/// when APIs were requested and none survived.
TssResult run_tss(const TssConfig& config, const std::vector<std::string>& seed_docs,
                  const std::vector<ApiDefinition>& exemplars, llm::LlmBackend& backend, ContextTree tree = {});

/// Built-in exemplar used when no seed examples are configured.
ApiDefinition default_exemplar();

}  // namespace toolforge::tss
