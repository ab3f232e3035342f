#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toolforge/dialog.hpp"
#include "toolforge/dlv/dlv.hpp"
#include "toolforge/llm/backend.hpp"
#include "toolforge/sdg/agents.hpp"
#include "toolforge/tss/tss.hpp"

namespace toolforge::pipeline {

// Pipeline configuration, read from JSON. Every key is optional:
//
//   seed                      master seed (CLI --seed overrides)
//   stages.{tss,sdg,dlv}      stage toggles
//   counts.apis               N
//   counts.dialogs            M
//   counts.mix.{single,parallel,dependent,non_tool_use}   fractions summing to 1
//   tss.{generations,breadth,max_indicators,buffer_capacity,retries}
//   tss.seed_docs             directory of *.txt seed documents
//   tss.exemplars             apis.jsonl of buffer exemplars
//   tss.tree                  context_tree.json to start from
//   sdg.{votes,max_rounds,min_turns,max_turns,max_steps,type_retries}
//   sdg.tools_per_dialog      [min, max] candidate tools per dialog
//   sdg.prompts               directory with {user,assistant,tool}.tmpl
//   sdg.complexity.{enabled,lower,upper,mastered,unlearned}
//   dlv.{max_chars,retries}
//   backends.{default,generator,user,assistant,tool,judge,scorer}
//       {"type": "mock", "script", "chat", "score", "uniform_p", "seed", "api_count_base", "api_count_step"}
//       {"type": "openai", "base_url", "chat_model", "score_model", "timeout_s", "max_attempts"}
//   concurrency.{max_in_flight,per_minute}
//   refill.{enabled,budget}
//   paths.{apis,tree,dialogs,samples,reports,stats,manifest,failures}   file names under the output directory
//
// Relative input paths resolve against the config file's directory.
struct PipelineConfig {
    std::uint64_t seed = 0;
    bool run_tss = true, run_sdg = true, run_dlv = true;
    std::size_t n_apis = 10;
    std::size_t n_dialogs = 50;
    std::map<DialogType, double> mix = {{DialogType::Single, 0.4},
                                        {DialogType::Parallel, 0.2},
                                        {DialogType::Dependent, 0.2},
                                        {DialogType::NonToolUse, 0.2}};
    tss::TssConfig tss;
    std::optional<std::filesystem::path> seed_docs;
    std::optional<std::filesystem::path> exemplars;
    std::optional<std::filesystem::path> initial_tree;
    sdg::DialogLimits limits;
    std::size_t tools_min = 2, tools_max = 4;
    std::optional<std::filesystem::path> prompts;
    bool complexity = true;
    std::optional<sdg::ComplexityRange> range;
    std::optional<std::filesystem::path> mastered, unlearned;
    dlv::RuleLimits rule_limits;
    dlv::ModelLayerOptions model_options;
    std::map<std::string, Json> backends;  // role -> backend spec
    std::size_t max_in_flight = 4;
    std::size_t per_minute = 0;
    bool refill = false;
    std::size_t refill_budget = 0;
    std::map<std::string, std::string> files = {{"apis", "apis.jsonl"},       {"tree", "context_tree.json"},
                                                {"dialogs", "dialogs.jsonl"}, {"samples", "samples.jsonl"},
                                                {"reports", "reports.jsonl"}, {"stats", "stats.json"},
                                                {"manifest", "manifest.json"}, {"failures", "failures.jsonl"}};
    Json source = Json::object();  // the JSON this was read from, for hashing
};

/// Throws ConfigError on unknown types, negative counts, a mix not summing to
/// 1 within 1e-9, or duplicate output file names.
PipelineConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = ".");
PipelineConfig load_config(const std::filesystem::path& path);
/// Hex hash of the canonical config JSON plus the effective seed.
std::string config_hash(const PipelineConfig& config);

/// Dialog count per type by largest remainder (ties in type order).
std::map<DialogType, std::size_t> allocate_mix(const std::map<DialogType, double>& mix, std::size_t total);

/// Backends per role. Roles: generator (TSS), user, assistant, tool, judge,
/// scorer; unset roles fall back to "default". Equal specs share one instance.
struct Backends {
    llm::BackendPtr generator, dialog, judge, scorer;
};
Backends make_backends(const PipelineConfig& config);

struct CorpusStats {
    std::map<std::string, std::size_t> per_type;
    std::vector<std::size_t> histogram;  // 20 equal-width bins over the observed loss range
    double loss_min = 0.0, loss_max = 0.0;
    std::size_t scored = 0;
    std::map<std::string, std::size_t> per_rule;
    std::size_t domains = 0;
    std::size_t samples = 0;
};

CorpusStats compute_stats(const std::vector<DataSample>& corpus, const std::vector<dlv::VerificationReport>& reports = {});
Json stats_to_json(const CorpusStats& s);

struct StageFailure {
    std::string stage;
    std::string item;
    std::string error;
};

struct RunResult {
    CorpusStats stats;
    std::map<std::string, std::size_t> outputs;  // stage -> items produced
    std::vector<StageFailure> failures;
    std::vector<std::string> resumed;            // stages loaded from disk
};

/// Stage that produced nothing although it was asked for work.
class EmptyStage : public Error {
public:
    explicit EmptyStage(const std::string& stage) : Error("stage " + stage + " produced zero outputs"), stage_(stage) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct RunOptions {
    bool resume = true;  // reuse finished stages recorded in the manifest
};

/// Runs the enabled stages into `out_dir`. Each finished stage writes its
/// artifacts and updates the manifest, so a later call with the same config
/// picks up where this one stopped.
RunResult run(const PipelineConfig& config, const std::filesystem::path& out_dir, const Backends& backends,
              const RunOptions& options = {});

/// Individual stages, as used by the CLI verbs.
tss::TssResult run_tss_stage(const PipelineConfig& config, const Backends& backends);
std::vector<DataSample> run_sdg_stage(const PipelineConfig& config, const std::vector<ApiDefinition>& pool,
                                      const Backends& backends, std::vector<StageFailure>& failures);
std::vector<dlv::VerificationReport> run_dlv_stage(const PipelineConfig& config, const std::vector<DataSample>& dialogs,
                                                   const Backends& backends, std::vector<StageFailure>& failures);

}  // namespace toolforge::pipeline
