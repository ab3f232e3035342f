#include "toolforge/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "toolforge/serialize.hpp"

namespace toolforge::pipeline {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_seed_docs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("seed_docs is not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<std::string> docs;
    for (const auto& f : files) {
        std::ifstream in(f);
        std::stringstream ss;
        ss << in.rdbuf();
        docs.push_back(ss.str());
    }
    return docs;
}

Json failure_json(const StageFailure& f) { return Json{{"stage", f.stage}, {"item", f.item}, {"error", f.error}}; }

struct Job {
    std::size_t index;
    DialogType type;
};

std::string sample_id_for(std::size_t index) {
    std::string n = std::to_string(index);
    return "dlg-" + std::string(n.size() < 5 ? 5 - n.size() : 0, '0') + n;
}

struct Generated {
    std::optional<DataSample> sample;
    std::string error;
    bool backend_error = false;
};

std::vector<DataSample> generate_jobs(const PipelineConfig& config, const std::vector<ApiDefinition>& pool,
                                      const Backends& backends, const std::vector<Job>& jobs,
                                      const std::optional<sdg::ComplexityRange>& range,
                                      std::vector<StageFailure>& failures, bool& any_backend_error) {
    std::optional<sdg::AgentScripts> scripts;
    if (config.prompts) scripts = sdg::AgentScripts::load(*config.prompts);
    const std::string system_prompt = sdg::default_system_prompt();
    auto results = bounded_parallel_map<Generated>(jobs.size(), config.max_in_flight, [&](std::size_t j) {
        const Job& job = jobs[j];
        Generated g;
        sdg::DialogRequest req;
        req.sample_id = sample_id_for(job.index);
        req.system_prompt = system_prompt;
        req.dialog_type = job.type;
        req.seed = mix_seed(config.seed, 0x5D6000 + job.index);
        req.scripts = scripts ? &*scripts : nullptr;
        Rng rng(mix_seed(req.seed, 0x7001));
        if (!pool.empty()) {
            std::size_t hi = std::min(config.tools_max, pool.size());
            std::size_t lo = std::min(config.tools_min, hi);
            std::size_t n = rng.between(lo, hi);
            std::vector<std::size_t> idx(pool.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            rng.shuffle(idx);
            for (std::size_t i = 0; i < n; ++i) req.tools.push_back(pool[idx[i]]);
        }
        try {
            g.sample = sdg::generate_dialog(req, *backends.dialog, config.complexity ? backends.scorer.get() : nullptr,
                                            range, config.limits);
        } catch (const BackendError& e) {
            g.error = e.what();
            g.backend_error = true;
        } catch (const Error& e) {
            g.error = e.what();
        }
        return g;
    });
    std::vector<DataSample> out;
    for (std::size_t j = 0; j < results.size(); ++j) {
        if (results[j].sample) {
            out.push_back(std::move(*results[j].sample));
        } else {
            failures.push_back({"sdg", sample_id_for(jobs[j].index), results[j].error});
            any_backend_error = any_backend_error || results[j].backend_error;
        }
    }
    return out;
}

std::optional<sdg::ComplexityRange> resolve_range(const PipelineConfig& config, const Backends& backends) {
    if (!config.complexity) return std::nullopt;
    if (config.range) return config.range;
    if (config.mastered && config.unlearned) {
        return sdg::calibrate_range(read_samples(*config.mastered), read_samples(*config.unlearned), *backends.scorer);
    }
    return std::nullopt;
}

std::vector<Job> planned_jobs(const PipelineConfig& config) {
    auto counts = allocate_mix(config.mix, config.n_dialogs);
    std::vector<DialogType> types;
    for (auto t : kAllDialogTypes) types.insert(types.end(), counts[t], t);
    Rng rng(mix_seed(config.seed, 0x3117));
    rng.shuffle(types);
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < types.size(); ++i) jobs.push_back({i, types[i]});
    return jobs;
}

}  // namespace

tss::TssResult run_tss_stage(const PipelineConfig& config, const Backends& backends) {
    std::vector<std::string> docs;
    if (config.seed_docs) docs = read_seed_docs(*config.seed_docs);
    std::vector<ApiDefinition> exemplars;
    if (config.exemplars) exemplars = read_apis(*config.exemplars);
    tss::ContextTree tree;
    if (config.initial_tree) tree = tss::read_tree(*config.initial_tree);
    if (docs.empty() && tree.empty() && config.n_apis > 0) throw ConfigError("tss needs seed_docs or a tree");
    tss::TssConfig tc = config.tss;
    tc.n_apis = config.n_apis;
    tc.seed = mix_seed(config.seed, 0x755);
    return tss::run_tss(tc, docs, exemplars, *backends.generator, std::move(tree));
}

std::vector<DataSample> run_sdg_stage(const PipelineConfig& config, const std::vector<ApiDefinition>& pool,
                                      const Backends& backends, std::vector<StageFailure>& failures) {
    bool backend_error = false;
    auto out = generate_jobs(config, pool, backends, planned_jobs(config), resolve_range(config, backends), failures,
                             backend_error);
    if (out.empty() && config.n_dialogs > 0) {
        if (backend_error) throw BackendError("sdg: every dialog failed; first error: " + failures.front().error);
        throw EmptyStage("sdg");
    }
    return out;
}

std::vector<dlv::VerificationReport> run_dlv_stage(const PipelineConfig& config, const std::vector<DataSample>& dialogs,
                                                   const Backends& backends, std::vector<StageFailure>& failures) {
    struct Outcome {
        dlv::VerificationReport report;
        std::string error;
    };
    auto outcomes = bounded_parallel_map<Outcome>(dialogs.size(), config.max_in_flight, [&](std::size_t i) {
        Outcome o;
        try {
            o.report = dlv::verify(dialogs[i], *backends.judge, config.rule_limits, config.model_options);
        } catch (const dlv::VerificationFailed& e) {
            o.report = e.partial();
            o.error = e.what();
        } catch (const Error& e) {
            o.report.sample_id = dialogs[i].sample_id;
            o.report.disposition = dlv::Disposition::Discard;
            o.error = e.what();
        }
        return o;
    });
    std::vector<dlv::VerificationReport> reports;
    std::size_t errors = 0;
    for (auto& o : outcomes) {
        if (!o.error.empty()) {
            failures.push_back({"dlv", o.report.sample_id, o.error});
            ++errors;
        }
        reports.push_back(std::move(o.report));
    }
    if (!dialogs.empty() && errors == dialogs.size()) {
        throw BackendError("dlv: every verification failed; first error: " + failures.back().error);
    }
    return reports;
}

CorpusStats compute_stats(const std::vector<DataSample>& corpus, const std::vector<dlv::VerificationReport>& reports) {
    CorpusStats s;
    s.samples = corpus.size();
    for (auto t : kAllDialogTypes) s.per_type[std::string(dialog_type_name(t))] = 0;
    std::vector<double> losses;
    std::set<std::string> domains;
    for (const auto& d : corpus) {
        ++s.per_type[std::string(dialog_type_name(d.dialog_type))];
        if (d.complexity) losses.push_back(d.complexity->loss);
        for (const auto& t : d.tool_list) {
            if (!t.domain_path.empty()) domains.insert(t.domain_path[0]);
        }
    }
    s.domains = domains.size();
    s.histogram.assign(20, 0);
    s.scored = losses.size();
    if (!losses.empty()) {
        s.loss_min = *std::min_element(losses.begin(), losses.end());
        s.loss_max = *std::max_element(losses.begin(), losses.end());
        double width = (s.loss_max - s.loss_min) / 20.0;
        for (double x : losses) {
            std::size_t bin = width > 0 ? static_cast<std::size_t>(std::floor((x - s.loss_min) / width)) : 0;
            ++s.histogram[std::min<std::size_t>(bin, 19)];
        }
    }
    for (const auto& r : reports) {
        for (const auto& v : r.violations) ++s.per_rule[v.rule_id];
    }
    return s;
}

Json stats_to_json(const CorpusStats& s) {
    return Json{{"samples", s.samples},
                {"per_type", s.per_type},
                {"complexity", {{"scored", s.scored}, {"min", s.loss_min}, {"max", s.loss_max}, {"histogram", s.histogram}}},
                {"per_rule", s.per_rule},
                {"domains", s.domains}};
}

RunResult run(const PipelineConfig& config, const fs::path& out_dir, const Backends& backends, const RunOptions& options) {
    fs::create_directories(out_dir);
    auto file = [&](const std::string& key) { return out_dir / config.files.at(key); };
    const std::string hash = config_hash(config);
    Json manifest = Json{{"config_hash", hash}, {"seed", config.seed}, {"stages", Json::object()}};
    if (options.resume && fs::exists(file("manifest"))) {
        Json old = read_json_file(file("manifest"));
        if (old.value("config_hash", std::string{}) == hash && old.contains("stages")) manifest = old;
    }
    auto done = [&](const char* stage, std::initializer_list<const char*> keys) {
        if (!manifest["stages"].contains(stage)) return false;
        for (const char* k : keys) {
            if (!fs::exists(file(k))) return false;
        }
        return true;
    };
    auto save_manifest = [&] { write_json_file(file("manifest"), manifest); };

    RunResult result;
    std::vector<StageFailure>& failures = result.failures;
    std::vector<Json> failure_lines;
    if (fs::exists(file("failures")) && !manifest["stages"].empty()) failure_lines = read_jsonl(file("failures"));
    auto flush_failures = [&](std::size_t from) {
        for (std::size_t i = from; i < failures.size(); ++i) failure_lines.push_back(failure_json(failures[i]));
        write_jsonl(file("failures"), failure_lines);
    };

    std::vector<ApiDefinition> pool;
    if (config.run_tss) {
        if (done("tss", {"apis", "tree"})) {
            pool = read_apis(file("apis"));
            result.resumed.push_back("tss");
        } else {
            std::size_t from = failures.size();
            tss::TssResult tr;
            try {
                tr = run_tss_stage(config, backends);
            } catch (const EmptyTree&) {
                throw EmptyStage("tss");
            } catch (const BackendError&) {
                throw;
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                if (config.n_apis > 0) throw EmptyStage("tss");
                throw;
            }
            for (const auto& f : tr.failures) failures.push_back({"tss", f.stage + "#" + std::to_string(f.index), f.error});
            pool = tr.pool;
            write_apis(file("apis"), pool);
            tss::write_tree(file("tree"), tr.tree);
            manifest["stages"]["tss"] = {{"apis", pool.size()}, {"tree_nodes", tr.tree.node_count()}, {"failures", tr.failures.size()}};
            flush_failures(from);
            save_manifest();
        }
        result.outputs["tss"] = pool.size();
    } else if (fs::exists(file("apis"))) {
        pool = read_apis(file("apis"));
    }

    std::vector<DataSample> dialogs;
    if (config.run_sdg) {
        if (pool.empty() && config.n_dialogs > 0) throw ConfigError("sdg needs an API pool (" + file("apis").string() + ")");
        if (done("sdg", {"dialogs"})) {
            dialogs = read_samples(file("dialogs"));
            result.resumed.push_back("sdg");
        } else {
            std::size_t from = failures.size();
            dialogs = run_sdg_stage(config, pool, backends, failures);
            write_samples(file("dialogs"), dialogs);
            manifest["stages"]["sdg"] = {{"dialogs", dialogs.size()}, {"failures", failures.size() - from}};
            flush_failures(from);
            save_manifest();
        }
        result.outputs["sdg"] = dialogs.size();
    } else if (fs::exists(file("dialogs"))) {
        dialogs = read_samples(file("dialogs"));
    }

    std::vector<DataSample> kept;
    std::vector<dlv::VerificationReport> reports;
    if (config.run_dlv) {
        if (done("dlv", {"reports", "samples"})) {
            for (const auto& j : read_jsonl(file("reports"))) reports.push_back(dlv::report_from_json(j));
            kept = read_samples(file("samples"));
            result.resumed.push_back("dlv");
        } else {
            std::size_t from = failures.size();
            reports = run_dlv_stage(config, dialogs, backends, failures);
            for (std::size_t i = 0; i < dialogs.size(); ++i) {
                if (reports[i].disposition == dlv::Disposition::Keep) kept.push_back(dialogs[i]);
            }
            if (config.refill && config.refill_budget > 0 && kept.size() < config.n_dialogs) {
                auto range = resolve_range(config, backends);
                std::map<DialogType, std::size_t> missing;
                for (std::size_t i = 0; i < dialogs.size(); ++i) {
                    if (reports[i].disposition != dlv::Disposition::Keep) ++missing[dialogs[i].dialog_type];
                }
                std::size_t next = config.n_dialogs, budget = config.refill_budget;
                for (auto t : kAllDialogTypes) {
                    while (missing[t] > 0 && budget > 0) {
                        --budget;
                        bool backend_error = false;
                        auto extra = generate_jobs(config, pool, backends, {{next++, t}}, range, failures, backend_error);
                        if (extra.empty()) continue;
                        auto more = run_dlv_stage(config, extra, backends, failures);
                        reports.push_back(more[0]);
                        if (more[0].disposition == dlv::Disposition::Keep) {
                            kept.push_back(extra[0]);
                            --missing[t];
                        }
                    }
                }
            }
            std::vector<Json> lines;
            for (const auto& r : reports) lines.push_back(dlv::report_to_json(r));
            write_jsonl(file("reports"), lines);
            write_samples(file("samples"), kept);
            manifest["stages"]["dlv"] = {{"reports", reports.size()}, {"kept", kept.size()}, {"failures", failures.size() - from}};
            flush_failures(from);
            save_manifest();
        }
        result.outputs["dlv"] = kept.size();
    }

    const auto& corpus = config.run_dlv ? kept : dialogs;
    result.stats = compute_stats(corpus, reports);
    write_json_file(file("stats"), stats_to_json(result.stats));
    if (config.run_dlv && !dialogs.empty() && kept.empty()) throw EmptyStage("dlv");
    return result;
}

}  // namespace toolforge::pipeline
