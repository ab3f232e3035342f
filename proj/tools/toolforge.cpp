#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "toolforge/pipeline/pipeline.hpp"
#include "toolforge/pipeline/samplers.hpp"
#include "toolforge/serialize.hpp"

namespace fs = std::filesystem;
using namespace toolforge;

namespace {

constexpr int kOk = 0, kConfig = 2, kEmpty = 3, kBackend = 4, kOther = 1;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "pipeline config JSON");
    cmd->add_option("--seed", c.seed, "master seed, overrides the config");
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
}

pipeline::PipelineConfig load(const Common& c) {
    auto config = c.config.empty() ? pipeline::config_from_json(Json::object()) : pipeline::load_config(c.config);
    if (c.seed) config.seed = *c.seed;
    return config;
}

fs::path out_file(const pipeline::PipelineConfig& config, const Common& c, const std::string& key) {
    return fs::path(c.out) / config.files.at(key);
}

void write_failures(const fs::path& path, const std::vector<pipeline::StageFailure>& failures) {
    std::vector<Json> lines;
    for (const auto& f : failures) lines.push_back(Json{{"stage", f.stage}, {"item", f.item}, {"error", f.error}});
    write_jsonl(path, lines);
}

int cmd_tss(const Common& c) {
    auto config = load(c);
    auto backends = pipeline::make_backends(config);
    auto result = pipeline::run_tss_stage(config, backends);
    fs::create_directories(c.out);
    write_apis(out_file(config, c, "apis"), result.pool);
    tss::write_tree(out_file(config, c, "tree"), result.tree);
    std::cout << "tss: " << result.pool.size() << " APIs, " << result.failures.size() << " failures\n";
    return result.pool.empty() ? kEmpty : kOk;
}

int cmd_sdg(const Common& c, const std::string& apis_in) {
    auto config = load(c);
    auto pool = read_apis(apis_in.empty() ? out_file(config, c, "apis") : fs::path(apis_in));
    auto backends = pipeline::make_backends(config);
    std::vector<pipeline::StageFailure> failures;
    auto dialogs = pipeline::run_sdg_stage(config, pool, backends, failures);
    fs::create_directories(c.out);
    write_samples(out_file(config, c, "dialogs"), dialogs);
    write_failures(out_file(config, c, "failures"), failures);
    std::cout << "sdg: " << dialogs.size() << " dialogs, " << failures.size() << " failures\n";
    return kOk;
}

int cmd_dlv(const Common& c, const std::string& in) {
    auto config = load(c);
    auto dialogs = read_samples(in.empty() ? out_file(config, c, "dialogs") : fs::path(in));
    auto backends = pipeline::make_backends(config);
    std::vector<pipeline::StageFailure> failures;
    auto reports = pipeline::run_dlv_stage(config, dialogs, backends, failures);
    std::vector<DataSample> kept;
    std::vector<Json> lines;
    for (std::size_t i = 0; i < dialogs.size(); ++i) {
        lines.push_back(dlv::report_to_json(reports[i]));
        if (reports[i].disposition == dlv::Disposition::Keep) kept.push_back(dialogs[i]);
    }
    fs::create_directories(c.out);
    write_jsonl(out_file(config, c, "reports"), lines);
    write_samples(out_file(config, c, "samples"), kept);
    write_failures(out_file(config, c, "failures"), failures);
    std::cout << "dlv: kept " << kept.size() << " of " << dialogs.size() << "\n";
    return !dialogs.empty() && kept.empty() ? kEmpty : kOk;
}

int cmd_run(const Common& c, bool fresh) {
    auto config = load(c);
    auto backends = pipeline::make_backends(config);
    auto result = pipeline::run(config, c.out, backends, {!fresh});
    for (const auto& [stage, n] : result.outputs) std::cout << stage << ": " << n << "\n";
    for (const auto& s : result.resumed) std::cout << "resumed " << s << "\n";
    if (!result.failures.empty()) std::cout << result.failures.size() << " item failures\n";
    return kOk;
}

int cmd_sample_complexity(const Common& c, const std::string& in, std::size_t n) {
    auto config = load(c);
    auto corpus = read_samples(in.empty() ? out_file(config, c, "samples") : fs::path(in));
    auto split = pipeline::sample_by_complexity(corpus, n);
    fs::create_directories(c.out);
    write_samples(fs::path(c.out) / "easy.jsonl", split.easy);
    write_samples(fs::path(c.out) / "medium.jsonl", split.medium);
    write_samples(fs::path(c.out) / "hard.jsonl", split.hard);
    std::cout << "easy/medium/hard: " << split.easy.size() << "/" << split.medium.size() << "/" << split.hard.size() << "\n";
    return kOk;
}

int cmd_sample_diversity(const Common& c, const std::string& in, const std::string& tree_in,
                         pipeline::DiversityOptions options) {
    auto config = load(c);
    auto corpus = read_samples(in.empty() ? out_file(config, c, "samples") : fs::path(in));
    auto tree = tss::read_tree(tree_in.empty() ? out_file(config, c, "tree") : fs::path(tree_in));
    options.seed = mix_seed(config.seed, 0xD1);
    auto picked = pipeline::sample_by_diversity(corpus, tree, options);
    fs::create_directories(c.out);
    write_samples(fs::path(c.out) / "diverse.jsonl", picked);
    std::cout << "diversity: " << picked.size() << " samples\n";
    return picked.empty() ? kEmpty : kOk;
}

int cmd_stats(const Common& c, const std::string& in, const std::string& reports_in) {
    auto config = load(c);
    auto corpus = read_samples(in.empty() ? out_file(config, c, "samples") : fs::path(in));
    std::vector<dlv::VerificationReport> reports;
    fs::path rp = reports_in.empty() ? out_file(config, c, "reports") : fs::path(reports_in);
    if (fs::exists(rp)) {
        for (const auto& j : read_jsonl(rp)) reports.push_back(dlv::report_from_json(j));
    }
    Json j = pipeline::stats_to_json(pipeline::compute_stats(corpus, reports));
    if (!reports.empty()) j["dlv"] = dlv::report_stats(reports);
    fs::create_directories(c.out);
    write_json_file(out_file(config, c, "stats"), j);
    std::cout << j.dump(2) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"toolforge: synthetic tool-use dialog generation and verification"};
    app.require_subcommand(1);

    Common common;
    std::string in, apis_in, tree_in, reports_in;
    bool fresh = false;
    std::size_t n = 0;
    pipeline::DiversityOptions div;

    auto* tss = app.add_subcommand("tss", "synthesize an API pool and context tree");
    add_common(tss, common);
    auto* sdg = app.add_subcommand("sdg", "generate dialogs over an API pool");
    add_common(sdg, common);
    sdg->add_option("--apis", apis_in, "apis.jsonl (default: <out>/apis.jsonl)");
    auto* dlv = app.add_subcommand("dlv", "verify dialogs and keep the clean ones");
    add_common(dlv, common);
    dlv->add_option("--in", in, "dialogs JSONL (default: <out>/dialogs.jsonl)");
    auto* run = app.add_subcommand("run", "run all enabled stages, resuming finished ones");
    add_common(run, common);
    run->add_flag("--fresh", fresh, "ignore the manifest and rerun every stage");
    auto* sc = app.add_subcommand("sample-complexity", "easy/medium/hard subsets by loss");
    add_common(sc, common);
    sc->add_option("--in", in, "scored samples JSONL");
    sc->add_option("-n,--n", n, "subset size")->required();
    auto* sd = app.add_subcommand("sample-diversity", "subset covering API clusters");
    add_common(sd, common);
    sd->add_option("--in", in, "samples JSONL");
    sd->add_option("--tree", tree_in, "context_tree.json");
    sd->add_option("--clusters", div.clusters, "number of API clusters")->capture_default_str();
    sd->add_option("--use", div.clusters_used, "clusters to draw from")->capture_default_str();
    sd->add_option("--max", div.max_size, "maximum subset size (0: all)")->capture_default_str();
    auto* st = app.add_subcommand("stats", "corpus statistics");
    add_common(st, common);
    st->add_option("--in", in, "samples JSONL");
    st->add_option("--reports", reports_in, "reports JSONL");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*tss) return cmd_tss(common);
        if (*sdg) return cmd_sdg(common, apis_in);
        if (*dlv) return cmd_dlv(common, in);
        if (*run) return cmd_run(common, fresh);
        if (*sc) return cmd_sample_complexity(common, in, n);
        if (*sd) return cmd_sample_diversity(common, in, tree_in, div);
        if (*st) return cmd_stats(common, in, reports_in);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const ScriptParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const pipeline::EmptyStage& e) {
        std::cerr << e.what() << "\n";
        return kEmpty;
    } catch (const BackendError& e) {
        std::cerr << "backend failure: " << e.what() << "\n";
        return kBackend;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
