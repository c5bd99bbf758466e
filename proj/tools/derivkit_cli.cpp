#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "derivkit/analysis.hpp"
#include "derivkit/catalog.hpp"
#include "derivkit/codec.hpp"
#include "derivkit/config.hpp"
#include "derivkit/errors.hpp"
#include "derivkit/runner.hpp"
#include "derivkit/util.hpp"

using namespace derivkit;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIntegrity = 2, kTransport = 3 };

struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> task;
    std::vector<std::string> rules;
    std::size_t n = 50;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> model;
    std::optional<std::string> endpoint;
    std::string strategy = "none";
    std::optional<int> samples;
    std::optional<std::size_t> workers;
    std::optional<std::string> judge;
    bool fresh_context = false;
    bool timing = false;
    bool stamp_time = false;
    bool reuse_chains = false;
    std::optional<std::string> out;
    std::optional<std::string> cases;
    std::optional<std::string> transcripts;
    std::optional<std::string> scores;
    std::optional<std::string> attribution;
    std::optional<std::string> annotations;
};

HarnessConfig resolve_config(const Flags& f) {
    auto cfg = load_config(f.config ? std::optional<std::filesystem::path>(*f.config) : std::nullopt);
    if (f.endpoint) cfg.endpoint = *f.endpoint;
    if (f.model) cfg.model = *f.model;
    if (f.samples) apply_config_value(cfg, "samples", std::to_string(*f.samples));
    if (f.workers) apply_config_value(cfg, "workers", std::to_string(*f.workers));
    if (f.seed) cfg.seed = *f.seed;
    if (f.judge) cfg.judge = *f.judge;
    return cfg;
}

std::optional<std::string> api_key() {
    if (const char* key = std::getenv(std::string(kApiKeyEnv).c_str()); key && *key) return std::string(key);
    return std::nullopt;
}

std::string require(const std::optional<std::string>& v, std::string_view flag) {
    if (!v || v->empty()) throw UsageError("missing required flag " + std::string(flag));
    return *v;
}

std::optional<Corpus> corpus_for(const HarnessConfig& cfg, TaskId task) {
    const auto it = cfg.corpora.find(task);
    if (it == cfg.corpora.end()) return std::nullopt;
    return load_corpus(it->second, task);
}

std::string registry_listing(const RuleRegistry& registry) {
    std::string out;
    for (const auto& id : registry.rule_ids()) out += (out.empty() ? "" : ", ") + id;
    return out;
}

std::vector<std::string> select_rules(const Flags& f, const RuleRegistry& registry) {
    std::optional<TaskId> task;
    if (f.task) {
        task = parse_task(*f.task);
        if (!task) throw UsageError("unknown task " + *f.task);
    }
    std::vector<std::string> requested;
    for (const auto& item : f.rules) {
        for (const auto& part : util::split(item, ",")) {
            const std::string id(util::trim(part));
            if (!id.empty()) requested.push_back(id);
        }
    }
    std::vector<std::string> out;
    if (requested.empty() || (requested.size() == 1 && requested[0] == "all")) {
        if (requested.empty() && !task) throw UsageError("give --rule (ids or 'all') or --task");
        for (const auto& r : registry.rules()) {
            if (!task || r.task == *task) out.push_back(r.rule_id);
        }
        return out;
    }
    std::set<std::string> seen;
    for (const auto& id : requested) {
        if (!registry.contains(id)) throw UsageError("unknown rule " + id + "; known rules: " + registry_listing(registry));
        if (task && registry.rule(id).task != *task) throw UsageError("rule " + id + " does not belong to task " + *f.task);
        if (seen.insert(id).second) out.push_back(id);
    }
    return out;
}

int cmd_generate(const Flags& f) {
    const auto& registry = standard_registry();
    const auto cfg = resolve_config(f);
    const auto out = require(f.out, "--out");
    const auto rules = select_rules(f, registry);

    std::vector<CasePair> cases;
    for (const auto& id : rules) {
        const auto corpus = corpus_for(cfg, registry.rule(id).task);
        auto batch = build_cases(registry, id, f.n, cfg.seed, corpus ? &*corpus : nullptr);
        cases.insert(cases.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
    }
    const CaseManifest manifest{rules, f.n, cfg.seed, cases.size()};
    const auto digest = write_case_file(out, manifest, cases);
    std::cout << "wrote " << cases.size() << " cases for " << rules.size() << " rule(s) to " << out << " (sha256 "
              << digest.substr(0, 12) << ")\n";
    return kOk;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int cmd_run(const Flags& f) {
    const auto& registry = standard_registry();
    const auto cfg = resolve_config(f);
    const auto cases_path = require(f.cases, "--cases");
    const auto out = require(f.out, "--out");
    if (cfg.model.empty()) throw UsageError("missing required flag --model");
    const auto strategy = parse_strategy(f.strategy);
    if (!strategy) throw UsageError("unknown strategy " + f.strategy + "; use none, dp, cot, sb, os, fs or an");

    const auto model_cfg = cfg.model_config();
    auto model = make_model(cfg.model, model_cfg, api_key());
    const auto file = read_case_file(cases_path, registry);

    DemoTable demos;
    if (required_demos(*strategy) > 0) {
        for (const auto& id : file.manifest.rules) {
            const auto corpus = corpus_for(cfg, registry.rule(id).task);
            demos[id] = make_demo_pairs(registry, id, file.manifest.seed, *strategy, corpus ? &*corpus : nullptr);
        }
    }

    RunOptions options;
    options.strategy = *strategy;
    options.cfg = model_cfg;
    options.fresh_context = f.fresh_context;
    options.record_timing = f.timing;
    options.workers = cfg.workers;

    RunManifest manifest;
    manifest.created_at = f.stamp_time ? utc_now() : "";
    manifest.rules = file.manifest.rules;
    manifest.model_name = model->name();
    manifest.temperature = model_cfg.temperature;
    manifest.max_tokens = model_cfg.max_tokens;
    manifest.samples_k = model_cfg.samples_k;
    manifest.strategy = *strategy;
    manifest.fresh_context = f.fresh_context;
    manifest.case_count = file.cases.size();
    manifest.seed = file.manifest.seed;
    manifest.case_digest = file.digest;
    manifest.run_id = make_run_id(manifest);

    TranscriptWriter writer(out, manifest);
    std::size_t pass = 0, fail = 0, unparseable = 0, errored = 0;
    run_cases(registry, file.cases, *model, options, demos, [&](const TranscriptRecord& r) {
        writer.append(r);
        if (r.errored()) {
            ++errored;
        } else if (r.verdict->status == VerdictStatus::pass) {
            ++pass;
        } else if (r.verdict->status == VerdictStatus::fail) {
            ++fail;
        } else {
            ++unparseable;
        }
    });
    std::cout << "run " << manifest.run_id << ": " << file.cases.size() << " cases, pass " << pass << ", fail " << fail
              << ", unparseable " << unparseable << ", errored " << errored << "\n";
    if (errored > 0 && errored == file.cases.size()) {
        std::cerr << "every model call failed; see the error field in " << out << "\n";
        return kTransport;
    }
    return kOk;
}

int cmd_score(const Flags& f) {
    const auto& registry = standard_registry();
    const auto transcripts = require(f.transcripts, "--transcripts");
    const auto out = require(f.out, "--out");
    std::optional<std::string> digest;
    if (f.cases) digest = read_case_file(*f.cases, registry).digest;
    const auto run = load_run(transcripts, digest);
    const auto reports = score_records(registry, run.records);
    util::write_file(out, scores_csv(reports));
    for (const auto& r : reports) {
        std::cout << r.rule_id << "  gamma=" << util::fixed(r.gamma, 6) << "  (" << r.passes << "/" << r.total
                  << ", unparseable " << r.unparseable << ", errored " << r.errored << ")\n";
    }
    return kOk;
}

int cmd_attribute(const Flags& f) {
    const auto& registry = standard_registry();
    auto cfg = resolve_config(f);
    const auto transcripts = require(f.transcripts, "--transcripts");
    const auto out = require(f.out, "--out");
    if (cfg.judge.empty()) throw UsageError("missing required flag --judge");

    std::optional<std::string> digest;
    std::vector<CasePair> cases;
    if (f.cases) {
        auto file = read_case_file(*f.cases, registry);
        digest = file.digest;
        cases = std::move(file.cases);
    }
    const auto run = load_run(transcripts, digest);

    auto judge_cfg = cfg.model_config();
    judge_cfg.model_name = cfg.judge;
    judge_cfg.samples_k = 1;
    auto judge = make_model(cfg.judge, judge_cfg, api_key());

    JudgeOptions options;
    options.judge_cfg = judge_cfg;
    options.regenerate = !f.reuse_chains && !cases.empty();
    options.registry = &registry;
    std::unique_ptr<ChatModel> subject;
    if (options.regenerate) {
        auto subject_cfg = cfg.model_config();
        subject_cfg.temperature = run.manifest.temperature;
        subject_cfg.max_tokens = run.manifest.max_tokens;
        subject_cfg.samples_k = run.manifest.samples_k;
        subject_cfg.model_name = f.model ? *f.model : run.manifest.model_name;
        subject = make_model(subject_cfg.model_name, subject_cfg, api_key());
        options.subject = subject.get();
        options.subject_options.cfg = subject_cfg;
        options.subject_options.fresh_context = run.manifest.fresh_context;
    }

    const auto records = attribute_failures(run.records, *judge, options, cases);
    write_attribution(out, records);
    std::vector<ErrorCategory> cats;
    for (const auto& r : records) cats.push_back(r.category);
    const auto summary = summarize_attribution(cats);
    std::cout << "attributed " << records.size() << " failures (" << summary.unclassifiable << " unclassifiable)\n";
    for (const auto& [c, n] : summary.counts) {
        const auto frac = summary.fractions.find(c);
        std::cout << "  " << display_name(c) << "  " << n << "  "
                  << (frac == summary.fractions.end() ? std::string("n/a") : util::fixed(frac->second, 6)) << "\n";
    }
    return kOk;
}

int cmd_report(const Flags& f) {
    const auto out = require(f.out, "--out");
    ReportInputs inputs;
    if (f.scores) inputs.scores = parse_scores_csv(util::read_file(*f.scores));
    if (f.attribution) {
        std::vector<ErrorCategory> cats;
        for (const auto& r : read_attribution(*f.attribution)) cats.push_back(r.category);
        inputs.attribution = summarize_attribution(cats);
    }
    if (f.annotations) inputs.annotations = summarize_annotations(read_candidates(*f.annotations));
    emit_report(out, inputs);
    std::cout << render_summary(inputs);
    return kOk;
}

int cmd_drgen(const Flags& f) {
    const auto cfg = resolve_config(f);
    const auto out = require(f.out, "--out");
    const auto task = parse_task(require(f.task, "--task"));
    if (!task) throw UsageError("unknown task " + *f.task);
    if (cfg.model.empty()) throw UsageError("missing required flag --model");
    const auto model_cfg = cfg.model_config();
    auto model = make_model(cfg.model, model_cfg, api_key());
    const auto result = generate_dr_candidates(*task, f.n, *model, model_cfg);
    write_candidates(out, result.candidates);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "wrote " << result.candidates.size() << " candidates to " << out
              << "; set the A-E fields by hand before running report\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"derivkit: measure how language models carry answers across related inputs"};
    app.require_subcommand(1);
    Flags f;

    const auto common = [&](CLI::App* sub) { sub->add_option("--config", f.config, "key = value config file"); };
    const auto model_opts = [&](CLI::App* sub) {
        sub->add_option("--model", f.model, "builtin:oracle, builtin:stubborn, builtin:scripted:<file>, or a remote model");
        sub->add_option("--endpoint", f.endpoint, "chat-completions base URL");
    };

    auto* gen = app.add_subcommand("generate", "build a case file");
    common(gen);
    gen->add_option("--task", f.task, "restrict to one task");
    gen->add_option("--rule", f.rules, "rule ids (comma separated) or 'all'");
    gen->add_option("--n", f.n, "cases per rule");
    gen->add_option("--seed", f.seed, "generation seed");
    gen->add_option("--out", f.out, "case file to write");

    auto* run = app.add_subcommand("run", "run a model over a case file");
    common(run);
    model_opts(run);
    run->add_option("--cases", f.cases, "case file");
    run->add_option("--strategy", f.strategy, "none, dp, cot, sb, os, fs or an");
    run->add_option("--samples", f.samples, "completions per round for majority voting");
    run->add_option("--workers", f.workers, "parallel cases");
    run->add_flag("--fresh-context", f.fresh_context, "ask round 2 without round 1 in context");
    run->add_flag("--timing", f.timing, "record wall time per round");
    run->add_flag("--stamp-time", f.stamp_time, "record the creation time in the manifest");
    run->add_option("--out", f.out, "transcript file to write");

    auto* score = app.add_subcommand("score", "compute scores from a transcript file");
    score->add_option("--transcripts", f.transcripts, "transcript file");
    score->add_option("--cases", f.cases, "case file to check the transcript against");
    score->add_option("--out", f.out, "CSV to write");

    auto* attr = app.add_subcommand("attribute", "classify failures with a judge model");
    common(attr);
    model_opts(attr);
    attr->add_option("--transcripts", f.transcripts, "transcript file");
    attr->add_option("--cases", f.cases, "case file; enables reasoning-chain regeneration");
    attr->add_option("--judge", f.judge, "judge model");
    attr->add_flag("--reuse-chains", f.reuse_chains, "judge the stored replies without re-running cases");
    attr->add_option("--out", f.out, "attribution file to write");

    auto* report = app.add_subcommand("report", "write scores.csv and summary.txt");
    report->add_option("--scores", f.scores, "scores CSV");
    report->add_option("--attribution", f.attribution, "attribution file");
    report->add_option("--annotations", f.annotations, "annotated candidate file");
    report->add_option("--out", f.out, "output directory");

    auto* drgen = app.add_subcommand("drgen", "ask a model to propose rules for a task");
    common(drgen);
    model_opts(drgen);
    drgen->add_option("--task", f.task, "task");
    drgen->add_option("--n", f.n, "number of candidates")->default_val(10);
    drgen->add_option("--out", f.out, "candidate file to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (gen->parsed()) return cmd_generate(f);
        if (run->parsed()) return cmd_run(f);
        if (score->parsed()) return cmd_score(f);
        if (attr->parsed()) return cmd_attribute(f);
        if (report->parsed()) return cmd_report(f);
        if (drgen->parsed()) return cmd_drgen(f);
    } catch (const IntegrityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIntegrity;
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kTransport;
    } catch (const ProviderError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kTransport;
    } catch (const ProtocolError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kTransport;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
