#include "derivkit/runner.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <openssl/evp.h>

#include "derivkit/answers.hpp"
#include "derivkit/catalog.hpp"
#include "derivkit/codec.hpp"
#include "derivkit/errors.hpp"
#include "derivkit/rng.hpp"
#include "derivkit/util.hpp"

namespace derivkit {

namespace {

constexpr int kAttemptsPerSlot = 100;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string case_id_for(std::string_view rule_id, std::size_t slot) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%04zu", slot);
    return std::string(rule_id) + "-" + buf;
}

// Walks generation slots 0, 1, 2, ... and returns those in [first, first + count).
// Corpus items are consumed in a seeded order, each at most once, so earlier slots
// (the demo pool) never share a base input with later ones.
std::vector<CasePair> draw_slots(const RuleRegistry& registry, std::string_view rule_id, std::uint64_t seed,
                                 const Corpus* corpus, std::size_t first, std::size_t count) {
    const auto& rule = registry.rule(rule_id);
    const auto& transform = registry.transform(rule.transform_ref);
    const std::uint64_t stream = mix_seed(seed, fnv1a(rule.rule_id));
    const bool use_corpus = corpus != nullptr && corpus->task == rule.task;

    std::vector<std::size_t> order;
    if (use_corpus) {
        order.resize(corpus->items.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng shuffler(mix_seed(stream, 0xc0ffeeULL));
        shuffler.shuffle(std::span(order));
    }
    std::size_t cursor = 0;

    std::vector<CasePair> out;
    out.reserve(count);
    for (std::size_t slot = 0; slot < first + count; ++slot) {
        std::optional<CasePair> made;
        std::string last_reason;
        for (int attempt = 0; !made; ++attempt) {
            if (use_corpus) {
                if (cursor >= order.size()) {
                    throw GenerationError("corpus for " + std::string(to_string(rule.task)) + " ran out after " +
                                          std::to_string(order.size()) + " items while building " + rule.rule_id +
                                          (last_reason.empty() ? "" : " (last rejection: " + last_reason + ")"));
                }
            } else if (attempt >= kAttemptsPerSlot) {
                throw GenerationError("rule " + rule.rule_id + " rejected " + std::to_string(kAttemptsPerSlot) +
                                      " draws in a row: " + last_reason);
            }
            Rng rng(mix_seed(mix_seed(stream, slot), static_cast<std::uint64_t>(attempt)));
            TaskInput base = use_corpus ? corpus->items[order[cursor++]] : generate_input(rule.task, rng);
            const std::uint64_t transform_seed = rng.next();
            if (slot < first) {
                // Pool slots only need to advance the corpus cursor consistently.
                OracleMeta meta;
                try {
                    transform.apply(base, transform_seed, meta);
                    made = CasePair{};
                } catch (const GenerationError& e) {
                    last_reason = e.what();
                }
                continue;
            }
            try {
                OracleMeta meta;
                auto transformed = transform.apply(base, transform_seed, meta);
                made = CasePair{case_id_for(rule.rule_id, slot), rule.rule_id, std::move(base),
                                std::move(transformed), std::move(meta), transform_seed};
            } catch (const GenerationError& e) {
                last_reason = e.what();
            }
        }
        if (slot >= first) out.push_back(std::move(*made));
    }
    return out;
}

}  // namespace

std::vector<CasePair> build_cases(const RuleRegistry& registry, std::string_view rule_id, std::size_t n,
                                  std::uint64_t seed, const Corpus* corpus) {
    if (n == 0) {
        registry.rule(rule_id);
        return {};
    }
    return draw_slots(registry, rule_id, seed, corpus, kDemoPoolSize, n);
}

std::vector<CasePair> build_demo_cases(const RuleRegistry& registry, std::string_view rule_id, std::uint64_t seed,
                                       const Corpus* corpus) {
    return draw_slots(registry, rule_id, seed, corpus, 0, kDemoPoolSize);
}

TaskInput reproduce_transform(const RuleRegistry& registry, const CasePair& c, OracleMeta* meta_out) {
    const auto& rule = registry.rule(c.rule_id);
    OracleMeta meta;
    auto out = registry.transform(rule.transform_ref).apply(c.base_input, c.seed, meta);
    if (meta_out) *meta_out = std::move(meta);
    return out;
}

std::vector<DemoPair> make_demo_pairs(const RuleRegistry& registry, std::string_view rule_id, std::uint64_t seed,
                                      StrategyId strategy, const Corpus* corpus) {
    const auto k = required_demos(strategy);
    if (k == 0) return {};
    const auto pool = build_demo_cases(registry, rule_id, seed, corpus);
    std::vector<DemoPair> demos;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& c = pool[i];
        demos.push_back({c.case_id, canonical_text(c.base_input), render_answer(solve(c.base_input)),
                         canonical_text(c.transformed_input), render_answer(solve(c.transformed_input))});
    }
    return demos;
}

Dialogue render_dialogue(const CasePair& c, StrategyId strategy, std::span<const DemoPair> demos) {
    return Dialogue{compose_system_prompt(system_template(c.base_input), strategy_suffix(strategy, demos)),
                    render_user_turn(c.base_input), render_user_turn(c.transformed_input)};
}

TranscriptRecord execute_case(const RuleRegistry& registry, const CasePair& c, ChatModel& model,
                              const RunOptions& options, std::span<const DemoPair> demos) {
    const auto task = task_of(c.base_input);
    TranscriptRecord rec;
    rec.case_id = c.case_id;
    rec.rule_id = c.rule_id;
    rec.task = task;
    rec.strategy = options.strategy;
    rec.model_name = model.name();
    rec.temperature = options.cfg.temperature;
    rec.max_tokens = options.cfg.max_tokens;
    rec.samples_k = options.cfg.samples_k;
    rec.fresh_context = options.fresh_context;
    rec.meta = c.oracle_meta;

    const auto dialogue = render_dialogue(c, options.strategy, demos);
    rec.messages.push_back({Role::system, dialogue.system, std::nullopt});
    rec.messages.push_back({Role::user, dialogue.first.text, dialogue.first.image});

    using clock = std::chrono::steady_clock;
    std::array<double, 2> wall{};
    try {
        auto t0 = clock::now();
        const auto a1 = sample_majority(model, rec.messages, options.cfg, task);
        wall[0] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        rec.messages.push_back({Role::assistant, a1, std::nullopt});
        rec.messages.push_back({Role::user, dialogue.second.text, dialogue.second.image});

        std::vector<ChatMessage> round2;
        if (options.fresh_context) {
            round2 = {rec.messages[0], rec.messages[3]};
        } else {
            round2 = rec.messages;
        }
        t0 = clock::now();
        const auto a2 = sample_majority(model, round2, options.cfg, task);
        wall[1] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        rec.messages.push_back({Role::assistant, a2, std::nullopt});
    } catch (const TransportError& e) {
        rec.error = e.what();
    } catch (const ProviderError& e) {
        rec.error = e.what();
    } catch (const ProtocolError& e) {
        rec.error = e.what();
    }
    if (options.record_timing) rec.wall_ms = wall;
    if (!rec.error.empty()) return rec;

    rec.parsed_y1 = parse_answer(task, rec.messages[2].text);
    rec.parsed_y2 = parse_answer(task, rec.messages[4].text);
    // A shape mismatch cannot occur here: parse_answer yields the task's own shape.
    rec.verdict = judge_round_pair(registry, c.rule_id, rec.parsed_y1, rec.parsed_y2, c.oracle_meta);
    return rec;
}

std::vector<TranscriptRecord> run_cases(const RuleRegistry& registry, std::span<const CasePair> cases,
                                        ChatModel& model, const RunOptions& options, const DemoTable& demos,
                                        const std::function<void(const TranscriptRecord&)>& on_record) {
    std::vector<std::optional<TranscriptRecord>> slots(cases.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex mu;
    std::size_t emitted = 0;

    const auto demos_for = [&](const std::string& rule_id) -> std::span<const DemoPair> {
        const auto it = demos.find(rule_id);
        if (it == demos.end()) return {};
        return it->second;
    };

    auto worker = [&] {
        while (!failed) {
            const auto i = next.fetch_add(1);
            if (i >= cases.size()) return;
            try {
                auto rec = execute_case(registry, cases[i], model, options, demos_for(cases[i].rule_id));
                std::lock_guard lock(mu);
                slots[i] = std::move(rec);
                // Single in-order writer: flush every contiguous finished record.
                while (emitted < slots.size() && slots[emitted]) {
                    if (on_record) on_record(*slots[emitted]);
                    ++emitted;
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first_error) first_error = std::current_exception();
                failed = true;
                return;
            }
        }
    };

    const auto n_workers = std::max<std::size_t>(1, std::min(options.workers, cases.size()));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<TranscriptRecord> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// ---- persistence -------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha-256 computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

std::string serialize_case_file(const CaseManifest& manifest, std::span<const CasePair> cases) {
    std::string out = json{{"kind", "case_manifest"},
                           {"rules", manifest.rules},
                           {"n_per_rule", manifest.n_per_rule},
                           {"seed", manifest.seed},
                           {"case_count", manifest.case_count}}
                          .dump() +
                      "\n";
    for (const auto& c : cases) out += case_to_json(c).dump() + "\n";
    return out;
}

std::string write_case_file(const std::filesystem::path& path, const CaseManifest& manifest,
                            std::span<const CasePair> cases) {
    if (manifest.case_count != cases.size()) throw ContractViolation("manifest case_count disagrees with cases");
    const auto bytes = serialize_case_file(manifest, cases);
    util::write_file(path.string(), bytes);
    return sha256_hex(bytes);
}

namespace {

std::vector<std::string> checked_lines(const std::string& bytes, const std::filesystem::path& path) {
    if (bytes.empty()) throw IntegrityError(path.string() + " is empty");
    if (bytes.back() != '\n') throw IntegrityError(path.string() + " is truncated (no final newline)");
    auto lines = util::split(std::string_view(bytes).substr(0, bytes.size() - 1), "\n");
    return lines;
}

json parse_line(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw IntegrityError(path.string() + ":" + std::to_string(lineno) + ": corrupt record");
    }
    return j;
}

}  // namespace

CaseFile read_case_file(const std::filesystem::path& path, const RuleRegistry& registry) {
    const auto bytes = util::read_file(path.string());
    const auto lines = checked_lines(bytes, path);
    CaseFile file;
    file.digest = sha256_hex(bytes);
    try {
        const auto head = parse_line(lines[0], path, 1);
        if (head.value("kind", "") != "case_manifest") throw IntegrityError(path.string() + ": missing case manifest");
        file.manifest.rules = head.at("rules").get<std::vector<std::string>>();
        file.manifest.n_per_rule = head.at("n_per_rule").get<std::size_t>();
        file.manifest.seed = head.at("seed").get<std::uint64_t>();
        file.manifest.case_count = head.at("case_count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw IntegrityError(path.string() + ": bad case manifest: " + e.what());
    }
    if (lines.size() - 1 != file.manifest.case_count) {
        throw IntegrityError(path.string() + ": manifest promises " + std::to_string(file.manifest.case_count) +
                             " cases, file holds " + std::to_string(lines.size() - 1));
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto where = path.string() + ":" + std::to_string(i + 1);
        CasePair c;
        try {
            c = case_from_json(parse_line(lines[i], path, i + 1));
        } catch (const Error& e) {
            throw IntegrityError(where + ": " + e.what());
        } catch (const json::exception& e) {
            throw IntegrityError(where + ": " + e.what());
        }
        if (!registry.contains(c.rule_id)) throw IntegrityError(where + ": unknown rule " + c.rule_id);
        const auto& rule = registry.rule(c.rule_id);
        if (task_of(c.base_input) != rule.task) throw IntegrityError(where + ": task does not match rule");
        for (const auto& key : registry.relation(rule.relation_ref).required_meta) {
            if (!c.oracle_meta.contains(key)) throw IntegrityError(where + ": meta lacks '" + key + "'");
        }
        OracleMeta meta;
        try {
            if (reproduce_transform(registry, c, &meta) != c.transformed_input || meta != c.oracle_meta) {
                throw IntegrityError(where + ": transformed input does not follow from base and seed");
            }
        } catch (const GenerationError& e) {
            throw IntegrityError(where + ": " + e.what());
        }
        file.cases.push_back(std::move(c));
    }
    return file;
}

std::string make_run_id(const RunManifest& m) {
    std::string key = m.case_digest + "|" + m.model_name + "|" + json(m.temperature).dump() + "|" +
                      std::to_string(m.max_tokens) + "|" + std::to_string(m.samples_k) + "|" +
                      std::string(to_string(m.strategy)) + "|" + (m.fresh_context ? "fresh" : "shared") + "|" +
                      std::to_string(m.seed);
    for (const auto& r : m.rules) key += "|" + r;
    return sha256_hex(key).substr(0, 16);
}

std::string serialize_manifest_line(const RunManifest& m) {
    return json{{"kind", "run_manifest"},
                {"run_id", m.run_id},
                {"created_at", m.created_at},
                {"rules", m.rules},
                {"model", m.model_name},
                {"temperature", m.temperature},
                {"max_tokens", m.max_tokens},
                {"samples_k", m.samples_k},
                {"strategy", to_string(m.strategy)},
                {"fresh_context", m.fresh_context},
                {"case_count", m.case_count},
                {"seed", m.seed},
                {"case_digest", m.case_digest}}
               .dump() +
           "\n";
}

std::string serialize_record_line(const TranscriptRecord& record) { return record_to_json(record).dump() + "\n"; }

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path, const RunManifest& manifest) : path_(path) {
    util::write_file(path.string(), serialize_manifest_line(manifest));
}

void TranscriptWriter::append(const TranscriptRecord& record) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot append to " + path_.string());
    out << serialize_record_line(record);
    out.flush();
    if (!out) throw Error("write to " + path_.string() + " failed");
    ++written_;
}

RunFile load_run(const std::filesystem::path& path, const std::optional<std::string>& expected_case_digest) {
    const auto bytes = util::read_file(path.string());
    const auto lines = checked_lines(bytes, path);
    RunFile run;
    try {
        const auto head = parse_line(lines[0], path, 1);
        if (head.value("kind", "") != "run_manifest") throw IntegrityError(path.string() + ": missing run manifest");
        auto& m = run.manifest;
        m.run_id = head.at("run_id").get<std::string>();
        m.created_at = head.at("created_at").get<std::string>();
        m.rules = head.at("rules").get<std::vector<std::string>>();
        m.model_name = head.at("model").get<std::string>();
        m.temperature = head.at("temperature").get<double>();
        m.max_tokens = head.at("max_tokens").get<int>();
        m.samples_k = head.at("samples_k").get<int>();
        const auto strategy = parse_strategy(head.at("strategy").get<std::string>());
        if (!strategy) throw IntegrityError(path.string() + ": unknown strategy in manifest");
        m.strategy = *strategy;
        m.fresh_context = head.at("fresh_context").get<bool>();
        m.case_count = head.at("case_count").get<std::size_t>();
        m.seed = head.at("seed").get<std::uint64_t>();
        m.case_digest = head.at("case_digest").get<std::string>();
    } catch (const json::exception& e) {
        throw IntegrityError(path.string() + ": bad run manifest: " + e.what());
    }
    if (expected_case_digest && *expected_case_digest != run.manifest.case_digest) {
        throw IntegrityError(path.string() + ": run was made from a different case file (digest " +
                             run.manifest.case_digest.substr(0, 12) + " vs " + expected_case_digest->substr(0, 12) +
                             ")");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        try {
            run.records.push_back(record_from_json(parse_line(lines[i], path, i + 1)));
        } catch (const IntegrityError&) {
            throw;
        } catch (const std::exception& e) {
            throw IntegrityError(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    if (run.records.size() != run.manifest.case_count) {
        throw IntegrityError(path.string() + ": manifest promises " + std::to_string(run.manifest.case_count) +
                             " records, file holds " + std::to_string(run.records.size()));
    }
    return run;
}

std::vector<DcsReport> score_records(const RuleRegistry& registry, std::span<const TranscriptRecord> records) {
    std::map<std::string, std::vector<Verdict>, std::less<>> verdicts;
    std::map<std::string, std::size_t, std::less<>> errored;
    for (const auto& r : records) {
        if (!registry.contains(r.rule_id)) throw IntegrityError("record " + r.case_id + " names unknown rule " + r.rule_id);
        if (r.errored()) {
            ++errored[r.rule_id];
            verdicts[r.rule_id];
            continue;
        }
        Verdict again;
        try {
            again = judge_round_pair(registry, r.rule_id, r.parsed_y1, r.parsed_y2, r.meta);
        } catch (const ContractViolation& e) {
            throw IntegrityError("record " + r.case_id + ": " + e.what());
        }
        if (again != *r.verdict) {
            throw IntegrityError("record " + r.case_id + " stores verdict " + std::string(to_string(r.verdict->status)) +
                                 " but its answers give " + std::string(to_string(again.status)));
        }
        verdicts[r.rule_id].push_back(again);
    }
    std::vector<DcsReport> out;
    for (const auto& rule : registry.rules()) {
        const auto it = verdicts.find(rule.rule_id);
        if (it == verdicts.end()) continue;
        DcsReport report;
        if (it->second.empty()) {
            report.rule_id = rule.rule_id;
            report.task = rule.task;
            report.dr_type = rule.dr_type;
        } else {
            report = compute_dcs(it->second, rule);
        }
        report.errored = errored[rule.rule_id];
        out.push_back(report);
    }
    return out;
}

}  // namespace derivkit
