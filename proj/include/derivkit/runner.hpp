#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "derivkit/dr_core.hpp"
#include "derivkit/gateway.hpp"
#include "derivkit/prompts.hpp"
#include "derivkit/render.hpp"
#include "derivkit/task.hpp"

namespace derivkit {

struct CasePair {
    std::string case_id;
    std::string rule_id;
    TaskInput base_input;
    TaskInput transformed_input;
    OracleMeta oracle_meta;
    std::uint64_t seed = 0;  // seed handed to the rule's transform

    bool operator==(const CasePair&) const = default;
};

/// Pre-collected base inputs for one task (see load_corpus).
struct Corpus {
    TaskId task = TaskId::choice;
    std::vector<TaskInput> items;
};

/// Generation indexes below this are the reserved demonstration pool.
inline constexpr std::size_t kDemoPoolSize = 5;

/// n scored pairs for rule_id. Each pair samples a base input (synthetic, or from corpus
/// when given and matching the task) and applies the rule's transform with a seed derived
/// from (seed, generation index, attempt). Pairs whose transform rejects the base are
/// resampled. Pure function of its arguments.
/// Throws GenerationError when the corpus runs out or resampling keeps failing.
std::vector<CasePair> build_cases(const RuleRegistry& registry, std::string_view rule_id, std::size_t n,
                                  std::uint64_t seed, const Corpus* corpus = nullptr);

/// The reserved pool used for demonstrations; never overlaps build_cases output.
std::vector<CasePair> build_demo_cases(const RuleRegistry& registry, std::string_view rule_id,
                                       std::uint64_t seed, const Corpus* corpus = nullptr);

/// Re-applies the registered transform to case.base_input with case.seed.
TaskInput reproduce_transform(const RuleRegistry& registry, const CasePair& c, OracleMeta* meta_out = nullptr);

/// Demonstrations for os/fs, answered by the task solvers.
std::vector<DemoPair> make_demo_pairs(const RuleRegistry& registry, std::string_view rule_id, std::uint64_t seed,
                                      StrategyId strategy, const Corpus* corpus = nullptr);

struct Dialogue {
    std::string system;
    UserTurn first;
    UserTurn second;
};

Dialogue render_dialogue(const CasePair& c, StrategyId strategy, std::span<const DemoPair> demos = {});

struct TranscriptRecord {
    std::string case_id;
    std::string rule_id;
    TaskId task = TaskId::choice;
    StrategyId strategy = StrategyId::none;
    std::string model_name;
    double temperature = 0.0;
    int max_tokens = 0;
    int samples_k = 1;
    bool fresh_context = false;
    std::vector<ChatMessage> messages;  // system, user1, assistant1, user2, assistant2
    OracleMeta meta;
    std::optional<TaskOutput> parsed_y1;
    std::optional<TaskOutput> parsed_y2;
    std::optional<Verdict> verdict;  // absent when the model call errored
    std::string error;
    std::optional<std::array<double, 2>> wall_ms;

    bool errored() const { return !verdict.has_value(); }
    bool operator==(const TranscriptRecord&) const = default;
};

struct RunOptions {
    StrategyId strategy = StrategyId::none;
    ModelConfig cfg;
    bool fresh_context = false;  // round 2 without round 1 in context
    bool record_timing = false;
    std::size_t workers = 1;
};

/// Two-round dialogue for one case. Model transport/provider/protocol failures are caught
/// and recorded in TranscriptRecord::error; everything else propagates.
TranscriptRecord execute_case(const RuleRegistry& registry, const CasePair& c, ChatModel& model,
                              const RunOptions& options, std::span<const DemoPair> demos = {});

using DemoTable = std::map<std::string, std::vector<DemoPair>, std::less<>>;

/// Runs cases on up to options.workers threads. Results come back (and on_record fires)
/// in case order regardless of completion order.
std::vector<TranscriptRecord> run_cases(const RuleRegistry& registry, std::span<const CasePair> cases,
                                        ChatModel& model, const RunOptions& options, const DemoTable& demos = {},
                                        const std::function<void(const TranscriptRecord&)>& on_record = {});

// ---- persistence -------------------------------------------------------------

struct CaseManifest {
    std::vector<std::string> rules;
    std::size_t n_per_rule = 0;
    std::uint64_t seed = 0;
    std::size_t case_count = 0;
    bool operator==(const CaseManifest&) const = default;
};

struct CaseFile {
    CaseManifest manifest;
    std::vector<CasePair> cases;
    std::string digest;  // sha-256 of the file bytes
};

std::string serialize_case_file(const CaseManifest& manifest, std::span<const CasePair> cases);
/// Writes the file and returns its digest.
std::string write_case_file(const std::filesystem::path& path, const CaseManifest& manifest,
                            std::span<const CasePair> cases);
/// Throws IntegrityError for a truncated or corrupt file, or a case whose meta lacks a
/// key its relation needs.
CaseFile read_case_file(const std::filesystem::path& path, const RuleRegistry& registry);

struct RunManifest {
    std::string run_id;
    std::string created_at;  // empty unless stamping was requested
    std::vector<std::string> rules;
    std::string model_name;
    double temperature = 0.0;
    int max_tokens = 0;
    int samples_k = 1;
    StrategyId strategy = StrategyId::none;
    bool fresh_context = false;
    std::size_t case_count = 0;
    std::uint64_t seed = 0;
    std::string case_digest;
    bool operator==(const RunManifest&) const = default;
};

/// Deterministic id from the case digest and run settings.
std::string make_run_id(const RunManifest& manifest);

std::string serialize_manifest_line(const RunManifest& manifest);
std::string serialize_record_line(const TranscriptRecord& record);

/// Append-only transcript file: manifest header then one record per line.
class TranscriptWriter {
public:
    TranscriptWriter(const std::filesystem::path& path, const RunManifest& manifest);
    void append(const TranscriptRecord& record);
    std::size_t written() const { return written_; }

private:
    std::filesystem::path path_;
    std::size_t written_ = 0;
};

struct RunFile {
    RunManifest manifest;
    std::vector<TranscriptRecord> records;
};

/// Throws IntegrityError when the file is truncated, a line is corrupt, or
/// expected_case_digest is given and differs from the manifest.
RunFile load_run(const std::filesystem::path& path, const std::optional<std::string>& expected_case_digest = {});

/// One report per rule present, in registry order. Re-derives every verdict from the
/// stored parses and throws IntegrityError if one disagrees.
std::vector<DcsReport> score_records(const RuleRegistry& registry, std::span<const TranscriptRecord> records);

std::string sha256_hex(std::string_view bytes);

}  // namespace derivkit
