#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "derivkit/dr_core.hpp"
#include "derivkit/gateway.hpp"
#include "derivkit/runner.hpp"

namespace derivkit {

// ---- score aggregation --------------------------------------------------------

struct ScoreSummary {
    std::vector<DcsReport> rows;
    std::map<DrType, double> type_means;  // unweighted over rules of that type
    std::optional<double> overall_mean;   // unweighted over all rules
    std::size_t unparseable = 0;
    std::size_t errored = 0;
};

ScoreSummary aggregate_scores(std::span<const DcsReport> reports);

// ---- error attribution --------------------------------------------------------

enum class ErrorCategory { dr_unaware, dr_mislocalized, dr_misapplied, unclassifiable };

std::string_view to_string(ErrorCategory c);     // dr_unaware, ...
std::string_view display_name(ErrorCategory c);  // DR-Unaware, ...
std::optional<ErrorCategory> parse_error_category(std::string_view s);

/// Finds exactly one category token (DR-Unaware / DR-Mislocalized / DR-Misapplied, any
/// case, hyphen or underscore). nullopt when none or several distinct ones appear.
std::optional<ErrorCategory> parse_category_reply(std::string_view reply);

struct JudgeOptions {
    ModelConfig judge_cfg;
    /// When set together with subject and case_pair, the case is re-run under the cot
    /// strategy first and the judge sees that reasoning chain instead of the stored one.
    bool regenerate = true;
    const RuleRegistry* registry = nullptr;
    const CasePair* case_pair = nullptr;
    ChatModel* subject = nullptr;
    RunOptions subject_options;
};

/// System and user messages sent to the judge for one failed record.
std::vector<ChatMessage> build_judge_prompt(const TranscriptRecord& record);

/// Asks the judge to classify one failed record, reprompting once if the reply names no
/// single category. Throws ContractViolation when record.verdict is not fail.
ErrorCategory attribute_error(const TranscriptRecord& record, ChatModel& judge, const JudgeOptions& options);

struct AttributionRecord {
    std::string case_id;
    ErrorCategory category = ErrorCategory::unclassifiable;
    std::string judge_model;
    bool operator==(const AttributionRecord&) const = default;
};

/// Attributes every record whose verdict is fail; passing, unparseable and errored
/// records are skipped. cases (optional) enables chain regeneration.
std::vector<AttributionRecord> attribute_failures(std::span<const TranscriptRecord> records, ChatModel& judge,
                                                  const JudgeOptions& options,
                                                  std::span<const CasePair> cases = {});

struct AttributionSummary {
    std::map<ErrorCategory, std::size_t> counts;  // the three classifiable categories
    std::map<ErrorCategory, double> fractions;    // over classifiable records only
    std::size_t classified = 0;
    std::size_t unclassifiable = 0;
};

AttributionSummary summarize_attribution(std::span<const ErrorCategory> categories);

void write_attribution(const std::filesystem::path& path, std::span<const AttributionRecord> records);
std::vector<AttributionRecord> read_attribution(const std::filesystem::path& path);

// ---- autonomous rule proposals --------------------------------------------------

inline constexpr std::array<char, 5> kAnnotationDims{'A', 'B', 'C', 'D', 'E'};

/// A model-proposed rule; annotations (rationality, formal correctness, identity type,
/// domain knowledge, implementability) are filled in by a human editing the file.
struct DrCandidate {
    TaskId task = TaskId::choice;
    std::string description;
    std::string t_text;
    std::string r_text;
    std::array<bool, 5> annotations{};
    bool operator==(const DrCandidate&) const = default;
};

std::string build_drgen_prompt(TaskId task, std::size_t n);

/// Reads blocks of the form "DR <k>: <description>" followed by "T: ..." and "R: ...".
std::vector<DrCandidate> parse_dr_candidates(std::string_view text, TaskId task);

struct DrGenResult {
    std::vector<DrCandidate> candidates;
    std::vector<std::string> warnings;
};

DrGenResult generate_dr_candidates(TaskId task, std::size_t n, ChatModel& model, const ModelConfig& cfg);

void write_candidates(const std::filesystem::path& path, std::span<const DrCandidate> candidates);
std::vector<DrCandidate> read_candidates(const std::filesystem::path& path);

struct AnnotationRates {
    std::array<double, 5> rates{};
    std::array<std::size_t, 5> counts{};
    std::size_t candidates = 0;
};

AnnotationRates summarize_annotations(std::span<const DrCandidate> candidates);

// ---- reports --------------------------------------------------------------------

std::string scores_csv(std::span<const DcsReport> reports);
/// Parses a scores CSV written by scores_csv (header required).
std::vector<DcsReport> parse_scores_csv(std::string_view text);

struct ReportInputs {
    std::vector<DcsReport> scores;
    std::optional<AttributionSummary> attribution;
    std::optional<AnnotationRates> annotations;
};

std::string render_summary(const ReportInputs& inputs);

/// Writes scores.csv and summary.txt into out_dir. Byte-identical for identical inputs.
void emit_report(const std::filesystem::path& out_dir, const ReportInputs& inputs);

}  // namespace derivkit
