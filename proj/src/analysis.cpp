#include "derivkit/analysis.hpp"

#include <fstream>
#include <regex>
#include <set>

#include "derivkit/answers.hpp"
#include "derivkit/catalog.hpp"
#include "derivkit/codec.hpp"
#include "derivkit/errors.hpp"
#include "derivkit/util.hpp"

namespace derivkit {

// ---- score aggregation --------------------------------------------------------

ScoreSummary aggregate_scores(std::span<const DcsReport> reports) {
    ScoreSummary s;
    s.rows.assign(reports.begin(), reports.end());
    std::map<DrType, std::pair<double, std::size_t>> by_type;
    double sum = 0;
    std::size_t scored = 0;
    for (const auto& r : reports) {
        s.unparseable += r.unparseable;
        s.errored += r.errored;
        if (r.total == 0) continue;  // every call errored; no gamma to average
        auto& [type_sum, type_n] = by_type[r.dr_type];
        type_sum += r.gamma;
        ++type_n;
        sum += r.gamma;
        ++scored;
    }
    for (const auto& [type, acc] : by_type) s.type_means[type] = acc.first / static_cast<double>(acc.second);
    if (scored > 0) s.overall_mean = sum / static_cast<double>(scored);
    return s;
}

// ---- error attribution --------------------------------------------------------

std::string_view to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::dr_unaware: return "dr_unaware";
        case ErrorCategory::dr_mislocalized: return "dr_mislocalized";
        case ErrorCategory::dr_misapplied: return "dr_misapplied";
        case ErrorCategory::unclassifiable: return "unclassifiable";
    }
    return "unclassifiable";
}

std::string_view display_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::dr_unaware: return "DR-Unaware";
        case ErrorCategory::dr_mislocalized: return "DR-Mislocalized";
        case ErrorCategory::dr_misapplied: return "DR-Misapplied";
        case ErrorCategory::unclassifiable: return "Unclassifiable";
    }
    return "Unclassifiable";
}

std::optional<ErrorCategory> parse_error_category(std::string_view s) {
    for (auto c : {ErrorCategory::dr_unaware, ErrorCategory::dr_mislocalized, ErrorCategory::dr_misapplied,
                   ErrorCategory::unclassifiable}) {
        if (s == to_string(c) || s == display_name(c)) return c;
    }
    return std::nullopt;
}

std::optional<ErrorCategory> parse_category_reply(std::string_view reply) {
    static const std::regex kToken(R"(\bdr[-_ ]?(unaware|mislocalized|misapplied)\b)", std::regex::icase);
    std::set<ErrorCategory> seen;
    const std::string text(reply);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kToken); it != std::sregex_iterator(); ++it) {
        const auto word = util::to_lower((*it)[1].str());
        seen.insert(word == "unaware"        ? ErrorCategory::dr_unaware
                    : word == "mislocalized" ? ErrorCategory::dr_mislocalized
                                             : ErrorCategory::dr_misapplied);
    }
    if (seen.size() != 1) return std::nullopt;
    return *seen.begin();
}

namespace {

constexpr std::string_view kJudgeSystem = R"(You review failures of a language model on paired questions.

Background. For a task f with inputs X and outputs Y, an input relation T and an output relation R form a derivation relation when every T-related input pair has R-related correct outputs. The model is shown an original question and then, in the same conversation, a transformed question whose input is T-related to the first. It fails when its two answers are not R-related.

Classify the failure into exactly one category:
DR-Unaware: LLM keeps the same output. It does not recognize and incorporate the input transformation defined by T.
DR-Mislocalized: LLM changes the output but fails to determine how it should change, i.e., the relation R.
DR-Misapplied: LLM correctly identifies how the output should change, but the final result is wrong.

Worked examples.
1. Rule: swapping the start and end node reverses the path. Answers: "1 -> 4 -> 2" then "1 -> 4 -> 2". The second answer repeats the first. Category: DR-Unaware.
2. Rule: mirroring the option order maps answer B to D. Answers: "B" then "C". The answer moved, but not to the mirrored letter. Category: DR-Mislocalized.
3. Rule: adding the term x adds x^2/2 at x=4, that is 8. Answers: "54" then "61". The reasoning says the result grows by 8 but the final sum is wrong. Category: DR-Misapplied.

Read the transcript and its reasoning, then reply with one line "Category: <DR-Unaware|DR-Mislocalized|DR-Misapplied>".)";

std::string message_text(const ChatMessage& m) {
    return m.image ? m.text + " [image attached]" : m.text;
}

std::string reprompt_text(const TranscriptRecord& record) {
    return "Case: " + record.case_id +
           "\nYour reply must name exactly one category: DR-Unaware, DR-Mislocalized or DR-Misapplied.";
}

}  // namespace

std::vector<ChatMessage> build_judge_prompt(const TranscriptRecord& record) {
    if (record.messages.size() != 5) throw ContractViolation("record " + record.case_id + " has no full dialogue");
    std::string rule_text = record.rule_id;
    const auto& registry = standard_registry();
    if (registry.contains(record.rule_id)) rule_text += " (" + registry.rule(record.rule_id).description + ")";
    const auto answer = [](const std::optional<TaskOutput>& y) { return y ? render_answer(*y) : std::string("unparseable"); };
    std::string user = "Case: " + record.case_id + "\nRule: " + rule_text + "\nTask: " +
                       std::string(to_string(record.task)) + "\n\nTask instruction:\n" + record.messages[0].text +
                       "\n\nOriginal question:\n" + message_text(record.messages[1]) + "\n\nModel reply:\n" +
                       record.messages[2].text + "\n\nTransformed question:\n" + message_text(record.messages[3]) +
                       "\n\nModel reply:\n" + record.messages[4].text + "\n\nExtracted answers: " +
                       answer(record.parsed_y1) + " then " + answer(record.parsed_y2);
    return {{Role::system, std::string(kJudgeSystem), std::nullopt}, {Role::user, std::move(user), std::nullopt}};
}

ErrorCategory attribute_error(const TranscriptRecord& record, ChatModel& judge, const JudgeOptions& options) {
    if (!record.verdict || record.verdict->status != VerdictStatus::fail) {
        throw ContractViolation("attribution needs a failed record; " + record.case_id + " did not fail");
    }
    const TranscriptRecord* shown = &record;
    TranscriptRecord regenerated;
    if (options.regenerate && options.registry && options.case_pair && options.subject &&
        record.strategy != StrategyId::cot) {
        auto opts = options.subject_options;
        opts.strategy = StrategyId::cot;
        regenerated = execute_case(*options.registry, *options.case_pair, *options.subject, opts);
        if (!regenerated.errored()) {
            // Keep the judged answers; only the reasoning chain is refreshed.
            regenerated.parsed_y1 = record.parsed_y1;
            regenerated.parsed_y2 = record.parsed_y2;
            regenerated.case_id = record.case_id;
            shown = &regenerated;
        }
    }

    auto history = build_judge_prompt(*shown);
    auto reply = complete_chat(judge, history, options.judge_cfg);
    if (const auto c = parse_category_reply(reply)) return *c;
    history.push_back({Role::assistant, reply, std::nullopt});
    history.push_back({Role::user, reprompt_text(record), std::nullopt});
    reply = complete_chat(judge, history, options.judge_cfg);
    if (const auto c = parse_category_reply(reply)) return *c;
    return ErrorCategory::unclassifiable;
}

std::vector<AttributionRecord> attribute_failures(std::span<const TranscriptRecord> records, ChatModel& judge,
                                                  const JudgeOptions& options, std::span<const CasePair> cases) {
    std::vector<AttributionRecord> out;
    for (const auto& r : records) {
        if (!r.verdict || r.verdict->status != VerdictStatus::fail) continue;
        JudgeOptions opts = options;
        opts.case_pair = nullptr;
        for (const auto& c : cases) {
            if (c.case_id == r.case_id) opts.case_pair = &c;
        }
        out.push_back({r.case_id, attribute_error(r, judge, opts), judge.name()});
    }
    return out;
}

AttributionSummary summarize_attribution(std::span<const ErrorCategory> categories) {
    AttributionSummary s;
    for (auto c : {ErrorCategory::dr_unaware, ErrorCategory::dr_mislocalized, ErrorCategory::dr_misapplied}) {
        s.counts[c] = 0;
    }
    for (auto c : categories) {
        if (c == ErrorCategory::unclassifiable) {
            ++s.unclassifiable;
        } else {
            ++s.counts[c];
            ++s.classified;
        }
    }
    if (s.classified > 0) {
        for (const auto& [c, n] : s.counts) s.fractions[c] = static_cast<double>(n) / static_cast<double>(s.classified);
    }
    return s;
}

void write_attribution(const std::filesystem::path& path, std::span<const AttributionRecord> records) {
    std::string out;
    for (const auto& r : records) {
        out += json{{"case_id", r.case_id}, {"category", to_string(r.category)}, {"judge_model", r.judge_model}}.dump() +
               "\n";
    }
    util::write_file(path.string(), out);
}

std::vector<AttributionRecord> read_attribution(const std::filesystem::path& path) {
    const auto bytes = util::read_file(path.string());
    std::vector<AttributionRecord> out;
    std::size_t lineno = 0;
    for (const auto& line : util::split(bytes, "\n")) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        const auto j = json::parse(line, nullptr, false);
        const auto where = path.string() + ":" + std::to_string(lineno);
        if (j.is_discarded() || !j.is_object()) throw IntegrityError(where + ": corrupt attribution record");
        try {
            const auto c = parse_error_category(j.at("category").get<std::string>());
            if (!c) throw IntegrityError(where + ": unknown category");
            out.push_back({j.at("case_id").get<std::string>(), *c, j.at("judge_model").get<std::string>()});
        } catch (const json::exception& e) {
            throw IntegrityError(where + ": " + e.what());
        }
    }
    return out;
}

// ---- autonomous rule proposals --------------------------------------------------

namespace {

std::string_view task_description(TaskId task) {
    switch (task) {
        case TaskId::choice: return "Multiple-choice questions with five options A to E; the answer is one letter.";
        case TaskId::logic:
            return "Numbered premises and a statement to prove; the answer lists the premises used, in proof order, "
                   "then the statement's number.";
        case TaskId::sentiment: return "Classify the sentiment of a text as positive or negative.";
        case TaskId::table_qa: return "Answer a question by looking up cells in a table.";
        case TaskId::graph_path: return "Find the path between two nodes of an undirected tree.";
        case TaskId::math_integral:
            return "Integrate a function, substitute x=4 and round down; the answer is an integer.";
        case TaskId::image_count: return "Count the vehicles facing left and facing right in an image.";
        case TaskId::space_walk:
            return "Walk around a circle of 20 positions following clockwise and counterclockwise moves; the answer "
                   "is the final position.";
    }
    return "";
}

}  // namespace

std::string build_drgen_prompt(TaskId task, std::size_t n) {
    Rng rng(mix_seed(static_cast<std::uint64_t>(task)));
    const auto example = generate_input(task, rng);
    std::string prompt =
        "A task f maps inputs X to outputs Y. A derivation relation is a pair (T, R): T relates inputs, R relates "
        "outputs, and for every pair of inputs related by T the correct outputs are related by R. When R is the "
        "identity the rule says the output must not change.\n\n"
        "Example: for integrating a function and substituting x=4, T adds the term x to the function and R adds 8 "
        "to the result.\n\nTask: ";
    prompt += std::string(task_description(task)) + "\n\nRepresentative instance:\n" + canonical_text(example) +
              "\nAnswer: " + render_answer(solve(example)) + "\n\nPropose " + std::to_string(n) +
              " different derivation relations for this task. Use exactly this layout for each:\n"
              "DR <k>: <short name> - <one-sentence description>\nT: <formal definition of T>\nR: <formal definition "
              "of R>\n";
    return prompt;
}

std::vector<DrCandidate> parse_dr_candidates(std::string_view text, TaskId task) {
    static const std::regex kHead(R"(^\s*\**\s*DR\s*\d+\s*\**\s*[:.]\s*(.+)$)", std::regex::icase);
    static const std::regex kT(R"(^\s*\**\s*T\s*\**\s*[:=]\s*(.+)$)");
    static const std::regex kR(R"(^\s*\**\s*R\s*\**\s*[:=]\s*(.+)$)");
    std::vector<DrCandidate> out;
    std::optional<DrCandidate> cur;
    const auto flush = [&] {
        if (cur && !cur->description.empty() && !cur->t_text.empty() && !cur->r_text.empty()) out.push_back(*cur);
        cur.reset();
    };
    for (const auto& raw : util::split(text, "\n")) {
        std::string line(raw);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::smatch m;
        if (std::regex_match(line, m, kHead)) {
            flush();
            cur = DrCandidate{task, std::string(util::trim(m[1].str())), "", "", {}};
        } else if (cur && std::regex_match(line, m, kT)) {
            cur->t_text = std::string(util::trim(m[1].str()));
        } else if (cur && std::regex_match(line, m, kR)) {
            cur->r_text = std::string(util::trim(m[1].str()));
        }
    }
    flush();
    return out;
}

DrGenResult generate_dr_candidates(TaskId task, std::size_t n, ChatModel& model, const ModelConfig& cfg) {
    if (n == 0) throw ContractViolation("need at least one candidate");
    const std::vector<ChatMessage> history{
        {Role::system, "You design evaluation rules for language-model tasks.", std::nullopt},
        {Role::user, build_drgen_prompt(task, n), std::nullopt}};
    DrGenResult result;
    result.candidates = parse_dr_candidates(complete_chat(model, history, cfg), task);
    if (result.candidates.size() > n) result.candidates.resize(n);
    if (result.candidates.size() < n) {
        result.warnings.push_back("asked for " + std::to_string(n) + " candidates, parsed " +
                                  std::to_string(result.candidates.size()));
    }
    return result;
}

void write_candidates(const std::filesystem::path& path, std::span<const DrCandidate> candidates) {
    std::string out;
    for (const auto& c : candidates) {
        json j{{"task", to_string(c.task)}, {"description", c.description}, {"T", c.t_text}, {"R", c.r_text}};
        for (std::size_t d = 0; d < kAnnotationDims.size(); ++d) j[std::string(1, kAnnotationDims[d])] = c.annotations[d];
        out += j.dump() + "\n";
    }
    util::write_file(path.string(), out);
}

std::vector<DrCandidate> read_candidates(const std::filesystem::path& path) {
    const auto bytes = util::read_file(path.string());
    std::vector<DrCandidate> out;
    std::size_t lineno = 0;
    for (const auto& line : util::split(bytes, "\n")) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        const auto where = path.string() + ":" + std::to_string(lineno);
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw IntegrityError(where + ": corrupt candidate record");
        try {
            const auto task = parse_task(j.at("task").get<std::string>());
            if (!task) throw IntegrityError(where + ": unknown task");
            DrCandidate c{*task, j.at("description").get<std::string>(), j.value("T", ""), j.value("R", ""), {}};
            for (std::size_t d = 0; d < kAnnotationDims.size(); ++d) {
                c.annotations[d] = j.value(std::string(1, kAnnotationDims[d]), false);
            }
            out.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw IntegrityError(where + ": " + e.what());
        }
    }
    return out;
}

AnnotationRates summarize_annotations(std::span<const DrCandidate> candidates) {
    AnnotationRates r;
    r.candidates = candidates.size();
    for (const auto& c : candidates) {
        for (std::size_t d = 0; d < 5; ++d) r.counts[d] += c.annotations[d] ? 1 : 0;
    }
    if (r.candidates > 0) {
        for (std::size_t d = 0; d < 5; ++d) r.rates[d] = static_cast<double>(r.counts[d]) / static_cast<double>(r.candidates);
    }
    return r;
}

// ---- reports --------------------------------------------------------------------

std::string scores_csv(std::span<const DcsReport> reports) {
    std::string out = dcs_csv_header() + ",unparseable,errored\n";
    for (const auto& r : reports) {
        out += dcs_csv_row(r) + "," + std::to_string(r.unparseable) + "," + std::to_string(r.errored) + "\n";
    }
    return out;
}

std::vector<DcsReport> parse_scores_csv(std::string_view text) {
    const auto lines = util::split(text, "\n");
    if (lines.empty() || util::trim(lines[0]) != dcs_csv_header() + ",unparseable,errored") {
        throw IntegrityError("scores CSV has an unexpected header");
    }
    std::vector<DcsReport> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (util::trim(lines[i]).empty()) continue;
        const auto f = util::split(util::trim(lines[i]), ",");
        const auto where = "scores CSV line " + std::to_string(i + 1);
        if (f.size() != 8) throw IntegrityError(where + ": expected 8 fields");
        const auto task = parse_task(f[1]);
        const auto type = parse_dr_type(f[2]);
        if (!task || !type) throw IntegrityError(where + ": unknown task or type");
        DcsReport r;
        r.rule_id = f[0];
        r.task = *task;
        r.dr_type = *type;
        try {
            r.passes = std::stoul(f[3]);
            r.total = std::stoul(f[4]);
            r.unparseable = std::stoul(f[6]);
            r.errored = std::stoul(f[7]);
        } catch (const std::exception&) {
            throw IntegrityError(where + ": bad count");
        }
        if (r.passes > r.total) throw IntegrityError(where + ": more passes than cases");
        r.gamma = r.total == 0 ? 0.0 : static_cast<double>(r.passes) / static_cast<double>(r.total);
        if (util::fixed(r.gamma, 6) != f[5]) throw IntegrityError(where + ": gamma disagrees with counts");
        out.push_back(r);
    }
    return out;
}

std::string render_summary(const ReportInputs& inputs) {
    const auto s = aggregate_scores(inputs.scores);
    std::string out = "Derivation capability scores\n";
    if (s.rows.empty()) {
        out += "  (no scores)\n";
    } else {
        for (const auto& r : s.rows) {
            out += "  " + r.rule_id + "  " + std::string(to_string(r.task)) + "  " + std::string(to_string(r.dr_type)) +
                   "  gamma=" + util::fixed(r.gamma, 6) + "  (" + std::to_string(r.passes) + "/" +
                   std::to_string(r.total) + ")\n";
        }
        out += "\nMean by type\n";
        for (const auto& [type, mean] : s.type_means) out += "  " + std::string(to_string(type)) + "  " + util::fixed(mean, 6) + "\n";
        out += "\nOverall mean  " + (s.overall_mean ? util::fixed(*s.overall_mean, 6) : std::string("n/a")) + "\n";
    }
    out += "Unparseable answers  " + std::to_string(s.unparseable) + "\nErrored calls  " + std::to_string(s.errored) + "\n";

    if (inputs.attribution) {
        const auto& a = *inputs.attribution;
        out += "\nError attribution (" + std::to_string(a.classified) + " classified, " +
               std::to_string(a.unclassifiable) + " unclassifiable)\n";
        for (const auto& [c, n] : a.counts) {
            const auto f = a.fractions.find(c);
            out += "  " + std::string(display_name(c)) + "  " + std::to_string(n) + "  " +
                   (f == a.fractions.end() ? std::string("n/a") : util::fixed(f->second, 6)) + "\n";
        }
    }
    if (inputs.annotations) {
        const auto& a = *inputs.annotations;
        out += "\nCandidate annotations (" + std::to_string(a.candidates) + " candidates)\n";
        for (std::size_t d = 0; d < 5; ++d) {
            out += "  " + std::string(1, kAnnotationDims[d]) + "  " + std::to_string(a.counts[d]) + "  " +
                   util::fixed(a.rates[d], 6) + "\n";
        }
    }
    return out;
}

void emit_report(const std::filesystem::path& out_dir, const ReportInputs& inputs) {
    std::filesystem::create_directories(out_dir);
    util::write_file((out_dir / "scores.csv").string(), scores_csv(inputs.scores));
    util::write_file((out_dir / "summary.txt").string(), render_summary(inputs));
}

}  // namespace derivkit
