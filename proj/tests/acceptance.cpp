// One line per acceptance criterion; exit status is nonzero if any line fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "derivkit/analysis.hpp"
#include "derivkit/answers.hpp"
#include "derivkit/catalog.hpp"
#include "derivkit/dr_core.hpp"
#include "derivkit/gateway.hpp"
#include "derivkit/render.hpp"
#include "derivkit/runner.hpp"
#include "derivkit/structured_tasks.hpp"
#include "derivkit/text_tasks.hpp"
#include "derivkit/util.hpp"

using namespace derivkit;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes pinned here.
constexpr std::size_t kCasesPerRule = 50;
constexpr std::uint64_t kSeed = 7;
constexpr double kOracleBudgetSeconds = 60.0;
constexpr std::size_t kInvolutionInstances = 1000;
constexpr std::size_t kShuffles = 100;
constexpr std::size_t kSquareCases = 200;
constexpr double kGammaTolerance = 0.0;  // every gamma comparison is exact

struct Outcome {
    bool ok = true;
    std::string detail;
    void expect(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

int failures = 0;

void report(const char* id, const char* title, const Outcome& o) {
    std::cout << id << " " << (o.ok ? "PASS" : "FAIL") << "  " << title;
    if (!o.detail.empty()) std::cout << "  [" << o.detail << "]";
    std::cout << "\n";
    if (!o.ok) ++failures;
}

template <typename F>
void criterion(const char* id, const char* title, F body) {
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.ok = false;
        o.detail = std::string("exception: ") + e.what();
    }
    report(id, title, o);
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("derivkit_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool exact(double a, double b) { return std::abs(a - b) <= kGammaTolerance; }

std::vector<DcsReport> run_rules(const std::vector<std::string>& rules, ChatModel& model, std::size_t n,
                                 std::uint64_t seed, std::vector<CasePair>* cases_out = nullptr) {
    const auto& registry = standard_registry();
    std::vector<CasePair> cases;
    for (const auto& id : rules) {
        auto batch = build_cases(registry, id, n, seed);
        cases.insert(cases.end(), batch.begin(), batch.end());
    }
    RunOptions options;
    options.workers = 4;
    const auto records = run_cases(registry, cases, model, options);
    if (cases_out) *cases_out = cases;
    return score_records(registry, records);
}

// Brute force over the question text itself: "Which option equals a + b?"
std::optional<char> tally_choice_answer(const ChoiceInput& in) {
    int a = 0, b = 0;
    if (std::sscanf(in.question.c_str(), "Which option equals %d + %d?", &a, &b) != 2) return std::nullopt;
    std::optional<char> found;
    for (int i = 0; i < 5; ++i) {
        if (in.options[i] == std::to_string(a + b)) {
            if (found) return std::nullopt;
            found = static_cast<char>('A' + i);
        }
    }
    return found;
}

}  // namespace

int main() {
    const auto& registry = standard_registry();
    const auto all_rules = registry.rule_ids();

    criterion("AC1", "oracle model scores gamma = 1 on every rule within the time budget", [&](Outcome& o) {
        OracleModel oracle;
        const auto t0 = std::chrono::steady_clock::now();
        const auto reports = run_rules(all_rules, oracle, kCasesPerRule, kSeed);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.expect(reports.size() == all_rules.size(), "missing rule reports");
        for (const auto& r : reports) {
            o.expect(r.total == kCasesPerRule, r.rule_id + " total " + std::to_string(r.total));
            o.expect(exact(r.gamma, 1.0), r.rule_id + " gamma " + util::fixed(r.gamma, 6));
        }
        o.expect(secs < kOracleBudgetSeconds, "took " + util::fixed(secs, 2) + "s");
        if (o.ok) {
            o.detail = std::to_string(all_rules.size()) + " rules x " + std::to_string(kCasesPerRule) + " cases in " +
                       util::fixed(secs, 2) + "s";
        }
    });

    criterion("AC2", "stubborn model: ID rules 1, b4.1 0, b1.1 equals the share of C answers", [&](Outcome& o) {
        StubbornModel stubborn;
        const std::vector<std::string> rules{"a1.1", "a1.2", "a2.1", "a2.2", "b4.1", "b1.1"};
        const auto reports = run_rules(rules, stubborn, kCasesPerRule, kSeed);
        std::map<std::string, double> gamma;
        for (const auto& r : reports) gamma[r.rule_id] = r.gamma;
        for (const auto& id : {"a1.1", "a1.2", "a2.1", "a2.2"}) {
            o.expect(exact(gamma.at(id), 1.0), std::string(id) + " gamma " + util::fixed(gamma.at(id), 6));
        }
        o.expect(exact(gamma.at("b4.1"), 0.0), "b4.1 gamma " + util::fixed(gamma.at("b4.1"), 6));

        // Independent tally over the persisted case file.
        const auto dir = scratch("ac2");
        const auto cases = build_cases(registry, "b1.1", kCasesPerRule, kSeed);
        write_case_file(dir / "b11.jsonl", CaseManifest{{"b1.1"}, kCasesPerRule, kSeed, cases.size()}, cases);
        const auto file = read_case_file(dir / "b11.jsonl", registry);
        std::size_t c_count = 0;
        for (const auto& c : file.cases) {
            const auto letter = tally_choice_answer(std::get<ChoiceInput>(c.base_input));
            o.expect(letter.has_value(), c.case_id + " has no unique answer");
            if (letter == 'C') ++c_count;
        }
        const double expected = static_cast<double>(c_count) / static_cast<double>(file.cases.size());
        o.expect(exact(gamma.at("b1.1"), expected),
                 "b1.1 gamma " + util::fixed(gamma.at("b1.1"), 6) + " vs tally " + util::fixed(expected, 6));
        if (o.ok) o.detail = "b1.1 gamma " + util::fixed(expected, 6) + " = " + std::to_string(c_count) + "/50";
    });

    criterion("AC3", "point checks: integrals 54/62, reference tree paths, mirrored-choice pairs", [&](Outcome& o) {
        const IntegralInput ex{{{1, Basis::exp, 0}}, 4};
        const IntegralInput ex_x{{{1, Basis::exp, 0}, {1, Basis::power, 1}}, 4};
        o.expect(reference_integral(ex) == 54, "e^x");
        o.expect(reference_integral(ex_x) == 62, "e^x + x");
        GraphInput g{{0, 1, 2, 3, 4, 5, 6, 7}, {{0, 2}, {1, 3}, {2, 6}, {2, 4}, {3, 5}, {3, 6}, {4, 7}}, 2, 5};
        o.expect(find_path(g) == std::vector<int>{2, 6, 3, 5}, "path 2 to 5");
        o.expect(find_path(transform_swap_endpoints(g)) == std::vector<int>{5, 3, 6, 2}, "path 5 to 2");
        std::set<std::pair<char, char>> accepted;
        for (char a = 'A'; a <= 'E'; ++a) {
            for (char b = 'A'; b <= 'E'; ++b) {
                if (relate_mirrored_choice(a, b)) accepted.insert({a, b});
            }
        }
        const std::set<std::pair<char, char>> expected{{'A', 'E'}, {'B', 'D'}, {'C', 'C'}, {'D', 'B'}, {'E', 'A'}};
        o.expect(accepted == expected, "mirrored pairs");
    });

    criterion("AC4", "transform goldens and involutions", [&](Outcome& o) {
        o.expect(deepwordbug("classify") == "classsify", "classify");
        o.expect(deepwordbug("determine") == "deermine", "determine");

        const SentenceInput s{std::string(default_sentiment_prompt()), "a lovely film", {"positive", "negative"}};
        Rng r1(99), r2(99);
        const auto c1 = transform_checklist(s, r1);
        const auto c2 = transform_checklist(s, r2);
        o.expect(c1 == c2, "checklist not seed-stable");
        o.expect(c1.instruction_prompt.size() == s.instruction_prompt.size() + 10, "checklist length");
        const auto suffix = c1.instruction_prompt.substr(s.instruction_prompt.size());
        o.expect(std::all_of(suffix.begin(), suffix.end(),
                             [](char ch) { return (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9'); }),
                 "checklist alphabet");

        Rng rng(12345);
        for (std::size_t i = 0; i < kInvolutionInstances; ++i) {
            const auto table = generate_table(rng);
            const auto fare = transform_add_fare_column(table, rng);
            o.expect(fare.header.size() == table.header.size() + 1, "fare width");
            const auto col = std::find(fare.header.begin(), fare.header.end(), "Fare") - fare.header.begin();
            o.expect(static_cast<std::size_t>(col) < fare.header.size(), "fare header");
            for (const auto& row : fare.rows) {
                o.expect(row.size() == fare.header.size() && row[col] == "$100", "fare cell");
            }
            o.expect(transform_reverse_columns(transform_reverse_columns(table)) == table, "columns involution");

            const auto choice = generate_choice(rng);
            o.expect(transform_mirror_options(transform_mirror_options(choice)) == choice, "mirror involution");

            const auto logic = generate_logic(rng);
            OracleMeta m1, m2;
            o.expect(transform_reverse_premises(transform_reverse_premises(logic, m1), m2) == logic,
                     "premise involution");
        }
    });

    criterion("AC5", "DCS arithmetic and permutation invariance", [&](Outcome& o) {
        const auto v = [](VerdictStatus s) { return Verdict{"b4.1", s}; };
        std::vector<Verdict> verdicts{v(VerdictStatus::pass), v(VerdictStatus::pass), v(VerdictStatus::pass),
                                      v(VerdictStatus::fail)};
        o.expect(exact(compute_dcs(verdicts).gamma, 0.75), "gamma of [P,P,P,F]");

        std::mt19937_64 gen(5);
        std::vector<Verdict> mixed;
        for (int i = 0; i < 37; ++i) {
            const auto r = gen() % 4;
            mixed.push_back(v(r == 0   ? VerdictStatus::fail
                              : r == 1 ? VerdictStatus::unparseable_round2
                                       : VerdictStatus::pass));
        }
        const auto base = compute_dcs(mixed);
        for (std::size_t i = 0; i < kShuffles; ++i) {
            std::shuffle(mixed.begin(), mixed.end(), gen);
            const auto r = compute_dcs(mixed);
            o.expect(r.gamma == base.gamma && r.passes == base.passes && r.total == base.total, "shuffle changed");
        }
    });

    criterion("AC6", "relation square holds for the oracle on every rule", [&](Outcome& o) {
        for (const auto& id : all_rules) {
            const auto cases = build_cases(registry, id, kSquareCases, 2024);
            o.expect(cases.size() == kSquareCases, id + " case count");
            for (const auto& c : cases) {
                const auto y1 = solve(c.base_input);
                const auto y2 = solve(c.transformed_input);
                const auto verdict = check_pair(registry, id, y1, y2, c.oracle_meta);
                o.expect(verdict.status == VerdictStatus::pass, c.case_id);
                if (const auto* img = std::get_if<SceneImage>(&c.base_input)) {
                    // Pixel counting agrees with placement ground truth on both sides.
                    const auto& img2 = std::get<SceneImage>(c.transformed_input);
                    o.expect(count_glyphs(*img) == ground_truth_counts(*img), c.case_id + " base raster");
                    o.expect(count_glyphs(img2) == ground_truth_counts(img2), c.case_id + " transformed raster");
                    o.expect(count_glyphs(decode_ppm(encode_ppm(img2))) == count_glyphs(img2), c.case_id + " ppm");
                }
                if (const auto* w = std::get_if<WalkInput>(&c.base_input)) {
                    const int p1 = simulate_walk(*w);
                    const int p2 = simulate_walk(std::get<WalkInput>(c.transformed_input));
                    o.expect((p1 + p2) % kCirclePositions == (2 * w->start) % kCirclePositions, c.case_id + " walk");
                }
            }
        }
    });

    criterion("AC7", "attribution: 20-failure judge fixture tally and the misapplied math transcript", [&](Outcome& o) {
        // Stubborn answers never satisfy b4.1 or math.1 on these seeds: 20 failures.
        std::vector<CasePair> cases;
        for (const auto& id : {"b4.1", "math.1"}) {
            auto batch = build_cases(registry, id, 10, kSeed);
            cases.insert(cases.end(), batch.begin(), batch.end());
        }
        StubbornModel stubborn;
        const auto records = run_cases(registry, cases, stubborn, RunOptions{});
        std::size_t fails = 0;
        for (const auto& r : records) fails += (r.verdict && r.verdict->status == VerdictStatus::fail) ? 1 : 0;
        o.expect(fails == 20, "expected 20 failures, got " + std::to_string(fails));

        ScriptedModel judge(fs::path(DERIVKIT_FIXTURES) / "judge_20.jsonl");
        JudgeOptions options;
        options.regenerate = false;
        const auto attributed = attribute_failures(records, judge, options);
        std::vector<ErrorCategory> cats;
        for (const auto& a : attributed) cats.push_back(a.category);
        const auto summary = summarize_attribution(cats);
        // Hand tally of tests/fixtures/judge_20.jsonl.
        o.expect(summary.counts.at(ErrorCategory::dr_unaware) == 8, "unaware count");
        o.expect(summary.counts.at(ErrorCategory::dr_mislocalized) == 4, "mislocalized count");
        o.expect(summary.counts.at(ErrorCategory::dr_misapplied) == 6, "misapplied count");
        o.expect(summary.unclassifiable == 2, "unclassifiable count");
        o.expect(summary.fractions.at(ErrorCategory::dr_unaware) == 8.0 / 18.0, "unaware fraction");
        o.expect(summary.fractions.at(ErrorCategory::dr_mislocalized) == 4.0 / 18.0, "mislocalized fraction");
        o.expect(summary.fractions.at(ErrorCategory::dr_misapplied) == 6.0 / 18.0, "misapplied fraction");

        const IntegralInput base{{{1, Basis::exp, 0}}, 4};
        const IntegralInput transformed{{{1, Basis::exp, 0}, {1, Basis::power, 1}}, 4};
        TranscriptRecord misapplied;
        misapplied.case_id = "math-transcript";
        misapplied.rule_id = "math.1";
        misapplied.task = TaskId::math_integral;
        misapplied.model_name = "transcribed";
        misapplied.messages = {
            {Role::system, system_template(base), std::nullopt},
            {Role::user, render_user_turn(base).text, std::nullopt},
            {Role::assistant,
             "... Finally, rounding down the value of e^4 gives us the final answer. Therefore, the final answer is: 54.",
             std::nullopt},
            {Role::user, render_user_turn(transformed).text, std::nullopt},
            {Role::assistant,
             "... rounding down the value of e^4 + 8 gives us the final answer. Therefore, the final answer is: 59.",
             std::nullopt}};
        misapplied.meta = {{"delta", "8"}};
        misapplied.parsed_y1 = parse_answer(TaskId::math_integral, misapplied.messages[2].text);
        misapplied.parsed_y2 = parse_answer(TaskId::math_integral, misapplied.messages[4].text);
        misapplied.verdict = judge_round_pair(registry, "math.1", misapplied.parsed_y1, misapplied.parsed_y2, misapplied.meta);
        o.expect(misapplied.verdict->status == VerdictStatus::fail, "math transcript pair should fail");
        ScriptedModel keyed(fs::path(DERIVKIT_FIXTURES) / "math_transcript_judge.jsonl");
        o.expect(attribute_error(misapplied, keyed, options) == ErrorCategory::dr_misapplied, "math transcript category");
    });

    criterion("AC8", "annotation rates match a tally of the printed Choice table", [&](Outcome& o) {
        const auto candidates = read_candidates(fs::path(DERIVKIT_FIXTURES) / "choice_candidates.jsonl");
        o.expect(candidates.size() == 10, "candidate count");
        // Marks as printed: DR1 A,B,E; DR2 A,B,C,E; DR3 none; DR4 A,C,E; DR5 A,C; DR6 A,B,D,E;
        // DR7 A,C; DR8 A,B,C,E; DR9 D; DR10 A,B,C,E.
        const std::vector<std::string> printed{"ABE", "ABCE", "", "ACE", "AC", "ABDE", "AC", "ABCE", "D", "ABCE"};
        std::array<std::size_t, 5> tally{};
        for (const auto& marks : printed) {
            for (char ch : marks) ++tally[ch - 'A'];
        }
        const auto rates = summarize_annotations(candidates);
        for (std::size_t d = 0; d < 5; ++d) {
            o.expect(rates.counts[d] == tally[d], std::string(1, kAnnotationDims[d]) + " count");
            o.expect(rates.rates[d] == static_cast<double>(tally[d]) / 10.0, std::string(1, kAnnotationDims[d]) + " rate");
        }
        o.expect(tally == std::array<std::size_t, 5>{8, 5, 6, 2, 6}, "printed tally");
    });

    criterion("AC9", "generate, run and score twice give identical bytes", [&](Outcome& o) {
        std::array<std::array<std::string, 3>, 2> bytes;
        for (int pass = 0; pass < 2; ++pass) {
            const auto dir = scratch("ac9_" + std::to_string(pass));
            std::vector<CasePair> cases;
            for (const auto& id : all_rules) {
                auto batch = build_cases(registry, id, 10, kSeed);
                cases.insert(cases.end(), batch.begin(), batch.end());
            }
            const auto digest = write_case_file(dir / "cases.jsonl", CaseManifest{all_rules, 10, kSeed, cases.size()}, cases);
            const auto file = read_case_file(dir / "cases.jsonl", registry);
            OracleModel oracle;
            RunManifest manifest;
            manifest.rules = all_rules;
            manifest.model_name = oracle.name();
            manifest.case_count = file.cases.size();
            manifest.seed = kSeed;
            manifest.case_digest = digest;
            manifest.run_id = make_run_id(manifest);
            RunOptions options;
            options.workers = 3;
            {
                TranscriptWriter writer(dir / "transcripts.jsonl", manifest);
                run_cases(registry, file.cases, oracle, options, {}, [&](const TranscriptRecord& r) { writer.append(r); });
            }
            const auto run = load_run(dir / "transcripts.jsonl", digest);
            util::write_file((dir / "scores.csv").string(), scores_csv(score_records(registry, run.records)));
            bytes[pass] = {util::read_file((dir / "cases.jsonl").string()),
                           util::read_file((dir / "transcripts.jsonl").string()),
                           util::read_file((dir / "scores.csv").string())};
        }
        o.expect(bytes[0][0] == bytes[1][0], "case files differ");
        o.expect(bytes[0][1] == bytes[1][1], "transcripts differ");
        o.expect(bytes[0][2] == bytes[1][2], "score files differ");
    });

    std::cout << (failures == 0 ? "all acceptance criteria pass" : std::to_string(failures) + " criteria fail") << "\n";
    return failures == 0 ? 0 : 1;
}
