#include <gtest/gtest.h>

#include <filesystem>

#include "derivkit/analysis.hpp"
#include "derivkit/catalog.hpp"
#include "derivkit/errors.hpp"
#include "derivkit/util.hpp"

using namespace derivkit;
namespace fs = std::filesystem;

namespace {

DcsReport row(std::string id, TaskId task, DrType type, std::size_t passes, std::size_t total) {
    DcsReport r;
    r.rule_id = std::move(id);
    r.task = task;
    r.dr_type = type;
    r.passes = passes;
    r.total = total;
    r.gamma = total ? static_cast<double>(passes) / static_cast<double>(total) : 0.0;
    return r;
}

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("derivkit_analysis_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<TranscriptRecord> stubborn_records(const std::string& rule, std::size_t n) {
    const auto& reg = standard_registry();
    StubbornModel stubborn;
    return run_cases(reg, build_cases(reg, rule, n, 7), stubborn, RunOptions{});
}

}  // namespace

TEST(AggregateScores, TypeMeans) {
    const std::vector<DcsReport> rows{row("b1.1", TaskId::choice, DrType::ge, 4, 4),
                                      row("b4.1", TaskId::graph_path, DrType::ge, 2, 4)};
    const auto s = aggregate_scores(rows);
    EXPECT_DOUBLE_EQ(s.type_means.at(DrType::ge), 0.75);
    EXPECT_DOUBLE_EQ(*s.overall_mean, 0.75);
    const std::vector<DcsReport> single{row("a1.1", TaskId::sentiment, DrType::id, 1, 3)};
    EXPECT_DOUBLE_EQ(aggregate_scores(single).type_means.at(DrType::id), 1.0 / 3.0);
    EXPECT_FALSE(aggregate_scores(std::vector<DcsReport>{}).overall_mean.has_value());
}

TEST(ParseCategoryReply, Tokens) {
    EXPECT_EQ(parse_category_reply("DR-Unaware"), ErrorCategory::dr_unaware);
    EXPECT_EQ(parse_category_reply("category: dr_misapplied."), ErrorCategory::dr_misapplied);
    EXPECT_EQ(parse_category_reply("DR Mislocalized, clearly. DR-Mislocalized."), ErrorCategory::dr_mislocalized);
    EXPECT_EQ(parse_category_reply("It is unaware of the change."), std::nullopt);
    EXPECT_EQ(parse_category_reply("DR-Unaware or DR-Misapplied"), std::nullopt);
}

TEST(AttributeError, ScriptedJudgeReplies) {
    const auto records = stubborn_records("b4.1", 1);
    ASSERT_EQ(records[0].verdict->status, VerdictStatus::fail);
    JudgeOptions opt;
    ScriptedModel unaware(std::vector<std::string>{"DR-Unaware"});
    EXPECT_EQ(attribute_error(records[0], unaware, opt), ErrorCategory::dr_unaware);

    ScriptedModel vague(std::vector<std::string>{"The model got confused.", "Still not sure."});
    EXPECT_EQ(attribute_error(records[0], vague, opt), ErrorCategory::unclassifiable);

    ScriptedModel second_try(std::vector<std::string>{"Hmm.", "Category: DR-Mislocalized"});
    EXPECT_EQ(attribute_error(records[0], second_try, opt), ErrorCategory::dr_mislocalized);
}

TEST(AttributeError, OnlyFailedRecords) {
    const auto& reg = standard_registry();
    OracleModel oracle;
    const auto passing = execute_case(reg, build_cases(reg, "b4.1", 1, 7).front(), oracle, RunOptions{});
    ScriptedModel judge(std::vector<std::string>{"DR-Unaware"});
    EXPECT_THROW(attribute_error(passing, judge, JudgeOptions{}), ContractViolation);
}

TEST(AttributeFailures, SkipsPassingRecords) {
    auto records = stubborn_records("b1.1", 20);
    std::size_t fails = 0;
    for (const auto& r : records) fails += r.verdict->status == VerdictStatus::fail;
    ASSERT_GT(fails, 0u);
    ASSERT_LT(fails, records.size());
    ScriptedModel judge(std::vector<std::string>{}, {{"Case: ", "DR-Unaware"}});
    const auto out = attribute_failures(records, judge, JudgeOptions{});
    EXPECT_EQ(out.size(), fails);
    for (const auto& a : out) EXPECT_EQ(a.judge_model, "builtin:scripted");
}

TEST(AttributeFailures, RegeneratesUnderChainOfThought) {
    const auto& reg = standard_registry();
    const auto cases = build_cases(reg, "b4.1", 2, 7);
    StubbornModel stubborn;
    const auto records = run_cases(reg, cases, stubborn, RunOptions{});
    // The judge sees the regenerated dialogue, whose system prompt carries the cot instruction.
    ScriptedModel judge(std::vector<std::string>{}, {{"provide your thought process", "DR-Misapplied"},
                                                     {"Case: ", "DR-Unaware"}});
    JudgeOptions opt;
    opt.registry = &reg;
    opt.subject = &stubborn;
    const auto regenerated = attribute_failures(records, judge, opt, cases);
    ASSERT_EQ(regenerated.size(), 2u);
    EXPECT_EQ(regenerated[0].category, ErrorCategory::dr_misapplied);
    opt.regenerate = false;
    EXPECT_EQ(attribute_failures(records, judge, opt, cases)[0].category, ErrorCategory::dr_unaware);
}

TEST(JudgePrompt, CarriesDefinitionsAndTranscript) {
    const auto records = stubborn_records("b4.1", 1);
    const auto msgs = build_judge_prompt(records[0]);
    ASSERT_EQ(msgs.size(), 2u);
    EXPECT_NE(msgs[0].text.find("DR-Unaware: LLM keeps the same output."), std::string::npos);
    EXPECT_NE(msgs[0].text.find("DR-Mislocalized"), std::string::npos);
    EXPECT_NE(msgs[0].text.find("DR-Misapplied"), std::string::npos);
    EXPECT_TRUE(msgs[1].text.starts_with("Case: " + records[0].case_id + "\n"));
    EXPECT_NE(msgs[1].text.find(records[0].messages[4].text), std::string::npos);
}

TEST(SummarizeAttribution, Examples) {
    using C = ErrorCategory;
    const std::vector<C> four{C::dr_misapplied, C::dr_misapplied, C::dr_unaware, C::dr_mislocalized};
    const auto s = summarize_attribution(four);
    EXPECT_DOUBLE_EQ(s.fractions.at(C::dr_misapplied), 0.5);
    EXPECT_DOUBLE_EQ(s.fractions.at(C::dr_unaware), 0.25);
    EXPECT_DOUBLE_EQ(s.fractions.at(C::dr_mislocalized), 0.25);

    const std::vector<C> none(4, C::unclassifiable);
    const auto e = summarize_attribution(none);
    EXPECT_TRUE(e.fractions.empty());
    EXPECT_EQ(e.unclassifiable, 4u);
    EXPECT_EQ(e.classified, 0u);
}

TEST(SummarizeAttribution, PropertyFractionsSumToOne) {
    std::mt19937 gen(1);
    for (int t = 0; t < 100; ++t) {
        std::vector<ErrorCategory> cats;
        for (int i = 0; i < 1 + static_cast<int>(gen() % 30); ++i) cats.push_back(static_cast<ErrorCategory>(gen() % 4));
        const auto s = summarize_attribution(cats);
        if (s.classified == 0) continue;
        double sum = 0;
        for (const auto& [c, f] : s.fractions) sum += f;
        EXPECT_NEAR(sum, 1.0, 1e-12);
        EXPECT_EQ(s.classified + s.unclassifiable, cats.size());
    }
}

TEST(AttributionFile, RoundTrip) {
    const auto dir = temp_dir("attr");
    const std::vector<AttributionRecord> recs{{"b4.1-0005", ErrorCategory::dr_unaware, "j"},
                                              {"b4.1-0006", ErrorCategory::unclassifiable, "j"}};
    write_attribution(dir / "a.jsonl", recs);
    EXPECT_EQ(read_attribution(dir / "a.jsonl"), recs);
}

TEST(DrCandidates, ParseModelOutput) {
    const std::string text =
        "Here are my rules.\n"
        "DR 1: Option Permutation - Shuffling the order of answer options should trigger corresponding label updates.\n"
        "T: options are permuted by a bijection p\n"
        "R: y2 = p(y1)\n"
        "DR 2: Missing relation\n"
        "T: something\n";
    const auto c = parse_dr_candidates(text, TaskId::choice);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_TRUE(c[0].description.starts_with("Option Permutation - Shuffling the order of answer options"));
    EXPECT_EQ(c[0].t_text, "options are permuted by a bijection p");
    EXPECT_EQ(c[0].annotations, (std::array<bool, 5>{}));
}

TEST(DrCandidates, GenerateCountsAndWarnings) {
    std::string ten;
    for (int k = 1; k <= 10; ++k) {
        ten += "DR " + std::to_string(k) + ": rule " + std::to_string(k) + "\nT: t\nR: r\n";
    }
    ScriptedModel good(std::vector<std::string>{ten});
    ModelConfig cfg;
    const auto r = generate_dr_candidates(TaskId::choice, 10, good, cfg);
    EXPECT_EQ(r.candidates.size(), 10u);
    EXPECT_TRUE(r.warnings.empty());

    ScriptedModel junk(std::vector<std::string>{"I cannot help with that."});
    const auto j = generate_dr_candidates(TaskId::choice, 10, junk, cfg);
    EXPECT_TRUE(j.candidates.empty());
    EXPECT_EQ(j.warnings.size(), 1u);

    ScriptedModel again(std::vector<std::string>{ten});
    EXPECT_EQ(generate_dr_candidates(TaskId::choice, 3, again, cfg).candidates.size(), 3u);
    EXPECT_THROW(generate_dr_candidates(TaskId::choice, 0, again, cfg), ContractViolation);
}

TEST(DrCandidates, PromptMentionsTaskAndCount) {
    const auto p = build_drgen_prompt(TaskId::graph_path, 10);
    EXPECT_NE(p.find("10"), std::string::npos);
    EXPECT_NE(p.find("T:"), std::string::npos);
}

TEST(Annotations, Rates) {
    EXPECT_EQ(summarize_annotations(std::vector<DrCandidate>(3)).rates, (std::array<double, 5>{}));
    DrCandidate c;
    c.annotations = {true, true, false, false, true};
    const auto r = summarize_annotations(std::vector<DrCandidate>{c});
    EXPECT_EQ(r.rates, (std::array<double, 5>{1, 1, 0, 0, 1}));
}

TEST(Annotations, FixtureFileRoundTrip) {
    const auto cands = read_candidates(fs::path(DERIVKIT_FIXTURES) / "choice_candidates.jsonl");
    const auto dir = temp_dir("cands");
    write_candidates(dir / "c.jsonl", cands);
    EXPECT_EQ(read_candidates(dir / "c.jsonl"), cands);
    EXPECT_DOUBLE_EQ(summarize_annotations(cands).rates[0], 0.8);
}

TEST(Reports, CsvRoundTripAndHeaderOnly) {
    const std::vector<DcsReport> rows{row("b1.1", TaskId::choice, DrType::ge, 3, 4),
                                      row("math.1", TaskId::math_integral, DrType::ts, 0, 2)};
    EXPECT_EQ(parse_scores_csv(scores_csv(rows)), rows);
    EXPECT_EQ(scores_csv({}), "rule_id,task,dr_type,passes,total,gamma,unparseable,errored\n");
    EXPECT_THROW(parse_scores_csv("rule_id,task,dr_type,passes,total,gamma,unparseable,errored\nb1.1,choice,GE,3,4,0.9,0,0\n"),
                 IntegrityError);
}

TEST(Reports, OracleSummaryAndDeterminism) {
    const auto& reg = standard_registry();
    std::vector<CasePair> cases;
    for (const auto& id : reg.rule_ids()) {
        auto b = build_cases(reg, id, 4, 2);
        cases.insert(cases.end(), b.begin(), b.end());
    }
    OracleModel oracle;
    ReportInputs in;
    in.scores = score_records(reg, run_cases(reg, cases, oracle, RunOptions{}));
    const auto text = render_summary(in);
    EXPECT_EQ(text.find("gamma=0"), std::string::npos);
    EXPECT_NE(text.find("Overall mean  1.000000"), std::string::npos);

    const auto a = temp_dir("rep_a");
    const auto b = temp_dir("rep_b");
    emit_report(a, in);
    emit_report(b, in);
    EXPECT_EQ(util::read_file((a / "summary.txt").string()), util::read_file((b / "summary.txt").string()));
    EXPECT_EQ(util::read_file((a / "scores.csv").string()), util::read_file((b / "scores.csv").string()));
    EXPECT_EQ(parse_scores_csv(util::read_file((a / "scores.csv").string())), in.scores);
}
