#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "derivkit/answers.hpp"
#include "derivkit/catalog.hpp"
#include "derivkit/codec.hpp"
#include "derivkit/errors.hpp"
#include "derivkit/runner.hpp"
#include "derivkit/structured_tasks.hpp"
#include "derivkit/util.hpp"

using namespace derivkit;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("derivkit_runner_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunManifest manifest_for(const std::vector<CasePair>& cases, const std::string& model, const std::string& digest) {
    RunManifest m;
    for (const auto& c : cases) {
        if (std::find(m.rules.begin(), m.rules.end(), c.rule_id) == m.rules.end()) m.rules.push_back(c.rule_id);
    }
    m.model_name = model;
    m.case_count = cases.size();
    m.case_digest = digest;
    m.run_id = make_run_id(m);
    return m;
}

// Always fails at the transport layer.
class DeadModel final : public ChatModel {
public:
    std::string name() const override { return "dead"; }
    std::string complete(std::span<const ChatMessage>, const ModelConfig&) override { throw TransportError("down"); }
};

}  // namespace

TEST(BuildCases, EndpointSwapCases) {
    const auto& reg = standard_registry();
    const auto cases = build_cases(reg, "b4.1", 50, 7);
    ASSERT_EQ(cases.size(), 50u);
    for (const auto& c : cases) {
        const auto& g1 = std::get<GraphInput>(c.base_input);
        const auto& g2 = std::get<GraphInput>(c.transformed_input);
        EXPECT_EQ(g1.nodes, g2.nodes);
        EXPECT_EQ(g1.edges, g2.edges);
        EXPECT_EQ(g1.start, g2.end);
        EXPECT_EQ(g1.end, g2.start);
        EXPECT_EQ(c.rule_id, "b4.1");
    }
    EXPECT_EQ(cases.front().case_id, "b4.1-0005");
}

TEST(BuildCases, EmptyAndDeterministic) {
    const auto& reg = standard_registry();
    EXPECT_TRUE(build_cases(reg, "b4.1", 0, 7).empty());
    for (const auto& id : reg.rule_ids()) {
        const auto a = build_cases(reg, id, 10, 99);
        EXPECT_EQ(a, build_cases(reg, id, 10, 99)) << id;
        EXPECT_EQ(serialize_case_file({{id}, 10, 99, a.size()}, a),
                  serialize_case_file({{id}, 10, 99, a.size()}, build_cases(reg, id, 10, 99)));
        EXPECT_NE(a, build_cases(reg, id, 10, 100)) << id;
    }
}

TEST(BuildCases, PrefixStableAcrossN) {
    const auto& reg = standard_registry();
    const auto small = build_cases(reg, "space.1", 5, 1);
    const auto large = build_cases(reg, "space.1", 20, 1);
    EXPECT_TRUE(std::equal(small.begin(), small.end(), large.begin()));
}

TEST(BuildCases, UnknownRule) {
    EXPECT_THROW(build_cases(standard_registry(), "c9.9", 1, 1), RegistryError);
}

TEST(BuildCases, FromCorpus) {
    const auto& reg = standard_registry();
    const auto corpus = load_corpus(fs::path(DERIVKIT_FIXTURES) / "graph_corpus.jsonl", TaskId::graph_path);
    ASSERT_EQ(corpus.items.size(), 10u);
    const auto cases = build_cases(reg, "b4.1", 5, 3, &corpus);
    ASSERT_EQ(cases.size(), 5u);
    std::set<std::string> seen;
    for (const auto& c : cases) {
        const auto& g = std::get<GraphInput>(c.base_input);
        EXPECT_NE(std::find(corpus.items.begin(), corpus.items.end(), c.base_input), corpus.items.end());
        seen.insert(std::to_string(g.start) + "-" + std::to_string(g.end) + "-" + std::to_string(g.nodes.size()));
    }
    EXPECT_EQ(seen.size(), 5u);
    EXPECT_EQ(cases, build_cases(reg, "b4.1", 5, 3, &corpus));
    EXPECT_THROW(build_cases(reg, "b4.1", 11, 3, &corpus), GenerationError);
}

TEST(ReproduceTransform, MatchesStoredCase) {
    const auto& reg = standard_registry();
    for (const auto& id : reg.rule_ids()) {
        for (const auto& c : build_cases(reg, id, 5, 4)) {
            OracleMeta meta;
            EXPECT_EQ(reproduce_transform(reg, c, &meta), c.transformed_input) << c.case_id;
            EXPECT_EQ(meta, c.oracle_meta) << c.case_id;
        }
    }
}

TEST(RenderDialogue, TextAndImageTurns) {
    const auto& reg = standard_registry();
    const auto g = build_cases(reg, "b4.1", 1, 7).front();
    const auto d = render_dialogue(g, StrategyId::none);
    EXPECT_NE(d.first.text.find("The start node: "), std::string::npos);
    EXPECT_FALSE(d.first.image.has_value());
    EXPECT_NE(d.system.find("Final answer:"), std::string::npos);

    const auto m = build_cases(reg, "math.1", 1, 7).front();
    EXPECT_TRUE(render_dialogue(m, StrategyId::none).first.text.starts_with("The function is: "));

    const auto img = build_cases(reg, "b2.2", 1, 7).front();
    const auto di = render_dialogue(img, StrategyId::dp);
    ASSERT_TRUE(di.first.image.has_value());
    ASSERT_TRUE(di.second.image.has_value());
    EXPECT_EQ(decode_ppm(*di.second.image).height, 2 * decode_ppm(*di.first.image).height);
    EXPECT_NE(di.system.find("For the second question"), std::string::npos);
}

TEST(ExecuteCase, OraclePassesEveryRule) {
    const auto& reg = standard_registry();
    OracleModel oracle;
    for (const auto& id : reg.rule_ids()) {
        for (const auto& c : build_cases(reg, id, 3, 12)) {
            const auto r = execute_case(reg, c, oracle, RunOptions{});
            ASSERT_TRUE(r.verdict.has_value()) << r.error;
            EXPECT_EQ(r.verdict->status, VerdictStatus::pass) << c.case_id;
            EXPECT_EQ(r.messages.size(), 5u);
        }
    }
}

TEST(ExecuteCase, StubbornFailsMirrorUnlessAnswerIsC) {
    const auto& reg = standard_registry();
    StubbornModel stubborn;
    int checked_a = 0;
    for (const auto& c : build_cases(reg, "b1.1", 40, 2)) {
        const auto truth = std::get<ChoiceAnswer>(solve(c.base_input)).letter;
        const auto r = execute_case(reg, c, stubborn, RunOptions{});
        EXPECT_EQ(r.verdict->status, truth == 'C' ? VerdictStatus::pass : VerdictStatus::fail) << c.case_id;
        checked_a += truth == 'A';
    }
    EXPECT_GT(checked_a, 0);
}

TEST(ExecuteCase, FreshContextDropsRoundOne) {
    const auto& reg = standard_registry();
    const auto c = build_cases(reg, "b4.1", 1, 1).front();
    RunOptions opt;
    opt.fresh_context = true;
    StubbornModel stubborn;  // with no earlier reply in context it answers the transformed question afresh
    const auto r = execute_case(reg, c, stubborn, opt);
    EXPECT_EQ(r.verdict->status, VerdictStatus::pass);
    EXPECT_TRUE(r.fresh_context);
}

TEST(ExecuteCase, ScriptedReplayGivesSameVerdict) {
    const auto& reg = standard_registry();
    const auto c = build_cases(reg, "b4.2", 1, 1).front();
    OracleModel oracle;
    const auto first = execute_case(reg, c, oracle, RunOptions{});
    ScriptedModel replay(std::vector<std::string>{first.messages[2].text, first.messages[4].text});
    const auto again = execute_case(reg, c, replay, RunOptions{});
    EXPECT_EQ(again.verdict, first.verdict);
    EXPECT_EQ(again.parsed_y2, first.parsed_y2);
}

TEST(ExecuteCase, TransportFailureIsRecorded) {
    const auto& reg = standard_registry();
    DeadModel dead;
    const auto c = build_cases(reg, "b4.1", 1, 1).front();
    const auto r = execute_case(reg, c, dead, RunOptions{});
    EXPECT_TRUE(r.errored());
    EXPECT_NE(r.error.find("down"), std::string::npos);
}

TEST(ExecuteCase, TimingOnlyWhenAsked) {
    const auto& reg = standard_registry();
    const auto c = build_cases(reg, "b4.1", 1, 1).front();
    OracleModel oracle;
    EXPECT_FALSE(execute_case(reg, c, oracle, RunOptions{}).wall_ms.has_value());
    RunOptions timed;
    timed.record_timing = true;
    EXPECT_TRUE(execute_case(reg, c, oracle, timed).wall_ms.has_value());
}

TEST(RunCases, OrderIndependentOfWorkers) {
    const auto& reg = standard_registry();
    std::vector<CasePair> cases;
    for (const auto& id : {"b3.1", "a2.1", "space.1"}) {
        auto b = build_cases(reg, id, 15, 8);
        cases.insert(cases.end(), b.begin(), b.end());
    }
    OracleModel oracle;
    RunOptions one;
    RunOptions many;
    many.workers = 8;
    std::vector<std::string> emitted;
    const auto a = run_cases(reg, cases, oracle, one);
    const auto b = run_cases(reg, cases, oracle, many, {}, [&](const TranscriptRecord& r) { emitted.push_back(r.case_id); });
    EXPECT_EQ(a, b);
    ASSERT_EQ(emitted.size(), cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) EXPECT_EQ(emitted[i], cases[i].case_id);
}

TEST(CaseFile, RoundTripAndIntegrity) {
    const auto& reg = standard_registry();
    const auto dir = temp_dir("casefile");
    std::vector<CasePair> cases;
    for (const auto& id : reg.rule_ids()) {
        auto b = build_cases(reg, id, 3, 6);
        cases.insert(cases.end(), b.begin(), b.end());
    }
    const CaseManifest manifest{reg.rule_ids(), 3, 6, cases.size()};
    const auto digest = write_case_file(dir / "c.jsonl", manifest, cases);
    const auto back = read_case_file(dir / "c.jsonl", reg);
    EXPECT_EQ(back.manifest, manifest);
    EXPECT_EQ(back.cases, cases);
    EXPECT_EQ(back.digest, digest);
    EXPECT_EQ(digest, sha256_hex(util::read_file((dir / "c.jsonl").string())));

    const auto text = util::read_file((dir / "c.jsonl").string());
    util::write_file((dir / "cut.jsonl").string(), text.substr(0, text.size() / 2));
    EXPECT_THROW(read_case_file(dir / "cut.jsonl", reg), IntegrityError);

    // A tampered transformed input no longer matches its transform.
    auto tampered = cases;
    std::get<GraphInput>(tampered[std::find_if(cases.begin(), cases.end(), [](const CasePair& c) { return c.rule_id == "b4.1"; }) - cases.begin()].transformed_input).start = 999;
    util::write_file((dir / "t.jsonl").string(), serialize_case_file(manifest, tampered));
    EXPECT_THROW(read_case_file(dir / "t.jsonl", reg), IntegrityError);

    // A relation's required meta key missing.
    auto stripped = cases;
    for (auto& c : stripped) c.oracle_meta.erase("delta");
    util::write_file((dir / "m.jsonl").string(), serialize_case_file(manifest, stripped));
    EXPECT_THROW(read_case_file(dir / "m.jsonl", reg), IntegrityError);
}

TEST(Sha256, KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Transcripts, FiftyRecordsRoundTrip) {
    const auto& reg = standard_registry();
    const auto dir = temp_dir("transcripts");
    auto cases = build_cases(reg, "b2.1", 25, 3);
    auto more = build_cases(reg, "math.1", 25, 3);
    cases.insert(cases.end(), more.begin(), more.end());
    StubbornModel stubborn;
    const auto records = run_cases(reg, cases, stubborn, RunOptions{});
    const auto manifest = manifest_for(cases, stubborn.name(), "d1");
    {
        TranscriptWriter w(dir / "t.jsonl", manifest);
        for (const auto& r : records) w.append(r);
        EXPECT_EQ(w.written(), 50u);
    }
    const auto run = load_run(dir / "t.jsonl", std::string("d1"));
    EXPECT_EQ(run.manifest, manifest);
    EXPECT_EQ(run.records, records);
    EXPECT_THROW(load_run(dir / "t.jsonl", std::string("other")), IntegrityError);

    const auto text = util::read_file((dir / "t.jsonl").string());
    util::write_file((dir / "cut.jsonl").string(), text.substr(0, text.size() - 40));
    EXPECT_THROW(load_run(dir / "cut.jsonl"), IntegrityError);
    const auto last_line = text.rfind('\n', text.size() - 2);
    util::write_file((dir / "short.jsonl").string(), text.substr(0, last_line + 1));
    EXPECT_THROW(load_run(dir / "short.jsonl"), IntegrityError);
}

TEST(Transcripts, EmptyRunHasManifestOnly) {
    const auto dir = temp_dir("empty");
    const auto manifest = manifest_for({}, "builtin:oracle", "d0");
    { TranscriptWriter w(dir / "e.jsonl", manifest); }
    const auto text = util::read_file((dir / "e.jsonl").string());
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
    const auto run = load_run(dir / "e.jsonl");
    EXPECT_TRUE(run.records.empty());
    EXPECT_TRUE(score_records(standard_registry(), run.records).empty());
}

TEST(ScoreRecords, OracleAllOneAndTamperDetected) {
    const auto& reg = standard_registry();
    std::vector<CasePair> cases;
    for (const auto& id : {"space.1", "b3.2"}) {
        auto b = build_cases(reg, id, 10, 5);
        cases.insert(cases.end(), b.begin(), b.end());
    }
    OracleModel oracle;
    auto records = run_cases(reg, cases, oracle, RunOptions{});
    const auto reports = score_records(reg, records);
    ASSERT_EQ(reports.size(), 2u);
    EXPECT_EQ(reports[0].rule_id, "b3.2");  // registry order
    for (const auto& r : reports) EXPECT_EQ(r.gamma, 1.0);

    records[0].verdict->status = VerdictStatus::fail;
    EXPECT_THROW(score_records(reg, records), IntegrityError);
}

TEST(ScoreRecords, ErroredExcludedFromDenominator) {
    const auto& reg = standard_registry();
    const auto cases = build_cases(reg, "b4.1", 4, 5);
    OracleModel oracle;
    DeadModel dead;
    auto records = run_cases(reg, std::span(cases).first(3), oracle, RunOptions{});
    records.push_back(execute_case(reg, cases[3], dead, RunOptions{}));
    const auto reports = score_records(reg, records);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].total, 3u);
    EXPECT_EQ(reports[0].errored, 1u);
    EXPECT_EQ(reports[0].gamma, 1.0);
}

TEST(RunId, DependsOnSettings) {
    RunManifest a;
    a.case_digest = "x";
    a.model_name = "m";
    RunManifest b = a;
    b.strategy = StrategyId::dp;
    EXPECT_EQ(make_run_id(a), make_run_id(a));
    EXPECT_NE(make_run_id(a), make_run_id(b));
    EXPECT_EQ(make_run_id(a).size(), 16u);
}
