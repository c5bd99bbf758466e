#include <gtest/gtest.h>

#include <set>

#include "derivkit/answers.hpp"
#include "derivkit/catalog.hpp"
#include "derivkit/errors.hpp"
#include "derivkit/prompts.hpp"
#include "derivkit/runner.hpp"
#include "derivkit/structured_tasks.hpp"

using namespace derivkit;

TEST(StrategySuffix, DerivationPromptOpening) {
    EXPECT_TRUE(strategy_suffix(StrategyId::dp).starts_with(
        "For the second question, you need to: (1) first explain what change has occurred in the input"));
    EXPECT_EQ(strategy_suffix(StrategyId::none), "");
    EXPECT_FALSE(strategy_suffix(StrategyId::cot).empty());
    EXPECT_FALSE(strategy_suffix(StrategyId::sb).empty());
    EXPECT_FALSE(strategy_suffix(StrategyId::an).empty());
}

TEST(StrategySuffix, DemoCountEnforced) {
    EXPECT_THROW(strategy_suffix(StrategyId::os), ContractViolation);
    EXPECT_THROW(strategy_suffix(StrategyId::fs, std::vector<DemoPair>(1)), ContractViolation);
    EXPECT_THROW(strategy_suffix(StrategyId::dp, std::vector<DemoPair>(1)), ContractViolation);
}

TEST(StrategySuffix, ParseNames) {
    for (auto s : {StrategyId::none, StrategyId::dp, StrategyId::cot, StrategyId::sb, StrategyId::os, StrategyId::fs,
                   StrategyId::an}) {
        EXPECT_EQ(parse_strategy(to_string(s)), s);
    }
    EXPECT_EQ(parse_strategy("tot"), std::nullopt);
}

TEST(StrategySuffix, FewShotGraphDemosCarrySolverAnswers) {
    const auto& reg = standard_registry();
    const auto demos = make_demo_pairs(reg, "b4.1", 7, StrategyId::fs);
    ASSERT_EQ(demos.size(), 5u);
    const auto pool = build_demo_cases(reg, "b4.1", 7);
    for (std::size_t i = 0; i < demos.size(); ++i) {
        const auto& g1 = std::get<GraphInput>(pool[i].base_input);
        const auto& g2 = std::get<GraphInput>(pool[i].transformed_input);
        EXPECT_EQ(demos[i].base_answer, render_answer(PathAnswer{find_path(g1)}));
        EXPECT_EQ(demos[i].transformed_answer, render_answer(PathAnswer{find_path(g2)}));
    }
    const auto text = strategy_suffix(StrategyId::fs, demos);
    for (int k = 1; k <= 5; ++k) EXPECT_NE(text.find("Example " + std::to_string(k)), std::string::npos);
    EXPECT_EQ(strategy_suffix(StrategyId::fs, demos), text);
}

TEST(StrategySuffix, DemosNeverOverlapScoredCases) {
    const auto& reg = standard_registry();
    for (const auto& id : reg.rule_ids()) {
        std::set<std::string> scored;
        for (const auto& c : build_cases(reg, id, 30, 5)) scored.insert(c.case_id);
        for (const auto& d : build_demo_cases(reg, id, 5)) EXPECT_FALSE(scored.contains(d.case_id)) << d.case_id;
    }
}

TEST(ComposeSystemPrompt, AppendsAfterTemplate) {
    EXPECT_EQ(compose_system_prompt("T", ""), "T");
    EXPECT_EQ(compose_system_prompt("T", "S"), "T\n\nS");
}
