#include <gtest/gtest.h>

#include "derivkit/answers.hpp"
#include "derivkit/catalog.hpp"
#include "derivkit/render.hpp"

using namespace derivkit;

TEST(ParseAnswer, FinalAnswerLinePath) {
    EXPECT_EQ(parse_answer(TaskId::graph_path, "The path goes through 6.\nFinal answer: 2 -> 6 -> 3 -> 5"),
              TaskOutput(PathAnswer{{2, 6, 3, 5}}));
    EXPECT_EQ(parse_answer(TaskId::graph_path, "Final answer: 2→" "6→" "3"), TaskOutput(PathAnswer{{2, 6, 3}}));
    EXPECT_EQ(parse_answer(TaskId::graph_path, "Final answer: [2, 6, 3]"), TaskOutput(PathAnswer{{2, 6, 3}}));
}

TEST(ParseAnswer, FallbackPhrase) {
    EXPECT_EQ(parse_answer(TaskId::math_integral, "Therefore, the final answer is: 54."), TaskOutput(IntegerAnswer{54}));
    EXPECT_EQ(parse_answer(TaskId::math_integral, "Final answer: 54.6"), std::nullopt);
    EXPECT_EQ(parse_answer(TaskId::math_integral, "Final answer: -7"), TaskOutput(IntegerAnswer{-7}));
}

TEST(ParseAnswer, RefusalIsUnparseable) {
    for (auto task : kAllTasks) {
        if (task == TaskId::sentiment || task == TaskId::table_qa) continue;
        EXPECT_EQ(parse_answer(task, "I refuse"), std::nullopt) << to_string(task);
    }
    EXPECT_EQ(parse_answer(TaskId::sentiment, ""), std::nullopt);
}

TEST(ParseAnswer, LastMarkerWins) {
    EXPECT_EQ(parse_answer(TaskId::choice, "Final answer: A\nOn reflection.\nFinal answer: (D)"), TaskOutput(ChoiceAnswer{'D'}));
    EXPECT_EQ(parse_answer(TaskId::choice, "FINAL ANSWER: b"), TaskOutput(ChoiceAnswer{'B'}));
}

TEST(ParseAnswer, ChoiceNeedsSingleLetter) {
    EXPECT_EQ(parse_answer(TaskId::choice, "Final answer: A or B"), std::nullopt);
    EXPECT_EQ(parse_answer(TaskId::choice, "Final answer: C. 42"), TaskOutput(ChoiceAnswer{'C'}));
}

TEST(ParseAnswer, ProofAndCountsAndSpace) {
    EXPECT_EQ(parse_answer(TaskId::logic, "Final answer: (4), (5)"), TaskOutput(ProofAnswer{{4, 5}}));
    EXPECT_EQ(parse_answer(TaskId::logic, "Final answer: 4, 5"), TaskOutput(ProofAnswer{{4, 5}}));
    EXPECT_EQ(parse_answer(TaskId::image_count, "Final answer: left:1 right:2"), TaskOutput(CountAnswer{1, 2}));
    EXPECT_EQ(parse_answer(TaskId::image_count, "Final answer: 1 facing left and 2 facing right"), std::nullopt);
    EXPECT_EQ(parse_answer(TaskId::image_count, "Final answer: left 3, right 0"), TaskOutput(CountAnswer{3, 0}));
    EXPECT_EQ(parse_answer(TaskId::space_walk, "Final answer: position 17"), TaskOutput(PositionAnswer{17}));
    EXPECT_EQ(parse_answer(TaskId::space_walk, "Final answer: 20"), std::nullopt);
}

TEST(ParseAnswer, LabelsStripDecoration) {
    EXPECT_EQ(parse_answer(TaskId::sentiment, "Final answer: **Negative**."), TaskOutput(LabelAnswer{"Negative"}));
    EXPECT_EQ(parse_answer(TaskId::table_qa, "Final answer: \"Norway\""), TaskOutput(LabelAnswer{"Norway"}));
}

TEST(RenderAnswer, CanonicalForms) {
    EXPECT_EQ(render_answer(ChoiceAnswer{'C'}), "C");
    EXPECT_EQ(render_answer(ProofAnswer{{4, 5}}), "(4), (5)");
    EXPECT_EQ(render_answer(PathAnswer{{2, 6, 3, 5}}), "2 -> 6 -> 3 -> 5");
    EXPECT_EQ(render_answer(CountAnswer{1, 2}), "left:1 right:2");
    EXPECT_EQ(render_answer(IntegerAnswer{54}), "54");
}

TEST(RenderAnswer, PropertyRoundTripOverGeneratedInputs) {
    Rng rng(21);
    for (auto task : kAllTasks) {
        for (int i = 0; i < 100; ++i) {
            const auto y = solve(generate_input(task, rng));
            const auto text = "Some reasoning.\n" + std::string(kFinalAnswerMarker) + " " + render_answer(y);
            EXPECT_EQ(parse_answer(task, text), y) << to_string(task) << ": " << text;
        }
    }
}

TEST(Render, UserTurnShapes) {
    const GraphInput g{{0, 1, 2}, {{0, 1}, {1, 2}}, 0, 2};
    const auto turn = render_user_turn(g);
    EXPECT_NE(turn.text.find("{nodes: [0, 1, 2], edges: [[0, 1], [1, 2]]}"), std::string::npos);
    EXPECT_NE(turn.text.find("The start node: 0"), std::string::npos);
    EXPECT_NE(turn.text.find("The end node: 2"), std::string::npos);

    const IntegralInput f{{{1, Basis::exp, 0}}, 4};
    EXPECT_EQ(render_user_turn(f).text, "The function is: e^x.");
    const IntegralInput fx{{{1, Basis::exp, 0}, {1, Basis::power, 1}}, 4};
    EXPECT_EQ(render_user_turn(fx).text, "The function is: e^x+x.");

    Rng rng(3);
    const auto img = generate_input(TaskId::image_count, rng);
    const auto img_turn = render_user_turn(img);
    ASSERT_TRUE(img_turn.image.has_value());
    EXPECT_EQ((*img_turn.image)[0], 'P');
    EXPECT_NE(canonical_text(img).find("[image"), std::string::npos);
}

TEST(Render, SystemTemplateDetectsTask) {
    Rng rng(4);
    for (auto task : kAllTasks) {
        const auto sys = system_template(generate_input(task, rng));
        EXPECT_EQ(detect_task(sys), task) << to_string(task);
        EXPECT_NE(sys.find("Final answer:"), std::string::npos);
    }
    EXPECT_EQ(detect_task("Hello there."), std::nullopt);
}
