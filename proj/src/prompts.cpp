#include "derivkit/prompts.hpp"

#include <array>

#include "derivkit/errors.hpp"

namespace derivkit {

namespace {

constexpr std::array<std::string_view, 7> kNames{"none", "dp", "cot", "sb", "os", "fs", "an"};

constexpr std::string_view kDerivationPrompt =
    "For the second question, you need to: (1) first explain what change has occurred in the input compared to "
    "the first question; (2) explain what kind of change in output should result from this change in input in "
    "the context of this task; (3) apply this output change to your original answer to the first question in "
    "order to solve the second question.";
constexpr std::string_view kChainOfThought = "For each problem, you need to provide your thought process.";
constexpr std::string_view kStepBack =
    "For each problem, you need to first explain the fundamental principles involved in solving it.";
constexpr std::string_view kAnalogy =
    "For each problem, you need to first present three related but not identical problems, along with a "
    "description of each problem and its solution.";

std::string render_demos(std::span<const DemoPair> demos) {
    std::string out = demos.size() == 1
                          ? "Here is an original question and a transformed question, each with its answer."
                          : "Here are original questions and transformed questions, each with its answer.";
    for (std::size_t i = 0; i < demos.size(); ++i) {
        const auto& d = demos[i];
        out += "\n\nExample " + std::to_string(i + 1) + "\nOriginal question:\n" + d.base_question +
               "\nOriginal answer: " + d.base_answer + "\nTransformed question:\n" + d.transformed_question +
               "\nTransformed answer: " + d.transformed_answer;
    }
    return out;
}

}  // namespace

std::string_view to_string(StrategyId s) { return kNames[static_cast<std::size_t>(s)]; }

std::optional<StrategyId> parse_strategy(std::string_view s) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == s) return static_cast<StrategyId>(i);
    }
    return std::nullopt;
}

std::size_t required_demos(StrategyId s) {
    switch (s) {
        case StrategyId::os: return 1;
        case StrategyId::fs: return 5;
        default: return 0;
    }
}

std::string strategy_suffix(StrategyId s, std::span<const DemoPair> demos) {
    if (demos.size() != required_demos(s)) {
        throw ContractViolation("strategy " + std::string(to_string(s)) + " takes " +
                                std::to_string(required_demos(s)) + " demonstration pairs, got " +
                                std::to_string(demos.size()));
    }
    switch (s) {
        case StrategyId::none: return "";
        case StrategyId::dp: return std::string(kDerivationPrompt);
        case StrategyId::cot: return std::string(kChainOfThought);
        case StrategyId::sb: return std::string(kStepBack);
        case StrategyId::an: return std::string(kAnalogy);
        case StrategyId::os:
        case StrategyId::fs: return render_demos(demos);
    }
    return "";
}

std::string compose_system_prompt(std::string_view task_template, std::string_view suffix) {
    if (suffix.empty()) return std::string(task_template);
    return std::string(task_template) + "\n\n" + std::string(suffix);
}

}  // namespace derivkit
