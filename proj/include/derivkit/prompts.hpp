#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace derivkit {

enum class StrategyId { none, dp, cot, sb, os, fs, an };

std::string_view to_string(StrategyId s);
std::optional<StrategyId> parse_strategy(std::string_view s);

/// Number of demonstration pairs a strategy consumes (1 for os, 5 for fs, else 0).
std::size_t required_demos(StrategyId s);

/// One original/transformed question-answer pair, rendered in task-canonical form.
struct DemoPair {
    std::string case_id;
    std::string base_question;
    std::string base_answer;
    std::string transformed_question;
    std::string transformed_answer;
};

/// Text appended to the task's system prompt. Empty for none.
/// Throws ContractViolation when demos.size() != required_demos(s).
std::string strategy_suffix(StrategyId s, std::span<const DemoPair> demos = {});

/// The system prompt with the suffix attached after the task instruction.
std::string compose_system_prompt(std::string_view task_template, std::string_view suffix);

}  // namespace derivkit
