#pragma once

#include <string_view>

#include "derivkit/dr_core.hpp"
#include "derivkit/rng.hpp"
#include "derivkit/task.hpp"

namespace derivkit {

namespace rules {
inline constexpr std::string_view kChecklist = "a1.1";
inline constexpr std::string_view kDeepWordBug = "a1.2";
inline constexpr std::string_view kColumnAdding = "a2.1";
inline constexpr std::string_view kColumnReversing = "a2.2";
inline constexpr std::string_view kOptionMirroring = "b1.1";
inline constexpr std::string_view kExplanationAdding = "b1.2";
inline constexpr std::string_view kHorizontalFlip = "b2.1";
inline constexpr std::string_view kVerticalConcat = "b2.2";
inline constexpr std::string_view kPremiseReversing = "b3.1";
inline constexpr std::string_view kCorollary = "b3.2";
inline constexpr std::string_view kEndpointSwap = "b4.1";
inline constexpr std::string_view kEndpointRetract = "b4.2";
inline constexpr std::string_view kIntegralTerm = "math.1";
inline constexpr std::string_view kWalkReversal = "space.1";
}  // namespace rules

/// Every shipped rule with its transform and relation bound. Built once; immutable.
const RuleRegistry& standard_registry();

/// Draws a synthetic base input for the task.
TaskInput generate_input(TaskId task, Rng& rng);

/// Reference answer computed from the structured input. Throws GenerationError when the
/// input lies outside what the solvers understand (e.g. free-form corpus questions).
TaskOutput solve(const TaskInput& input);

}  // namespace derivkit
