#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "derivkit/task.hpp"

namespace derivkit {

struct UserTurn {
    std::string text;
    std::optional<std::vector<std::uint8_t>> image;  // PPM payload
    bool operator==(const UserTurn&) const = default;
};

/// Task instruction used as the system prompt; always ends with the final-answer contract.
std::string system_template(const TaskInput& base);

/// First sentence of each task's system template; the oracle model keys on it.
std::string_view task_intro(TaskId task);
std::optional<TaskId> detect_task(std::string_view system_text);

UserTurn render_user_turn(const TaskInput& input);

/// Text-only form used inside demonstrations. Images become a size placeholder.
std::string canonical_text(const TaskInput& input);

// Pieces of the renderings, shared with the oracle's prompt reader.
std::string render_logic_premises(const LogicInput& in);
std::string render_table(const TableInput& in);
std::string render_integrand(const IntegralInput& f);

}  // namespace derivkit
