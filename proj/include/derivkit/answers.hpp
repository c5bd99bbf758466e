#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "derivkit/task.hpp"

namespace derivkit {

inline constexpr std::string_view kFinalAnswerMarker = "Final answer:";

/// Extracts a task answer from free model text.
///
/// The candidate is the rest of the line after the last "Final answer:" (case-insensitive).
/// Without a marker the last nonempty line is used, trimmed past any "answer is" phrase.
/// Grammars: choice = a standalone letter A-E; logic = every "(k)"; sentiment/table = the
/// trimmed string; graph = integers joined by "->" or the arrow glyph; math = the last
/// integer; image = "left" <int> ... "right" <int>; space = last integer, 0..19.
/// Returns nullopt when the grammar does not match.
std::optional<TaskOutput> parse_answer(TaskId task, std::string_view text);

/// Canonical answer text; parse_answer(task, render_answer(y)) == y.
std::string render_answer(const TaskOutput& y);

}  // namespace derivkit
