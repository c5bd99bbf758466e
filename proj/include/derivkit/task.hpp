#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "derivkit/image.hpp"

namespace derivkit {

// Order matches the TaskInput alternatives below.
enum class TaskId { choice, logic, sentiment, table_qa, graph_path, math_integral, image_count, space_walk };

inline constexpr std::array<TaskId, 8> kAllTasks{
    TaskId::choice,     TaskId::logic,         TaskId::sentiment,   TaskId::table_qa,
    TaskId::graph_path, TaskId::math_integral, TaskId::image_count, TaskId::space_walk};

std::string_view to_string(TaskId t);
std::optional<TaskId> parse_task(std::string_view s);

enum class DrType { id, ge, ts };
std::string_view to_string(DrType t);
std::optional<DrType> parse_dr_type(std::string_view s);

// ---- inputs ---------------------------------------------------------------

struct ChoiceExplanation {
    char target_option = 'A';
    std::string content;
    bool operator==(const ChoiceExplanation&) const = default;
};

/// Five-option question; options[0] is A, options[4] is E.
struct ChoiceInput {
    std::string question;
    std::array<std::string, 5> options;
    std::optional<ChoiceExplanation> explanation;
    bool operator==(const ChoiceInput&) const = default;
};

/// Premises are stored without numbering or a trailing period; numbering is a rendering concern.
struct LogicInput {
    std::vector<std::string> premises;
    std::string conclusion;
    bool operator==(const LogicInput&) const = default;
};

inline constexpr std::string_view kContentPlaceholder = "{content}";

/// instruction_prompt holds a literal "{content}" placeholder where the text is spliced in.
struct SentenceInput {
    std::string instruction_prompt;
    std::string content;
    std::vector<std::string> label_set;
    bool operator==(const SentenceInput&) const = default;
};

struct TableInput {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string question;
    bool operator==(const TableInput&) const = default;
};

struct GraphInput {
    std::vector<int> nodes;
    std::vector<std::pair<int, int>> edges;
    int start = 0;
    int end = 0;
    bool operator==(const GraphInput&) const = default;
};

enum class Basis { exp, power };

/// coefficient * e^x, or coefficient * x^power with power in 0..4.
struct IntegralTerm {
    int coefficient = 1;
    Basis basis = Basis::exp;
    int power = 0;
    bool operator==(const IntegralTerm&) const = default;
};

struct IntegralInput {
    std::vector<IntegralTerm> terms;
    int eval_point = 4;
    bool operator==(const IntegralInput&) const = default;
};

enum class Rotation { cw, ccw };

struct WalkMove {
    Rotation direction = Rotation::cw;
    int steps = 0;
    bool operator==(const WalkMove&) const = default;
};

inline constexpr int kCirclePositions = 20;

struct WalkInput {
    int start = 0;
    std::vector<WalkMove> moves;
    bool operator==(const WalkInput&) const = default;
};

using TaskInput = std::variant<ChoiceInput, LogicInput, SentenceInput, TableInput, GraphInput,
                               IntegralInput, SceneImage, WalkInput>;

inline TaskId task_of(const TaskInput& in) { return static_cast<TaskId>(in.index()); }

// ---- outputs --------------------------------------------------------------

struct ChoiceAnswer {
    char letter = 'A';
    bool operator==(const ChoiceAnswer&) const = default;
};
struct ProofAnswer {
    std::vector<int> indexes;
    bool operator==(const ProofAnswer&) const = default;
};
struct LabelAnswer {
    std::string text;
    bool operator==(const LabelAnswer&) const = default;
};
struct PathAnswer {
    std::vector<int> nodes;
    bool operator==(const PathAnswer&) const = default;
};
struct IntegerAnswer {
    long long value = 0;
    bool operator==(const IntegerAnswer&) const = default;
};
struct CountAnswer {
    int left = 0;
    int right = 0;
    bool operator==(const CountAnswer&) const = default;
};
struct PositionAnswer {
    int position = 0;
    bool operator==(const PositionAnswer&) const = default;
};

using TaskOutput = std::variant<ChoiceAnswer, ProofAnswer, LabelAnswer, PathAnswer, IntegerAnswer,
                                CountAnswer, PositionAnswer>;

/// Variant index of the TaskOutput alternative a task produces.
std::size_t output_kind(TaskId t);
std::string_view output_kind_name(std::size_t kind);

/// Trim surrounding whitespace, then ASCII case-fold.
std::string normalize_label(std::string_view s);

// ---- oracle metadata ------------------------------------------------------

using OracleMeta = std::map<std::string, std::string>;

long long meta_int(const OracleMeta& meta, const std::string& key);
const std::string& meta_string(const OracleMeta& meta, const std::string& key);

}  // namespace derivkit
