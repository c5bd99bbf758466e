#include "derivkit/render.hpp"

#include <array>

#include "derivkit/errors.hpp"
#include "derivkit/util.hpp"

namespace derivkit {

namespace {

constexpr std::string_view kAnswerContract =
    "End your reply with a single line of the form \"Final answer: <answer>\".";

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += sep;
        out += items[i];
    }
    return out;
}

std::string join_ints(const std::vector<int>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i > 0 ? ", " : "") + std::to_string(items[i]);
    return out;
}

std::string term_text(const IntegralTerm& t) {
    const int mag = t.coefficient < 0 ? -t.coefficient : t.coefficient;
    if (t.basis == Basis::exp) return (mag == 1 ? "" : std::to_string(mag)) + "e^x";
    if (t.power == 0) return std::to_string(mag);
    const std::string var = t.power == 1 ? "x" : "x^" + std::to_string(t.power);
    return (mag == 1 ? "" : std::to_string(mag)) + var;
}

}  // namespace

std::string_view task_intro(TaskId task) {
    switch (task) {
        case TaskId::choice: return "Answer the multiple-choice question by picking one of the options A to E.";
        case TaskId::logic: return "Each problem lists numbered premises and a numbered statement to prove.";
        case TaskId::sentiment: return "Classify the sentiment of the text in the user message.";
        case TaskId::table_qa: return "Answer the question using the table in the user message.";
        case TaskId::graph_path: return "Find the path between the start node and the end node of the undirected graph.";
        case TaskId::math_integral: return "Given the following function, please calculate the integral of the function,";
        case TaskId::image_count: return "Count the vehicles in the image that face left and those that face right.";
        case TaskId::space_walk: return "Positions 0 to 19 are arranged clockwise around a circle.";
    }
    return "";
}

std::optional<TaskId> detect_task(std::string_view system_text) {
    for (auto t : kAllTasks) {
        if (system_text.starts_with(task_intro(t))) return t;
    }
    return std::nullopt;
}

std::string system_template(const TaskInput& base) {
    const auto task = task_of(base);
    std::string body;
    switch (task) {
        case TaskId::choice: body = "Reply with the letter of the correct option."; break;
        case TaskId::logic:
            body =
                "Give the minimal set of premises needed for the proof, ordered as they are used: a premise comes "
                "after every premise it depends on, and premises usable at the same step go in increasing number "
                "order. Finish with the number of the statement to prove. Write numbers in parentheses separated by "
                "commas, e.g. (2), (1), (4).";
            break;
        case TaskId::sentiment: {
            const auto& in = std::get<SentenceInput>(base);
            body = "Reply with exactly one of these labels: " + join(in.label_set, ", ") + ".";
            break;
        }
        case TaskId::table_qa: body = "Reply with the answer exactly as it appears in the table."; break;
        case TaskId::graph_path: body = "Write the path as node numbers joined by \"->\", e.g. 2 -> 6 -> 3."; break;
        case TaskId::math_integral: {
            const auto& f = std::get<IntegralInput>(base);
            // The intro sentence continues here.
            body = "then substitute [x=" + std::to_string(f.eval_point) +
                   "] to the result. Take the integration constant as 0 and round the value down to an integer.";
            return std::string(task_intro(task)) + " " + body + " " + std::string(kAnswerContract);
        }
        case TaskId::image_count: body = "Reply in the form left:<count> right:<count>."; break;
        case TaskId::space_walk:
            body = "Starting from the given position, follow each move in order and reply with the final position.";
            break;
    }
    return std::string(task_intro(task)) + " " + body + " " + std::string(kAnswerContract);
}

std::string render_logic_premises(const LogicInput& in) {
    std::string out;
    for (std::size_t i = 0; i < in.premises.size(); ++i) {
        if (i > 0) out += " ";
        out += "(" + std::to_string(i + 1) + ") " + in.premises[i] + ".";
    }
    return out;
}

std::string render_table(const TableInput& in) {
    std::string out = "table: {header: [" + join(in.header, ", ") + "], rows: [";
    for (std::size_t r = 0; r < in.rows.size(); ++r) {
        out += (r > 0 ? ", [" : "[") + join(in.rows[r], ", ") + "]";
    }
    return out + "]}";
}

std::string render_integrand(const IntegralInput& f) {
    std::string out;
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
        const auto& t = f.terms[i];
        if (t.coefficient < 0) out += "-";
        else if (i > 0) out += "+";
        out += term_text(t);
    }
    return out.empty() ? "0" : out;
}

UserTurn render_user_turn(const TaskInput& input) {
    struct Visitor {
        UserTurn operator()(const ChoiceInput& in) const {
            static constexpr std::array<char, 5> kLetters{'A', 'B', 'C', 'D', 'E'};
            std::string opts;
            for (std::size_t i = 0; i < 5; ++i) {
                opts += (i > 0 ? ", " : "") + std::string(1, kLetters[i]) + ". " + in.options[i];
            }
            return {"Question: " + in.question + "\nOptions: " + opts, std::nullopt};
        }
        UserTurn operator()(const LogicInput& in) const {
            return {"Premises: " + render_logic_premises(in) + "\nProve: (" + std::to_string(in.premises.size() + 1) +
                        ") " + in.conclusion + ".",
                    std::nullopt};
        }
        UserTurn operator()(const SentenceInput& in) const {
            if (in.instruction_prompt.find(kContentPlaceholder) == std::string::npos) {
                throw ContractViolation("instruction prompt has no {content} placeholder");
            }
            return {util::replace_all(in.instruction_prompt, kContentPlaceholder, in.content), std::nullopt};
        }
        UserTurn operator()(const TableInput& in) const { return {in.question + "\n" + render_table(in), std::nullopt}; }
        UserTurn operator()(const GraphInput& g) const {
            std::string edges;
            for (std::size_t i = 0; i < g.edges.size(); ++i) {
                edges += (i > 0 ? ", [" : "[") + std::to_string(g.edges[i].first) + ", " +
                         std::to_string(g.edges[i].second) + "]";
            }
            return {"The undirected graph: {nodes: [" + join_ints(g.nodes) + "], edges: [" + edges +
                        "]}\nThe start node: " + std::to_string(g.start) + " The end node: " + std::to_string(g.end),
                    std::nullopt};
        }
        UserTurn operator()(const IntegralInput& f) const {
            return {"The function is: " + render_integrand(f) + ".", std::nullopt};
        }
        UserTurn operator()(const SceneImage& img) const {
            return {"How many vehicles in this image face left, and how many face right?", encode_ppm(img)};
        }
        UserTurn operator()(const WalkInput& w) const {
            std::string text = "Start position: " + std::to_string(w.start) + ". Moves:";
            for (std::size_t i = 0; i < w.moves.size(); ++i) {
                const auto& m = w.moves[i];
                text += (i > 0 ? ", " : " ") + std::to_string(m.steps) + " steps " +
                        (m.direction == Rotation::cw ? "clockwise" : "counterclockwise");
            }
            return {text + ".", std::nullopt};
        }
    };
    return std::visit(Visitor{}, input);
}

std::string canonical_text(const TaskInput& input) {
    if (const auto* img = std::get_if<SceneImage>(&input)) {
        return render_user_turn(input).text + " [image " + std::to_string(img->width) + "x" +
               std::to_string(img->height) + "]";
    }
    return render_user_turn(input).text;
}

}  // namespace derivkit
