#include <regex>

#include "derivkit/answers.hpp"
#include "derivkit/catalog.hpp"
#include "derivkit/errors.hpp"
#include "derivkit/gateway.hpp"
#include "derivkit/render.hpp"
#include "derivkit/text_tasks.hpp"
#include "derivkit/util.hpp"

namespace derivkit {

namespace {

[[noreturn]] void unreadable(std::string_view what) {
    throw PromptParseError("oracle cannot read the " + std::string(what) + " prompt");
}

ChoiceInput read_choice(const std::string& text) {
    static const std::regex kLayout(R"(^Question: ([\s\S]*)\nOptions: A\. (.*)$)");
    std::smatch m;
    if (!std::regex_match(text, m, kLayout)) unreadable("choice");
    ChoiceInput in;
    in.question = m[1];
    std::string rest = m[2];
    constexpr std::string_view kMarks[] = {", B. ", ", C. ", ", D. ", ", E. "};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto next = rest.find(kMarks[i], pos);
        if (next == std::string::npos) unreadable("choice");
        in.options[i] = rest.substr(pos, next - pos);
        pos = next + kMarks[i].size();
    }
    in.options[4] = rest.substr(pos);
    return in;
}

std::string strip_period(std::string s) {
    while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
    return s;
}

LogicInput read_logic(const std::string& text) {
    static const std::regex kLayout(R"(^Premises: (.*)\nProve: \((\d+)\) (.*)$)");
    std::smatch m;
    if (!std::regex_match(text, m, kLayout)) unreadable("logic");
    const std::string body = m[1];
    const auto n = std::stoul(m[2]) - 1;
    LogicInput in;
    std::size_t pos = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        const auto mark = "(" + std::to_string(i) + ") ";
        if (body.compare(pos, mark.size(), mark) != 0) unreadable("logic");
        pos += mark.size();
        const auto next = i < n ? body.find(" (" + std::to_string(i + 1) + ") ", pos) : body.size();
        if (next == std::string::npos) unreadable("logic");
        in.premises.push_back(strip_period(body.substr(pos, next - pos)));
        pos = next + 1;
    }
    in.conclusion = strip_period(m[3]);
    return in;
}

std::vector<std::string> cells(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& c : util::split(s, ", ")) out.emplace_back(util::trim(c));
    return out;
}

TableInput read_table(const std::string& text) {
    static const std::regex kLayout(R"(^(.*)\ntable: \{header: \[(.*)\], rows: \[\[(.*)\]\]\}$)");
    std::smatch m;
    if (!std::regex_match(text, m, kLayout)) unreadable("table");
    TableInput t;
    t.question = m[1];
    t.header = cells(m[2].str());
    for (const auto& row : util::split(m[3].str(), "], [")) t.rows.push_back(cells(row));
    return t;
}

GraphInput read_graph(const std::string& text) {
    static const std::regex kLayout(
        R"(^The undirected graph: \{nodes: \[(.*)\], edges: \[(.*)\]\}\nThe start node: (-?\d+) The end node: (-?\d+)$)");
    static const std::regex kEdge(R"(\[(-?\d+), (-?\d+)\])");
    std::smatch m;
    if (!std::regex_match(text, m, kLayout)) unreadable("graph");
    GraphInput g;
    for (const auto& v : cells(m[1].str())) g.nodes.push_back(std::stoi(v));
    const std::string edges = m[2];
    for (auto it = std::sregex_iterator(edges.begin(), edges.end(), kEdge); it != std::sregex_iterator(); ++it) {
        g.edges.emplace_back(std::stoi((*it)[1]), std::stoi((*it)[2]));
    }
    g.start = std::stoi(m[3]);
    g.end = std::stoi(m[4]);
    return g;
}

IntegralInput read_integral(const std::string& system, const std::string& text) {
    static const std::regex kPoint(R"(\[x=(-?\d+)\])");
    static const std::regex kLayout(R"(^The function is: (.*)\.$)");
    static const std::regex kTerm(R"(([+-]?)(\d*)(e\^x|x\^(\d)|x)?)");
    std::smatch m;
    IntegralInput f;
    if (!std::regex_search(system, m, kPoint)) unreadable("integral");
    f.eval_point = std::stoi(m[1]);
    if (!std::regex_match(text, m, kLayout)) unreadable("integral");
    const std::string expr = m[1];
    std::size_t pos = 0;
    while (pos < expr.size()) {
        std::smatch t;
        if (!std::regex_search(expr.begin() + static_cast<std::ptrdiff_t>(pos), expr.end(), t, kTerm,
                               std::regex_constants::match_continuous) ||
            t.length(0) == 0 || (t[2].length() == 0 && !t[3].matched)) {
            unreadable("integral");
        }
        IntegralTerm term;
        const int mag = t[2].length() > 0 ? std::stoi(t[2]) : 1;
        term.coefficient = t[1] == "-" ? -mag : mag;
        if (!t[3].matched) {
            term.basis = Basis::power;
            term.power = 0;
        } else if (t[3] == "e^x") {
            term.basis = Basis::exp;
        } else {
            term.basis = Basis::power;
            term.power = t[4].matched ? std::stoi(t[4]) : 1;
        }
        f.terms.push_back(term);
        pos += static_cast<std::size_t>(t.length(0));
    }
    return f;
}

WalkInput read_walk(const std::string& text) {
    static const std::regex kLayout(R"(^Start position: (\d+)\. Moves: (.*)\.$)");
    static const std::regex kMove(R"((\d+) steps (clockwise|counterclockwise))");
    std::smatch m;
    if (!std::regex_match(text, m, kLayout)) unreadable("walk");
    WalkInput w;
    w.start = std::stoi(m[1]);
    const std::string moves = m[2];
    for (auto it = std::sregex_iterator(moves.begin(), moves.end(), kMove); it != std::sregex_iterator(); ++it) {
        w.moves.push_back({(*it)[2] == "clockwise" ? Rotation::cw : Rotation::ccw, std::stoi((*it)[1])});
    }
    return w;
}

}  // namespace

std::string oracle_reply(std::span<const ChatMessage> history) {
    if (history.empty() || history.front().role != Role::system) throw PromptParseError("no system prompt");
    const auto task = detect_task(history.front().text);
    if (!task) throw PromptParseError("system prompt matches no task template");
    const ChatMessage* user = nullptr;
    for (const auto& m : history) {
        if (m.role == Role::user) user = &m;
    }
    if (!user) throw PromptParseError("no user turn");
    const auto& text = user->text;

    TaskOutput answer;
    try {
        switch (*task) {
            case TaskId::choice: answer = solve(read_choice(text)); break;
            case TaskId::logic: answer = solve(read_logic(text)); break;
            case TaskId::sentiment: {
                const auto label = classify_sentiment(text);
                if (!label) unreadable("sentiment");
                answer = LabelAnswer{*label};
                break;
            }
            case TaskId::table_qa: answer = solve(read_table(text)); break;
            case TaskId::graph_path: answer = solve(read_graph(text)); break;
            case TaskId::math_integral: answer = solve(read_integral(history.front().text, text)); break;
            case TaskId::image_count: {
                if (!user->image) unreadable("image");
                answer = solve(decode_ppm(*user->image));
                break;
            }
            case TaskId::space_walk: answer = solve(read_walk(text)); break;
        }
    } catch (const PromptParseError&) {
        throw;
    } catch (const Error& e) {
        throw PromptParseError(std::string(to_string(*task)) + " prompt is not solvable: " + e.what());
    }
    return std::string(kFinalAnswerMarker) + " " + render_answer(answer);
}

}  // namespace derivkit
