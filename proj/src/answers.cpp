#include "derivkit/answers.hpp"

#include <cctype>
#include <regex>

#include "derivkit/util.hpp"

namespace derivkit {

namespace {

std::string_view last_nonempty_line(std::string_view text) {
    std::string_view best;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto t = util::trim(text.substr(0, nl));
        if (!t.empty()) best = t;
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return best;
}

std::string candidate_of(std::string_view text) {
    const auto marker = util::rfind_icase(text, kFinalAnswerMarker);
    if (marker != std::string_view::npos) {
        auto rest = text.substr(marker + kFinalAnswerMarker.size());
        rest = rest.substr(0, rest.find('\n'));
        return std::string(util::trim(rest));
    }
    auto line = last_nonempty_line(text);
    const auto phrase = util::rfind_icase(line, "answer is");
    if (phrase != std::string_view::npos) line = line.substr(phrase + 9);
    return std::string(util::trim(line));
}

// Drops decoration models like to wrap answers in.
std::string strip_decoration(std::string s) {
    auto is_deco = [](char c) { return c == '*' || c == '"' || c == '\'' || c == '`' || c == ':'; };
    while (!s.empty() && (is_deco(s.front()) || s.front() == ' ')) s.erase(s.begin());
    while (!s.empty() && (is_deco(s.back()) || s.back() == '.' || s.back() == ' ')) s.pop_back();
    return s;
}

std::optional<long long> parse_ll(const std::string& s) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<TaskOutput> parse_choice(const std::string& c) {
    static const std::regex kBare(R"(^[^A-Za-z0-9]*([A-Ea-e])[^A-Za-z0-9]*$)");
    static const std::regex kParen(R"(\(([A-E])\))");
    static const std::regex kStandalone(R"((^|[^A-Za-z0-9])([A-E])(?=$|[^A-Za-z0-9]))");
    std::smatch m;
    if (std::regex_match(c, m, kBare)) return ChoiceAnswer{static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0])))};
    if (std::regex_search(c, m, kParen)) return ChoiceAnswer{m[1].str()[0]};
    std::optional<char> found;
    for (auto it = std::sregex_iterator(c.begin(), c.end(), kStandalone); it != std::sregex_iterator(); ++it) {
        const char letter = (*it)[2].str()[0];
        if (found && *found != letter) return std::nullopt;
        found = letter;
    }
    if (!found) return std::nullopt;
    return ChoiceAnswer{*found};
}

std::optional<TaskOutput> parse_proof(const std::string& c) {
    static const std::regex kIndex(R"(\((\d+)\))");
    static const std::regex kBareList(R"(^\s*\d+(\s*,\s*\d+)*\s*$)");
    static const std::regex kDigits(R"(\d+)");
    ProofAnswer out;
    const std::regex& pattern = std::regex_search(c, kIndex) ? kIndex : kDigits;
    if (&pattern == &kDigits && !std::regex_match(c, kBareList)) return std::nullopt;
    for (auto it = std::sregex_iterator(c.begin(), c.end(), pattern); it != std::sregex_iterator(); ++it) {
        const auto v = parse_ll(&pattern == &kIndex ? (*it)[1].str() : (*it)[0].str());
        if (!v || *v > 100000) return std::nullopt;
        out.indexes.push_back(static_cast<int>(*v));
    }
    if (out.indexes.empty()) return std::nullopt;
    return out;
}

std::optional<TaskOutput> parse_label(const std::string& c) {
    auto s = strip_decoration(c);
    if (s.empty()) return std::nullopt;
    return LabelAnswer{s};
}

std::optional<TaskOutput> parse_path(const std::string& c) {
    auto s = util::replace_all(c, "\xe2\x86\x92", "->");
    s = strip_decoration(s);
    if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    const auto sep = s.find("->") != std::string::npos ? std::string("->") : std::string(",");
    PathAnswer out;
    for (const auto& piece : util::split(s, sep)) {
        const auto v = parse_ll(std::string(util::trim(piece)));
        if (!v) return std::nullopt;
        out.nodes.push_back(static_cast<int>(*v));
    }
    if (out.nodes.empty()) return std::nullopt;
    return out;
}

std::optional<long long> last_integer(const std::string& c) {
    static const std::regex kNumber(R"(-?\d+(\.\d+)?)");
    std::optional<std::smatch> last;
    for (auto it = std::sregex_iterator(c.begin(), c.end(), kNumber); it != std::sregex_iterator(); ++it) last = *it;
    if (!last || (*last)[1].matched) return std::nullopt;
    return parse_ll((*last)[0].str());
}

std::optional<TaskOutput> parse_counts(const std::string& c) {
    static const std::regex kLeft(R"(left[^0-9]*?(\d+))", std::regex::icase);
    static const std::regex kRight(R"(right[^0-9]*?(\d+))", std::regex::icase);
    std::smatch l, r;
    if (!std::regex_search(c, l, kLeft) || !std::regex_search(c, r, kRight)) return std::nullopt;
    const auto lv = parse_ll(l[1].str());
    const auto rv = parse_ll(r[1].str());
    if (!lv || !rv || *lv > 100000 || *rv > 100000) return std::nullopt;
    return CountAnswer{static_cast<int>(*lv), static_cast<int>(*rv)};
}

}  // namespace

std::optional<TaskOutput> parse_answer(TaskId task, std::string_view text) {
    const auto c = candidate_of(text);
    if (c.empty()) return std::nullopt;
    switch (task) {
        case TaskId::choice: return parse_choice(c);
        case TaskId::logic: return parse_proof(c);
        case TaskId::sentiment:
        case TaskId::table_qa: return parse_label(c);
        case TaskId::graph_path: return parse_path(c);
        case TaskId::math_integral: {
            const auto v = last_integer(c);
            if (!v) return std::nullopt;
            return IntegerAnswer{*v};
        }
        case TaskId::image_count: return parse_counts(c);
        case TaskId::space_walk: {
            const auto v = last_integer(c);
            if (!v || *v < 0 || *v >= kCirclePositions) return std::nullopt;
            return PositionAnswer{static_cast<int>(*v)};
        }
    }
    return std::nullopt;
}

std::string render_answer(const TaskOutput& y) {
    struct Visitor {
        std::string operator()(const ChoiceAnswer& a) const { return std::string(1, a.letter); }
        std::string operator()(const ProofAnswer& a) const {
            std::string out;
            for (int i : a.indexes) out += (out.empty() ? "(" : ", (") + std::to_string(i) + ")";
            return out;
        }
        std::string operator()(const LabelAnswer& a) const { return a.text; }
        std::string operator()(const PathAnswer& a) const {
            std::string out;
            for (int v : a.nodes) out += (out.empty() ? "" : " -> ") + std::to_string(v);
            return out;
        }
        std::string operator()(const IntegerAnswer& a) const { return std::to_string(a.value); }
        std::string operator()(const CountAnswer& a) const {
            return "left:" + std::to_string(a.left) + " right:" + std::to_string(a.right);
        }
        std::string operator()(const PositionAnswer& a) const { return std::to_string(a.position); }
    };
    return std::visit(Visitor{}, y);
}

}  // namespace derivkit
