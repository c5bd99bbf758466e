#include "derivkit/text_tasks.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <map>
#include <regex>
#include <set>
#include <tuple>

#include "derivkit/errors.hpp"
#include "derivkit/util.hpp"

namespace derivkit {

namespace {

constexpr std::string_view kLetters = "ABCDE";

int letter_index(char c) {
    const auto pos = kLetters.find(c);
    if (pos == std::string_view::npos) throw ContractViolation(std::string("option letter out of range: ") + c);
    return static_cast<int>(pos);
}

std::optional<long long> to_int(std::string_view s) {
    s = util::trim(s);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

// ---- choice -------------------------------------------------------------------

ChoiceInput transform_mirror_options(const ChoiceInput& in) {
    ChoiceInput out = in;
    for (std::size_t i = 0; i < 5; ++i) out.options[i] = in.options[4 - i];
    return out;
}

bool relate_mirrored_choice(char a1, char a2) {
    letter_index(a1);
    letter_index(a2);
    return static_cast<int>(a1) + static_cast<int>(a2) == 2 * static_cast<int>('C');
}

ChoiceInput transform_add_explanation(const ChoiceInput& in, OracleMeta& meta) {
    if (!in.explanation) throw GenerationError("explanation-adding needs a question with an explanation");
    letter_index(in.explanation->target_option);
    ChoiceInput out = in;
    out.question = in.question + in.explanation->content;
    meta["target_option"] = std::string(1, in.explanation->target_option);
    return out;
}

bool relate_explained_choice(char /*a1*/, char a2, const OracleMeta& meta) {
    const auto& target = meta_string(meta, "target_option");
    if (target.size() != 1) throw ContractViolation("target_option must be one letter");
    return a2 == target.front();
}

namespace {
const std::regex kSumQuestion(R"(Which option equals (-?\d+) \+ (-?\d+)\?)");
const std::regex kCorrection(R"(the second number should be read as (-?\d+))");
}  // namespace

std::optional<char> solve_choice(const ChoiceInput& in) {
    std::smatch m;
    if (!std::regex_search(in.question, m, kSumQuestion)) return std::nullopt;
    const long long a = std::stoll(m[1]);
    long long b = std::stoll(m[2]);
    std::smatch c;
    if (std::regex_search(in.question, c, kCorrection)) b = std::stoll(c[1]);
    const auto want = std::to_string(a + b);
    std::optional<char> found;
    for (std::size_t i = 0; i < 5; ++i) {
        if (util::trim(in.options[i]) == want) {
            if (found) return std::nullopt;
            found = kLetters[i];
        }
    }
    return found;
}

ChoiceInput generate_choice(Rng& rng) {
    const int a = rng.uniform_int(10, 89);
    const int b = rng.uniform_int(13, 89);
    const int answer = a + b;

    std::vector<int> offsets;
    for (int d = -12; d <= 12; ++d) {
        if (d != 0) offsets.push_back(d);
    }
    rng.shuffle(std::span(offsets));
    const std::size_t correct = rng.index(5);

    ChoiceInput in;
    in.question = "Which option equals " + std::to_string(a) + " + " + std::to_string(b) + "?";
    std::size_t next = 0;
    std::array<int, 5> values{};
    for (std::size_t i = 0; i < 5; ++i) {
        values[i] = i == correct ? answer : answer + offsets[next++];
        in.options[i] = std::to_string(values[i]);
    }
    std::size_t target = rng.index(4);
    if (target >= correct) ++target;
    in.explanation = ChoiceExplanation{
        kLetters[target], " Note: the second number should be read as " + std::to_string(values[target] - a) + "."};
    return in;
}

// ---- logic --------------------------------------------------------------------

LogicInput transform_reverse_premises(const LogicInput& in, OracleMeta& meta) {
    LogicInput out = in;
    std::reverse(out.premises.begin(), out.premises.end());
    meta["n"] = std::to_string(in.premises.size());
    return out;
}

bool relate_reversed_proof(const std::vector<int>& y1, const std::vector<int>& y2, int n) {
    if (y1.empty() || y2.empty() || y1.back() != n + 1 || y2.back() != n + 1) return false;
    if (y1.size() != y2.size()) return false;
    const std::size_t m = y1.size() - 1;
    for (std::size_t i = 0; i < m; ++i) {
        if (y2[i] != n + 1 - y1[m - 1 - i]) return false;
    }
    return true;
}

LogicInput transform_add_corollary(const LogicInput& in, const std::string& new_conclusion, OracleMeta& meta) {
    LogicInput out;
    out.premises.reserve(in.premises.size() + 1);
    out.premises.push_back("if " + in.conclusion + " then " + new_conclusion);
    out.premises.insert(out.premises.end(), in.premises.begin(), in.premises.end());
    out.conclusion = new_conclusion;
    meta["n"] = std::to_string(in.premises.size());
    return out;
}

bool relate_corollary_proof(const std::vector<int>& y1, const std::vector<int>& y2, int n) {
    if (y1.empty() || y1.back() != n + 1) return false;
    const std::size_t m = y1.size() - 1;
    if (y2.size() != m + 2) return false;
    for (std::size_t i = 0; i < m; ++i) {
        if (y2[i] != y1[i] + 1) return false;
    }
    return y2[m] == 1 && y2[m + 1] == n + 2;
}

namespace {

using Atom = std::pair<std::string, std::string>;  // (entity, category)

struct Prop {
    std::string entity;
    std::vector<std::string> categories;
};

enum class PremiseKind { fact, rule, implication };

struct Premise {
    PremiseKind kind = PremiseKind::fact;
    Prop fact;             // fact
    std::string from;      // rule
    std::vector<std::string> to;
    Prop condition, consequence;  // implication
};

std::string strip_article(std::string_view s) {
    s = util::trim(s);
    if (s.starts_with("a ")) s.remove_prefix(2);
    else if (s.starts_with("an ")) s.remove_prefix(3);
    return std::string(util::trim(s));
}

// Lowercased singular of a plural category word: "Sterpuses" -> "sterpus".
std::string singular(std::string_view word) {
    auto w = util::to_lower(util::trim(word));
    if (w.size() > 3 && w.ends_with("ses")) w.resize(w.size() - 2);
    else if (w.size() > 1 && w.ends_with('s')) w.pop_back();
    return w;
}

std::optional<Prop> parse_prop(std::string_view text) {
    text = util::trim(text);
    while (!text.empty() && text.back() == '.') text.remove_suffix(1);
    const auto is = text.find(" is ");
    if (is == std::string_view::npos) return std::nullopt;
    Prop p;
    p.entity = std::string(util::trim(text.substr(0, is)));
    if (p.entity.empty() || p.entity.find(' ') != std::string::npos) return std::nullopt;
    for (const auto& part : util::split(text.substr(is + 4), " and ")) {
        auto cat = strip_article(part);
        if (cat.empty()) return std::nullopt;
        p.categories.push_back(std::move(cat));
    }
    return p;
}

std::optional<Premise> parse_premise(std::string_view text) {
    text = util::trim(text);
    while (!text.empty() && text.back() == '.') text.remove_suffix(1);
    Premise p;
    if (text.starts_with("if ") || text.starts_with("If ")) {
        const auto then = text.find(" then ");
        if (then == std::string_view::npos) return std::nullopt;
        auto cond = parse_prop(text.substr(3, then - 3));
        auto cons = parse_prop(text.substr(then + 6));
        if (!cond || !cons) return std::nullopt;
        p.kind = PremiseKind::implication;
        p.condition = std::move(*cond);
        p.consequence = std::move(*cons);
        return p;
    }
    const auto read_targets = [&](std::string_view list, bool plural) {
        for (const auto& part : util::split(list, " and ")) {
            auto cat = plural ? singular(part) : strip_article(part);
            if (cat.empty()) return false;
            p.to.push_back(std::move(cat));
        }
        return true;
    };
    if (text.starts_with("Every ") || text.starts_with("Each ")) {
        const auto body = text.substr(text.find(' ') + 1);
        const auto is = body.find(" is ");
        if (is == std::string_view::npos) return std::nullopt;
        p.kind = PremiseKind::rule;
        p.from = std::string(util::trim(body.substr(0, is)));
        if (p.from.empty() || !read_targets(body.substr(is + 4), false)) return std::nullopt;
        return p;
    }
    // "Wumpuses are tumpuses and zumpuses."
    if (const auto are = text.find(" are "); are != std::string_view::npos) {
        p.kind = PremiseKind::rule;
        p.from = singular(text.substr(0, are));
        if (p.from.empty() || p.from.find(' ') != std::string::npos || !read_targets(text.substr(are + 5), true)) {
            return std::nullopt;
        }
        return p;
    }
    auto fact = parse_prop(text);
    if (!fact) return std::nullopt;
    p.kind = PremiseKind::fact;
    p.fact = std::move(*fact);
    return p;
}

std::vector<Atom> atoms_of(const Prop& p) {
    std::vector<Atom> out;
    for (const auto& c : p.categories) out.emplace_back(p.entity, c);
    return out;
}

using StageMap = std::map<Atom, int>;

// Least inference stage of every atom derivable from the chosen premises. Only implications
// advance the stage, so proofs list facts and rules by index and each implication after its condition.
StageMap derive(const std::vector<Premise>& premises, const std::vector<std::size_t>& chosen) {
    StageMap stage;
    auto relax = [&](const Atom& a, int s) {
        const auto it = stage.find(a);
        if (it == stage.end() || s < it->second) {
            stage[a] = s;
            return true;
        }
        return false;
    };
    for (auto i : chosen) {
        if (premises[i].kind == PremiseKind::fact) {
            for (const auto& a : atoms_of(premises[i].fact)) relax(a, 1);
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto i : chosen) {
            const auto& p = premises[i];
            if (p.kind == PremiseKind::rule) {
                std::vector<std::pair<Atom, int>> produced;
                for (const auto& [atom, s] : stage) {
                    if (atom.second != p.from) continue;
                    for (const auto& to : p.to) produced.push_back({{atom.first, to}, s});
                }
                for (const auto& [a, s] : produced) changed |= relax(a, s);
            } else if (p.kind == PremiseKind::implication) {
                int latest = 0;
                bool ready = true;
                for (const auto& a : atoms_of(p.condition)) {
                    const auto it = stage.find(a);
                    if (it == stage.end()) {
                        ready = false;
                        break;
                    }
                    latest = std::max(latest, it->second);
                }
                if (!ready) continue;
                for (const auto& a : atoms_of(p.consequence)) changed |= relax(a, latest + 1);
            }
        }
    }
    return stage;
}

bool proves(const StageMap& stage, const std::vector<Atom>& goal) {
    return std::all_of(goal.begin(), goal.end(), [&](const Atom& a) { return stage.contains(a); });
}

int premise_stage(const Premise& p, const StageMap& stage) {
    switch (p.kind) {
        case PremiseKind::fact: return 1;
        case PremiseKind::rule: {
            int best = 0;
            for (const auto& [atom, s] : stage) {
                if (atom.second == p.from && (best == 0 || s < best)) best = s;
            }
            return best == 0 ? 1 : best;
        }
        case PremiseKind::implication: {
            int latest = 0;
            for (const auto& a : atoms_of(p.condition)) {
                const auto it = stage.find(a);
                if (it != stage.end()) latest = std::max(latest, it->second);
            }
            return latest + 1;
        }
    }
    return 1;
}

// Visits k-subsets of {0..n-1} in lexicographic order.
template <typename F>
void for_each_combination(std::size_t n, std::size_t k, F&& f) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

std::optional<ProofSearch> search_proof(const LogicInput& in) {
    std::vector<Premise> premises;
    for (const auto& text : in.premises) {
        auto p = parse_premise(text);
        if (!p) return std::nullopt;
        premises.push_back(std::move(*p));
    }
    const auto goal_prop = parse_prop(in.conclusion);
    if (!goal_prop) return std::nullopt;
    const auto goal = atoms_of(*goal_prop);
    const std::size_t n = premises.size();

    for (std::size_t k = 1; k <= n; ++k) {
        std::optional<std::vector<std::size_t>> first;
        std::size_t count = 0;
        for_each_combination(n, k, [&](const std::vector<std::size_t>& subset) {
            if (proves(derive(premises, subset), goal)) {
                if (!first) first = subset;
                ++count;
            }
        });
        if (!first) continue;

        const auto stage = derive(premises, *first);
        std::vector<std::pair<int, int>> ordered;  // (stage, 1-based index)
        for (auto i : *first) ordered.emplace_back(premise_stage(premises[i], stage), static_cast<int>(i) + 1);
        std::sort(ordered.begin(), ordered.end());
        ProofSearch result;
        for (const auto& [s, idx] : ordered) result.proof.push_back(idx);
        result.proof.push_back(static_cast<int>(n) + 1);
        result.minimal_proofs = count;
        return result;
    }
    return std::nullopt;
}

namespace {

constexpr std::array<std::string_view, 9> kEntities{"Rex", "Sally", "Max", "Fae", "Wren",
                                                    "Polly", "Stella", "Sam", "Alex"};
constexpr std::array<std::string_view, 17> kCategories{
    "wumpus", "yumpus", "zumpus", "dumpus", "rompus", "numpus", "tumpus", "vumpus", "impus",
    "jompus", "gorpus", "lorpus", "lempus", "sterpus", "grimpus", "brimpus", "shumpus"};
constexpr std::array<std::string_view, 6> kCorollaryCategories{"visionary", "dreamer", "scholar",
                                                               "wanderer", "painter", "sailor"};

std::string article(std::string_view noun) {
    return (std::string_view("aeiou").find(noun.front()) != std::string_view::npos ? "an " : "a ") +
           std::string(noun);
}

std::string is_a(std::string_view entity, std::string_view cat) {
    return std::string(entity) + " is " + article(cat);
}

}  // namespace

LogicInput generate_logic(Rng& rng) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<std::string> cats(kCategories.begin(), kCategories.end());
        rng.shuffle(std::span(cats));
        std::size_t next_cat = 0;
        auto fresh = [&] { return cats[next_cat++]; };

        std::vector<std::string_view> entities(kEntities.begin(), kEntities.end());
        rng.shuffle(std::span(entities));
        const auto subject = entities[0];

        LogicInput in;
        std::vector<std::string> used;  // subject categories usable by distractor rules
        switch (rng.uniform_int(0, 2)) {
            case 0: {  // chain of universal rules
                const int depth = rng.uniform_int(1, 3);
                auto cur = fresh();
                used.push_back(cur);
                in.premises.push_back(is_a(subject, cur));
                for (int d = 0; d < depth; ++d) {
                    auto nxt = fresh();
                    in.premises.push_back("Every " + cur + " is " + article(nxt));
                    cur = nxt;
                    used.push_back(cur);
                }
                in.conclusion = is_a(subject, cur);
                break;
            }
            case 1: {  // conjunction elimination, optionally followed by one rule
                const auto c0 = fresh();
                const auto c1 = fresh();
                used = {c0, c1};
                in.premises.push_back(is_a(subject, c0) + " and " + article(c1));
                const auto& kept = rng.coin() ? c0 : c1;
                if (rng.coin()) {
                    const auto c2 = fresh();
                    in.premises.push_back("Every " + kept + " is " + article(c2));
                    in.conclusion = is_a(subject, c2);
                } else {
                    in.conclusion = is_a(subject, kept);
                }
                break;
            }
            default: {  // conjunction introduction
                const auto c0 = fresh();
                const auto c1 = fresh();
                used = {c0, c1};
                in.premises.push_back(is_a(subject, c0));
                in.premises.push_back(is_a(subject, c1));
                in.conclusion = is_a(subject, c0) + " and " + article(c1);
                break;
            }
        }

        const int distractors = rng.uniform_int(1, 4);
        for (int d = 0; d < distractors && next_cat + 2 <= cats.size(); ++d) {
            switch (rng.uniform_int(0, 2)) {
                case 0: in.premises.push_back(is_a(entities[1 + rng.index(entities.size() - 1)], fresh())); break;
                case 1: {
                    const auto from = fresh();
                    in.premises.push_back("Every " + from + " is " + article(fresh()));
                    break;
                }
                default: in.premises.push_back("Every " + rng.pick(used) + " is " + article(fresh())); break;
            }
        }
        rng.shuffle(std::span(in.premises));

        const auto search = search_proof(in);
        if (search && search->minimal_proofs == 1) return in;
    }
    throw GenerationError("could not draw a logic problem with a unique minimal proof");
}

std::string pick_corollary_conclusion(const LogicInput& in, Rng& rng) {
    const auto goal = parse_prop(in.conclusion);
    if (!goal) throw GenerationError("conclusion is not of the form '<entity> is a <category>'");
    std::string all = in.conclusion;
    for (const auto& p : in.premises) all += " " + p;
    std::vector<std::string_view> options;
    for (auto c : kCorollaryCategories) {
        if (all.find(c) == std::string::npos) options.push_back(c);
    }
    if (options.empty()) throw GenerationError("no unused category left for a corollary");
    return is_a(goal->entity, rng.pick(options));
}

// ---- sentence classification ----------------------------------------------

std::string_view default_sentiment_prompt() {
    return "As a sentiment classifier, determine whether the following text is \"positive\" or \"negative\". "
           "Please classify:\n Question:{content} \n Answer:";
}

SentenceInput transform_checklist(const SentenceInput& in, Rng& rng) {
    static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string suffix;
    for (int i = 0; i < 10; ++i) suffix.push_back(kAlphabet[rng.index(kAlphabet.size())]);
    SentenceInput out = in;
    out.instruction_prompt += suffix;
    return out;
}

std::string deepwordbug(std::string_view text) {
    return util::replace_all(util::replace_all(text, "a", "as"), "t", "");
}

SentenceInput transform_deepwordbug(const SentenceInput& in) {
    SentenceInput out = in;
    const auto pieces = util::split(in.instruction_prompt, kContentPlaceholder);
    out.instruction_prompt.clear();
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i > 0) out.instruction_prompt += kContentPlaceholder;
        out.instruction_prompt += deepwordbug(pieces[i]);
    }
    return out;
}

bool relate_identical_label(std::string_view y1, std::string_view y2) {
    return normalize_label(y1) == normalize_label(y2);
}

namespace {

constexpr std::array<std::string_view, 10> kPositiveWords{"wonderful", "superb",    "lovely",   "moving",
                                                          "brilliant", "charming",  "heartfelt", "gorgeous",
                                                          "clever",    "joyful"};
constexpr std::array<std::string_view, 10> kNegativeWords{"dull",     "tedious", "awful",   "clumsy",
                                                          "bland",    "boring",  "lifeless", "painful",
                                                          "shallow",  "messy"};

// Maximal runs of letters, digits and apostrophes.
std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'') {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace

std::optional<std::string> classify_sentiment(std::string_view text) {
    int score = 0;
    for (const auto& w : word_tokens(text)) {
        if (std::find(kPositiveWords.begin(), kPositiveWords.end(), w) != kPositiveWords.end()) ++score;
        if (std::find(kNegativeWords.begin(), kNegativeWords.end(), w) != kNegativeWords.end()) --score;
    }
    if (score > 0) return "positive";
    if (score < 0) return "negative";
    return std::nullopt;
}

SentenceInput generate_sentence(Rng& rng) {
    static constexpr std::array<std::string_view, 6> kSubjects{"The film", "This movie", "The story",
                                                               "The soundtrack", "The cast", "The script"};
    static constexpr std::array<std::string_view, 4> kNeutral{"slow", "long", "quiet", "busy"};
    const bool positive = rng.coin();
    const auto& words = positive ? kPositiveWords : kNegativeWords;
    std::vector<std::string_view> pool(words.begin(), words.end());
    rng.shuffle(std::span(pool));
    const auto subject = rng.pick(kSubjects);

    std::string content;
    switch (rng.uniform_int(0, 3)) {
        case 0: content = std::string(subject) + " is " + std::string(pool[0]) + " and " + std::string(pool[1]) + "."; break;
        case 1: content = std::string(subject) + " feels " + std::string(pool[0]) + " from start to finish."; break;
        case 2:
            content = "A " + std::string(pool[0]) + " piece of work, with a " + std::string(pool[1]) + " ending.";
            break;
        default:
            content = std::string(subject) + " was " + std::string(pool[0]) + ", though the pacing was " +
                      std::string(rng.pick(kNeutral)) + ".";
            break;
    }
    return SentenceInput{std::string(default_sentiment_prompt()), content, {"positive", "negative"}};
}

// ---- table QA -------------------------------------------------------------------

TableInput insert_fare_column(const TableInput& in, std::size_t at) {
    if (at > in.header.size()) throw ContractViolation("fare column index past the table width");
    TableInput out = in;
    out.header.insert(out.header.begin() + static_cast<std::ptrdiff_t>(at), "Fare");
    for (auto& row : out.rows) row.insert(row.begin() + static_cast<std::ptrdiff_t>(at), "$100");
    return out;
}

TableInput transform_add_fare_column(const TableInput& in, Rng& rng) {
    return insert_fare_column(in, static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(in.header.size()))));
}

TableInput transform_reverse_columns(const TableInput& in) {
    TableInput out = in;
    std::reverse(out.header.begin(), out.header.end());
    for (auto& row : out.rows) std::reverse(row.begin(), row.end());
    return out;
}

namespace {

std::optional<std::size_t> column(const TableInput& t, std::string_view name) {
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (normalize_label(t.header[i]) == normalize_label(name)) {
            if (found) return std::nullopt;
            found = i;
        }
    }
    return found;
}

std::optional<long long> cell_int(const TableInput& t, std::size_t row, std::size_t col) {
    if (col >= t.rows[row].size()) return std::nullopt;
    return to_int(t.rows[row][col]);
}

// Row whose integer column value is uniquely extreme (largest when want_max).
std::optional<std::size_t> extreme_row(const TableInput& t, std::size_t col, bool want_max) {
    std::optional<std::size_t> best;
    long long best_v = 0;
    bool tie = false;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto v = cell_int(t, r, col);
        if (!v) return std::nullopt;
        if (!best || (want_max ? *v > best_v : *v < best_v)) {
            best = r;
            best_v = *v;
            tie = false;
        } else if (*v == best_v) {
            tie = true;
        }
    }
    if (tie) return std::nullopt;
    return best;
}

std::optional<std::size_t> nation_row(const TableInput& t, std::size_t nation_col, std::string_view name) {
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (nation_col < t.rows[r].size() && t.rows[r][nation_col] == name) return r;
    }
    return std::nullopt;
}

const std::regex kMostQ(R"(^Which nation won the (most|fewest) (gold|silver|bronze) medals\?$)");
const std::regex kGoldNoSilverQ(R"(^Which nation won gold but did not win silver\?$)");
const std::regex kCountQ(R"(^How many (gold|silver|bronze) medals did (.+) win\?$)");
const std::regex kTotalQ(R"(^What is the total number of medals won by (.+)\?$)");

}  // namespace

std::optional<std::string> answer_table_question(const TableInput& t) {
    const auto nation = column(t, "Nation");
    if (!nation) return std::nullopt;
    std::smatch m;
    const std::string q(util::trim(t.question));
    if (std::regex_match(q, m, kMostQ)) {
        const auto col = column(t, m[2].str());
        if (!col) return std::nullopt;
        const auto row = extreme_row(t, *col, m[1] == "most");
        if (!row) return std::nullopt;
        return t.rows[*row][*nation];
    }
    if (std::regex_match(q, m, kGoldNoSilverQ)) {
        const auto gold = column(t, "Gold");
        const auto silver = column(t, "Silver");
        if (!gold || !silver) return std::nullopt;
        std::optional<std::string> found;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto g = cell_int(t, r, *gold);
            const auto s = cell_int(t, r, *silver);
            if (!g || !s) return std::nullopt;
            if (*g > 0 && *s == 0) {
                if (found) return std::nullopt;
                found = t.rows[r][*nation];
            }
        }
        return found;
    }
    if (std::regex_match(q, m, kCountQ)) {
        const auto col = column(t, m[1].str());
        const auto row = nation_row(t, *nation, m[2].str());
        if (!col || !row) return std::nullopt;
        return t.rows[*row][*col];
    }
    if (std::regex_match(q, m, kTotalQ)) {
        const auto col = column(t, "Total");
        const auto row = nation_row(t, *nation, m[1].str());
        if (!col || !row) return std::nullopt;
        return t.rows[*row][*col];
    }
    return std::nullopt;
}

TableInput generate_table(Rng& rng) {
    static constexpr std::array<std::string_view, 12> kNations{"Cuba",   "Canada", "United States", "Mexico",
                                                               "Brazil", "Japan",  "Kenya",         "Norway",
                                                               "Italy",  "Spain",  "Chile",         "India"};
    static constexpr std::array<std::string_view, 3> kMedals{"gold", "silver", "bronze"};
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<std::string_view> nations(kNations.begin(), kNations.end());
        rng.shuffle(std::span(nations));
        const auto count = static_cast<std::size_t>(rng.uniform_int(3, 6));

        struct Entry {
            std::string_view nation;
            int gold, silver, bronze;
        };
        std::vector<Entry> entries;
        for (std::size_t i = 0; i < count; ++i) {
            entries.push_back({nations[i], rng.uniform_int(0, 9), rng.uniform_int(0, 9), rng.uniform_int(0, 9)});
        }
        std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return std::tie(b.gold, b.silver, b.bronze) < std::tie(a.gold, a.silver, a.bronze);
        });

        TableInput t;
        t.header = {"Rank", "Nation", "Gold", "Silver", "Bronze", "Total"};
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            t.rows.push_back({std::to_string(i + 1), std::string(e.nation), std::to_string(e.gold),
                              std::to_string(e.silver), std::to_string(e.bronze),
                              std::to_string(e.gold + e.silver + e.bronze)});
        }
        const auto& who = entries[rng.index(entries.size())].nation;
        switch (rng.uniform_int(0, 4)) {
            case 0: t.question = "Which nation won the most gold medals?"; break;
            case 1: t.question = "Which nation won gold but did not win silver?"; break;
            case 2:
                t.question = "How many " + std::string(rng.pick(kMedals)) + " medals did " + std::string(who) + " win?";
                break;
            case 3: t.question = "What is the total number of medals won by " + std::string(who) + "?"; break;
            default:
                t.question = "Which nation won the fewest " + std::string(rng.pick(kMedals)) + " medals?";
                break;
        }
        if (answer_table_question(t)) return t;
    }
    throw GenerationError("could not draw an answerable medal table");
}

}  // namespace derivkit
