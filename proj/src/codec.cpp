#include "derivkit/codec.hpp"

#include <fstream>

#include "derivkit/errors.hpp"
#include "derivkit/text_tasks.hpp"
#include "derivkit/util.hpp"

namespace derivkit {

namespace {

std::string cell_text(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    return j.dump();
}

std::vector<std::string> string_list(const json& j) {
    std::vector<std::string> out;
    for (const auto& x : j) out.push_back(cell_text(x));
    return out;
}

std::string_view basis_name(Basis b) { return b == Basis::exp ? "exp" : "power"; }

Basis parse_basis(const std::string& s) {
    if (s == "exp") return Basis::exp;
    if (s == "power" || s == "poly") return Basis::power;
    throw ContractViolation("unknown integrand basis: " + s);
}

json choice_to_json(const ChoiceInput& in) {
    json j{{"question", in.question}, {"options", in.options}};
    j["explanation"] = in.explanation
                           ? json{{"option", std::string(1, in.explanation->target_option)},
                                  {"content", in.explanation->content}}
                           : json(nullptr);
    return j;
}

ChoiceInput choice_from_json(const json& j) {
    ChoiceInput in;
    in.question = j.at("question").get<std::string>();
    const auto& opts = j.at("options");
    constexpr std::string_view kLetters = "ABCDE";
    for (std::size_t i = 0; i < 5; ++i) {
        in.options[i] = opts.is_object() ? cell_text(opts.at(std::string(1, kLetters[i]))) : cell_text(opts.at(i));
    }
    if (j.contains("explanation") && !j["explanation"].is_null()) {
        const auto& e = j["explanation"];
        const auto option = e.at("option").get<std::string>();
        if (option.size() != 1 || kLetters.find(option[0]) == std::string_view::npos) {
            throw ContractViolation("explanation option must be a letter A-E");
        }
        in.explanation = ChoiceExplanation{option[0], e.at("content").get<std::string>()};
    }
    return in;
}

json glyph_to_json(const Glyph& g) {
    return json{{"facing", g.facing == Facing::left ? "left" : "right"},
                {"color", g.color == GlyphColor::blue ? "blue" : "red"},
                {"x", g.x},
                {"y", g.y},
                {"w", g.w},
                {"h", g.h}};
}

Glyph glyph_from_json(const json& j) {
    Glyph g;
    g.facing = j.at("facing").get<std::string>() == "left" ? Facing::left : Facing::right;
    g.color = j.at("color").get<std::string>() == "blue" ? GlyphColor::blue : GlyphColor::red;
    g.x = j.at("x").get<int>();
    g.y = j.at("y").get<int>();
    g.w = j.at("w").get<int>();
    g.h = j.at("h").get<int>();
    return g;
}

}  // namespace

json task_input_to_json(const TaskInput& input) {
    struct Visitor {
        json operator()(const ChoiceInput& in) const { return choice_to_json(in); }
        json operator()(const LogicInput& in) const {
            return json{{"premises", in.premises}, {"conclusion", in.conclusion}};
        }
        json operator()(const SentenceInput& in) const {
            return json{{"instruction_prompt", in.instruction_prompt}, {"content", in.content}, {"label_set", in.label_set}};
        }
        json operator()(const TableInput& in) const {
            return json{{"header", in.header}, {"rows", in.rows}, {"question", in.question}};
        }
        json operator()(const GraphInput& g) const {
            json edges = json::array();
            for (const auto& [a, b] : g.edges) edges.push_back(json::array({a, b}));
            return json{{"nodes", g.nodes}, {"edges", edges}, {"start", g.start}, {"end", g.end}};
        }
        json operator()(const IntegralInput& f) const {
            json terms = json::array();
            for (const auto& t : f.terms) {
                json term{{"coef", t.coefficient}, {"basis", basis_name(t.basis)}};
                if (t.basis == Basis::power) term["n"] = t.power;
                terms.push_back(std::move(term));
            }
            return json{{"terms", terms}, {"eval_point", f.eval_point}};
        }
        json operator()(const SceneImage& img) const {
            json glyphs = json::array();
            for (const auto& g : img.glyphs) glyphs.push_back(glyph_to_json(g));
            return json{{"width", img.width}, {"height", img.height}, {"glyphs", glyphs}};
        }
        json operator()(const WalkInput& w) const {
            json moves = json::array();
            for (const auto& m : w.moves) {
                moves.push_back(json{{"dir", m.direction == Rotation::cw ? "cw" : "ccw"}, {"steps", m.steps}});
            }
            return json{{"start", w.start}, {"moves", moves}};
        }
    };
    return std::visit(Visitor{}, input);
}

TaskInput task_input_from_json(TaskId task, const json& j) {
    try {
        switch (task) {
            case TaskId::choice: return choice_from_json(j);
            case TaskId::logic:
                return LogicInput{string_list(j.at("premises")), j.at("conclusion").get<std::string>()};
            case TaskId::sentiment:
                return SentenceInput{j.at("instruction_prompt").get<std::string>(), j.at("content").get<std::string>(),
                                     string_list(j.at("label_set"))};
            case TaskId::table_qa: {
                TableInput t;
                t.header = string_list(j.at("header"));
                for (const auto& row : j.at("rows")) t.rows.push_back(string_list(row));
                t.question = j.at("question").get<std::string>();
                return t;
            }
            case TaskId::graph_path: {
                GraphInput g;
                g.nodes = j.at("nodes").get<std::vector<int>>();
                for (const auto& e : j.at("edges")) g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
                g.start = j.at("start").get<int>();
                g.end = j.at("end").get<int>();
                return g;
            }
            case TaskId::math_integral: {
                IntegralInput f;
                for (const auto& t : j.at("terms")) {
                    IntegralTerm term;
                    term.coefficient = t.at("coef").get<int>();
                    term.basis = parse_basis(t.at("basis").get<std::string>());
                    term.power = term.basis == Basis::power ? t.value("n", 0) : 0;
                    if (term.basis == Basis::power && (term.power < 0 || term.power > 4)) {
                        throw ContractViolation("power term exponent must be in 0..4");
                    }
                    f.terms.push_back(term);
                }
                f.eval_point = j.value("eval_point", 4);
                return f;
            }
            case TaskId::image_count: {
                std::vector<Glyph> glyphs;
                for (const auto& g : j.at("glyphs")) glyphs.push_back(glyph_from_json(g));
                return rasterize(j.at("width").get<int>(), j.at("height").get<int>(), std::move(glyphs));
            }
            case TaskId::space_walk: {
                WalkInput w;
                w.start = j.at("start").get<int>();
                for (const auto& m : j.at("moves")) {
                    const auto dir = m.at("dir").get<std::string>();
                    if (dir != "cw" && dir != "ccw") throw ContractViolation("walk direction must be cw or ccw");
                    w.moves.push_back({dir == "cw" ? Rotation::cw : Rotation::ccw, m.at("steps").get<int>()});
                }
                return w;
            }
        }
    } catch (const json::exception& e) {
        throw ContractViolation(std::string(to_string(task)) + " input: " + e.what());
    }
    throw ContractViolation("unknown task");
}

json meta_to_json(const OracleMeta& meta) {
    json j = json::object();
    for (const auto& [k, v] : meta) j[k] = v;
    return j;
}

OracleMeta meta_from_json(const json& j) {
    OracleMeta meta;
    for (const auto& [k, v] : j.items()) meta[k] = v.get<std::string>();
    return meta;
}

json message_to_json(const ChatMessage& m) {
    json j{{"role", to_string(m.role)}, {"text", m.text}};
    if (m.image) j["image"] = util::base64_encode(*m.image);
    return j;
}

ChatMessage message_from_json(const json& j) {
    ChatMessage m;
    const auto role = parse_role(j.at("role").get<std::string>());
    if (!role) throw ContractViolation("unknown message role");
    m.role = *role;
    m.text = j.at("text").get<std::string>();
    if (j.contains("image")) m.image = util::base64_decode(j["image"].get<std::string>());
    return m;
}

json case_to_json(const CasePair& c) {
    return json{{"case_id", c.case_id},
                {"rule_id", c.rule_id},
                {"task", to_string(task_of(c.base_input))},
                {"seed", c.seed},
                {"meta", meta_to_json(c.oracle_meta)},
                {"base", task_input_to_json(c.base_input)},
                {"transformed", task_input_to_json(c.transformed_input)}};
}

CasePair case_from_json(const json& j) {
    const auto task = parse_task(j.at("task").get<std::string>());
    if (!task) throw ContractViolation("unknown task in case record");
    CasePair c;
    c.case_id = j.at("case_id").get<std::string>();
    c.rule_id = j.at("rule_id").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.oracle_meta = meta_from_json(j.at("meta"));
    c.base_input = task_input_from_json(*task, j.at("base"));
    c.transformed_input = task_input_from_json(*task, j.at("transformed"));
    return c;
}

namespace {

json output_to_json(const TaskOutput& y) {
    struct Visitor {
        json operator()(const ChoiceAnswer& a) const { return std::string(1, a.letter); }
        json operator()(const ProofAnswer& a) const { return a.indexes; }
        json operator()(const LabelAnswer& a) const { return a.text; }
        json operator()(const PathAnswer& a) const { return a.nodes; }
        json operator()(const IntegerAnswer& a) const { return a.value; }
        json operator()(const CountAnswer& a) const { return json{{"left", a.left}, {"right", a.right}}; }
        json operator()(const PositionAnswer& a) const { return a.position; }
    };
    return std::visit(Visitor{}, y);
}

TaskOutput output_from_json(TaskId task, const json& j) {
    switch (output_kind(task)) {
        case 0: {
            const auto s = j.get<std::string>();
            if (s.size() != 1) throw ContractViolation("choice answer must be one letter");
            return ChoiceAnswer{s[0]};
        }
        case 1: return ProofAnswer{j.get<std::vector<int>>()};
        case 2: return LabelAnswer{j.get<std::string>()};
        case 3: return PathAnswer{j.get<std::vector<int>>()};
        case 4: return IntegerAnswer{j.get<long long>()};
        case 5: return CountAnswer{j.at("left").get<int>(), j.at("right").get<int>()};
        case 6: return PositionAnswer{j.get<int>()};
        default: break;
    }
    throw ContractViolation("unknown output kind");
}

}  // namespace

json record_to_json(const TranscriptRecord& r) {
    json messages = json::array();
    for (const auto& m : r.messages) messages.push_back(message_to_json(m));
    json j{{"case_id", r.case_id},
           {"rule_id", r.rule_id},
           {"task", to_string(r.task)},
           {"strategy", to_string(r.strategy)},
           {"model", r.model_name},
           {"temperature", r.temperature},
           {"max_tokens", r.max_tokens},
           {"samples_k", r.samples_k},
           {"fresh_context", r.fresh_context},
           {"messages", messages},
           {"meta", meta_to_json(r.meta)},
           {"parsed_y1", r.parsed_y1 ? output_to_json(*r.parsed_y1) : json(nullptr)},
           {"parsed_y2", r.parsed_y2 ? output_to_json(*r.parsed_y2) : json(nullptr)},
           {"verdict", r.verdict ? json(to_string(r.verdict->status)) : json(nullptr)},
           {"error", r.error}};
    if (r.wall_ms) j["wall_ms"] = json::array({(*r.wall_ms)[0], (*r.wall_ms)[1]});
    return j;
}

TranscriptRecord record_from_json(const json& j) {
    TranscriptRecord r;
    r.case_id = j.at("case_id").get<std::string>();
    r.rule_id = j.at("rule_id").get<std::string>();
    const auto task = parse_task(j.at("task").get<std::string>());
    const auto strategy = parse_strategy(j.at("strategy").get<std::string>());
    if (!task || !strategy) throw ContractViolation("unknown task or strategy in record");
    r.task = *task;
    r.strategy = *strategy;
    r.model_name = j.at("model").get<std::string>();
    r.temperature = j.at("temperature").get<double>();
    r.max_tokens = j.at("max_tokens").get<int>();
    r.samples_k = j.at("samples_k").get<int>();
    r.fresh_context = j.at("fresh_context").get<bool>();
    for (const auto& m : j.at("messages")) r.messages.push_back(message_from_json(m));
    r.meta = meta_from_json(j.at("meta"));
    if (!j.at("parsed_y1").is_null()) r.parsed_y1 = output_from_json(r.task, j["parsed_y1"]);
    if (!j.at("parsed_y2").is_null()) r.parsed_y2 = output_from_json(r.task, j["parsed_y2"]);
    if (!j.at("verdict").is_null()) {
        const auto status = parse_verdict_status(j["verdict"].get<std::string>());
        if (!status) throw ContractViolation("unknown verdict status");
        r.verdict = Verdict{r.rule_id, *status};
    }
    r.error = j.at("error").get<std::string>();
    if (j.contains("wall_ms")) r.wall_ms = std::array<double, 2>{j["wall_ms"].at(0).get<double>(), j["wall_ms"].at(1).get<double>()};
    return r;
}

TaskInput corpus_record_to_input(TaskId task, const json& record) {
    try {
        switch (task) {
            case TaskId::choice: return choice_from_json(record);
            case TaskId::logic:
                return LogicInput{string_list(record.at("premises")), record.at("conclusion").get<std::string>()};
            case TaskId::sentiment: {
                SentenceInput in;
                in.instruction_prompt = record.value("prompt", std::string(default_sentiment_prompt()));
                in.content = record.at("content").get<std::string>();
                in.label_set = record.contains("label_set") ? string_list(record["label_set"])
                                                            : std::vector<std::string>{"positive", "negative"};
                if (in.instruction_prompt.find(kContentPlaceholder) == std::string::npos) {
                    throw ContractViolation("sentiment prompt lacks the {content} placeholder");
                }
                return in;
            }
            default: return task_input_from_json(task, record);
        }
    } catch (const json::exception& e) {
        throw ContractViolation(std::string(to_string(task)) + " corpus record: " + e.what());
    }
}

Corpus load_corpus(const std::filesystem::path& path, TaskId task) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open corpus " + path.string());
    Corpus corpus{task, {}};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw UsageError(path.string() + ":" + std::to_string(lineno) + ": not a JSON object");
        }
        try {
            corpus.items.push_back(corpus_record_to_input(task, j));
        } catch (const ContractViolation& e) {
            throw UsageError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return corpus;
}

}  // namespace derivkit
