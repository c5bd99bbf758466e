#include "derivkit/catalog.hpp"

#include "derivkit/errors.hpp"
#include "derivkit/structured_tasks.hpp"
#include "derivkit/text_tasks.hpp"

namespace derivkit {

namespace {

template <typename T>
const T& as(const TaskInput& in, std::string_view transform) {
    if (const auto* p = std::get_if<T>(&in)) return *p;
    throw ContractViolation("transform " + std::string(transform) + " received a " +
                            std::string(to_string(task_of(in))) + " input");
}

template <typename T, typename F>
TransformEntry plain(std::string name, TaskId task, F f) {
    auto label = name;
    return TransformEntry{std::move(name), task,
                          [f, label](const TaskInput& base, std::uint64_t, OracleMeta&) -> TaskInput {
                              return f(as<T>(base, label));
                          }};
}

template <typename T, typename F>
TransformEntry with_meta(std::string name, TaskId task, F f) {
    auto label = name;
    return TransformEntry{std::move(name), task,
                          [f, label](const TaskInput& base, std::uint64_t, OracleMeta& meta) -> TaskInput {
                              return f(as<T>(base, label), meta);
                          }};
}

template <typename T, typename F>
TransformEntry seeded(std::string name, TaskId task, F f) {
    auto label = name;
    return TransformEntry{std::move(name), task,
                          [f, label](const TaskInput& base, std::uint64_t seed, OracleMeta& meta) -> TaskInput {
                              Rng rng(seed);
                              return f(as<T>(base, label), rng, meta);
                          }};
}

RuleRegistry build_registry() {
    RuleRegistry reg;

    reg.add_relation({"mirrored_choice", {}, [](const TaskOutput& a, const TaskOutput& b, const OracleMeta&) {
                          return relate_mirrored_choice(std::get<ChoiceAnswer>(a).letter, std::get<ChoiceAnswer>(b).letter);
                      }});
    reg.add_relation({"explained_choice", {"target_option"},
                      [](const TaskOutput& a, const TaskOutput& b, const OracleMeta& m) {
                          return relate_explained_choice(std::get<ChoiceAnswer>(a).letter,
                                                         std::get<ChoiceAnswer>(b).letter, m);
                      }});
    reg.add_relation({"reversed_proof", {"n"}, [](const TaskOutput& a, const TaskOutput& b, const OracleMeta& m) {
                          return relate_reversed_proof(std::get<ProofAnswer>(a).indexes, std::get<ProofAnswer>(b).indexes,
                                                       static_cast<int>(meta_int(m, "n")));
                      }});
    reg.add_relation({"corollary_proof", {"n"}, [](const TaskOutput& a, const TaskOutput& b, const OracleMeta& m) {
                          return relate_corollary_proof(std::get<ProofAnswer>(a).indexes,
                                                        std::get<ProofAnswer>(b).indexes,
                                                        static_cast<int>(meta_int(m, "n")));
                      }});
    reg.add_relation({"swapped_counts", {}, [](const TaskOutput& a, const TaskOutput& b, const OracleMeta&) {
                          const auto& x = std::get<CountAnswer>(a);
                          const auto& y = std::get<CountAnswer>(b);
                          return relate_swapped_counts(x, y);
                      }});
    reg.add_relation({"doubled_counts", {}, [](const TaskOutput& a, const TaskOutput& b, const OracleMeta&) {
                          return relate_doubled_counts(std::get<CountAnswer>(a), std::get<CountAnswer>(b));
                      }});
    reg.add_relation({"reversed_path", {}, [](const TaskOutput& a, const TaskOutput& b, const OracleMeta&) {
                          return relate_reversed_path(std::get<PathAnswer>(a).nodes, std::get<PathAnswer>(b).nodes);
                      }});
    reg.add_relation({"truncated_path", {}, [](const TaskOutput& a, const TaskOutput& b, const OracleMeta&) {
                          return relate_truncated_path(std::get<PathAnswer>(a).nodes, std::get<PathAnswer>(b).nodes);
                      }});
    reg.add_relation({"shifted_integral", {"delta"}, [](const TaskOutput& a, const TaskOutput& b, const OracleMeta& m) {
                          return relate_shifted_integral(std::get<IntegerAnswer>(a).value,
                                                         std::get<IntegerAnswer>(b).value, meta_int(m, "delta"));
                      }});
    reg.add_relation({"opposite_position", {"start"}, [](const TaskOutput& a, const TaskOutput& b, const OracleMeta& m) {
                          return relate_opposite_position(std::get<PositionAnswer>(a).position,
                                                          std::get<PositionAnswer>(b).position,
                                                          static_cast<int>(meta_int(m, "start")));
                      }});

    reg.add_transform(seeded<SentenceInput>("checklist_suffix", TaskId::sentiment,
                                            [](const SentenceInput& in, Rng& rng, OracleMeta&) {
                                                return transform_checklist(in, rng);
                                            }));
    reg.add_transform(plain<SentenceInput>("deepwordbug", TaskId::sentiment,
                                           [](const SentenceInput& in) { return transform_deepwordbug(in); }));
    reg.add_transform(seeded<TableInput>("add_fare_column", TaskId::table_qa,
                                         [](const TableInput& in, Rng& rng, OracleMeta&) {
                                             return transform_add_fare_column(in, rng);
                                         }));
    reg.add_transform(plain<TableInput>("reverse_columns", TaskId::table_qa,
                                        [](const TableInput& in) { return transform_reverse_columns(in); }));
    reg.add_transform(plain<ChoiceInput>("mirror_options", TaskId::choice,
                                         [](const ChoiceInput& in) { return transform_mirror_options(in); }));
    reg.add_transform(with_meta<ChoiceInput>("add_explanation", TaskId::choice,
                                             [](const ChoiceInput& in, OracleMeta& m) {
                                                 return transform_add_explanation(in, m);
                                             }));
    reg.add_transform(plain<SceneImage>("flip_horizontal", TaskId::image_count,
                                        [](const SceneImage& in) { return flip_horizontal(in); }));
    reg.add_transform(plain<SceneImage>("concat_vertical", TaskId::image_count,
                                        [](const SceneImage& in) { return concat_vertical(in); }));
    reg.add_transform(with_meta<LogicInput>("reverse_premises", TaskId::logic,
                                            [](const LogicInput& in, OracleMeta& m) {
                                                return transform_reverse_premises(in, m);
                                            }));
    reg.add_transform(seeded<LogicInput>("add_corollary", TaskId::logic,
                                         [](const LogicInput& in, Rng& rng, OracleMeta& m) {
                                             return transform_add_corollary(in, pick_corollary_conclusion(in, rng), m);
                                         }));
    reg.add_transform(plain<GraphInput>("swap_endpoints", TaskId::graph_path,
                                        [](const GraphInput& in) { return transform_swap_endpoints(in); }));
    reg.add_transform(with_meta<GraphInput>("retract_endpoint", TaskId::graph_path,
                                            [](const GraphInput& in, OracleMeta& m) {
                                                return transform_retract_endpoint(in, m);
                                            }));
    reg.add_transform(seeded<IntegralInput>("add_integral_term", TaskId::math_integral,
                                            [](const IntegralInput& in, Rng& rng, OracleMeta& m) {
                                                return transform_add_term(in, generate_delta_term(rng, in.eval_point), m);
                                            }));
    reg.add_transform(with_meta<WalkInput>("reverse_directions", TaskId::space_walk,
                                           [](const WalkInput& in, OracleMeta& m) {
                                               return transform_reverse_directions(in, m);
                                           }));

    const std::string identity(kIdentityRelation);
    const auto add = [&](std::string_view id, TaskId task, DrType type, std::string desc, std::string transform,
                         std::string relation) {
        reg.add_rule({std::string(id), task, type, std::move(desc), std::move(transform), std::move(relation)});
    };
    add(rules::kChecklist, TaskId::sentiment, DrType::id, "append a random 10-character token to the instruction",
        "checklist_suffix", identity);
    add(rules::kDeepWordBug, TaskId::sentiment, DrType::id, "character edits to the instruction ('a'->'as', drop 't')",
        "deepwordbug", identity);
    add(rules::kColumnAdding, TaskId::table_qa, DrType::id, "insert an irrelevant Fare column", "add_fare_column",
        identity);
    add(rules::kColumnReversing, TaskId::table_qa, DrType::id, "reverse column order", "reverse_columns", identity);
    add(rules::kOptionMirroring, TaskId::choice, DrType::ge, "mirror option order; answer letter mirrors",
        "mirror_options", "mirrored_choice");
    add(rules::kExplanationAdding, TaskId::choice, DrType::ts, "append an explanation supporting one option",
        "add_explanation", "explained_choice");
    add(rules::kHorizontalFlip, TaskId::image_count, DrType::ge, "mirror the scene; left and right counts swap",
        "flip_horizontal", "swapped_counts");
    add(rules::kVerticalConcat, TaskId::image_count, DrType::ge, "stack the scene on itself; counts double",
        "concat_vertical", "doubled_counts");
    add(rules::kPremiseReversing, TaskId::logic, DrType::ge, "reverse premise order; indexes map to n+1-i",
        "reverse_premises", "reversed_proof");
    add(rules::kCorollary, TaskId::logic, DrType::ts, "prepend a rule from the conclusion to a new goal",
        "add_corollary", "corollary_proof");
    add(rules::kEndpointSwap, TaskId::graph_path, DrType::ge, "swap start and end; path reverses",
        "swap_endpoints", "reversed_path");
    add(rules::kEndpointRetract, TaskId::graph_path, DrType::ts, "move the end to its predecessor; path loses a node",
        "retract_endpoint", "truncated_path");
    add(rules::kIntegralTerm, TaskId::math_integral, DrType::ts, "add a term with an integer antiderivative",
        "add_integral_term", "shifted_integral");
    add(rules::kWalkReversal, TaskId::space_walk, DrType::ge, "reverse every move; final position reflects",
        "reverse_directions", "opposite_position");
    return reg;
}

}  // namespace

const RuleRegistry& standard_registry() {
    static const RuleRegistry registry = build_registry();
    return registry;
}

TaskInput generate_input(TaskId task, Rng& rng) {
    switch (task) {
        case TaskId::choice: return generate_choice(rng);
        case TaskId::logic: return generate_logic(rng);
        case TaskId::sentiment: return generate_sentence(rng);
        case TaskId::table_qa: return generate_table(rng);
        case TaskId::graph_path: return generate_tree(rng);
        case TaskId::math_integral: return generate_integral(rng);
        case TaskId::image_count: return generate_scene(rng);
        case TaskId::space_walk: return generate_walk(rng);
    }
    throw ContractViolation("unknown task");
}

TaskOutput solve(const TaskInput& input) {
    struct Visitor {
        TaskOutput operator()(const ChoiceInput& in) const {
            const auto letter = solve_choice(in);
            if (!letter) throw GenerationError("choice question is not in a solvable form");
            return ChoiceAnswer{*letter};
        }
        TaskOutput operator()(const LogicInput& in) const {
            const auto proof = search_proof(in);
            if (!proof) throw GenerationError("conclusion does not follow from the premises");
            return ProofAnswer{proof->proof};
        }
        TaskOutput operator()(const SentenceInput& in) const {
            const auto label = classify_sentiment(in.content);
            if (!label) throw GenerationError("sentence carries no lexicon sentiment");
            return LabelAnswer{*label};
        }
        TaskOutput operator()(const TableInput& in) const {
            const auto answer = answer_table_question(in);
            if (!answer) throw GenerationError("table question is not in a solvable form");
            return LabelAnswer{*answer};
        }
        TaskOutput operator()(const GraphInput& in) const { return PathAnswer{find_path(in)}; }
        TaskOutput operator()(const IntegralInput& in) const { return IntegerAnswer{reference_integral(in)}; }
        TaskOutput operator()(const SceneImage& in) const {
            const auto c = count_glyphs(in);
            return CountAnswer{c.left, c.right};
        }
        TaskOutput operator()(const WalkInput& in) const { return PositionAnswer{simulate_walk(in)}; }
    };
    return std::visit(Visitor{}, input);
}

}  // namespace derivkit
