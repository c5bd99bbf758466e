#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "derivkit/task.hpp"

namespace derivkit {

/// A registered (task, transform, relation, type) bundle.
struct DerivationRule {
    std::string rule_id;
    TaskId task = TaskId::choice;
    DrType dr_type = DrType::id;
    std::string description;
    std::string transform_ref;
    std::string relation_ref;
};

inline constexpr std::string_view kIdentityRelation = "identity";

using RelationFn = std::function<bool(const TaskOutput&, const TaskOutput&, const OracleMeta&)>;

struct RelationChecker {
    std::string name;
    std::vector<std::string> required_meta;
    RelationFn accepts;
};

/// Produces the transformed input. Must be a pure function of (base, seed) and may
/// record ground-truth hints in meta. Throws GenerationError when base violates the
/// transform's precondition.
using TransformFn = std::function<TaskInput(const TaskInput& base, std::uint64_t seed, OracleMeta& meta)>;

struct TransformEntry {
    std::string name;
    TaskId task = TaskId::choice;
    TransformFn apply;
};

/// Owns rules plus the relation and transform tables they refer to by name.
/// Populated once, then read concurrently.
class RuleRegistry {
public:
    RuleRegistry();

    void add_relation(RelationChecker checker);
    void add_transform(TransformEntry entry);
    /// Rejects duplicate ids, dangling refs, and ID-typed rules whose relation is not identity.
    void add_rule(DerivationRule rule);

    const DerivationRule& rule(std::string_view rule_id) const;
    bool contains(std::string_view rule_id) const;
    const RelationChecker& relation(std::string_view name) const;
    const TransformEntry& transform(std::string_view name) const;

    const std::vector<DerivationRule>& rules() const { return rules_; }
    std::vector<std::string> rule_ids() const;

private:
    std::vector<DerivationRule> rules_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::map<std::string, RelationChecker, std::less<>> relations_;
    std::map<std::string, TransformEntry, std::less<>> transforms_;
};

enum class VerdictStatus { pass, fail, unparseable_round1, unparseable_round2 };

std::string_view to_string(VerdictStatus s);
std::optional<VerdictStatus> parse_verdict_status(std::string_view s);

struct Verdict {
    std::string rule_id;
    VerdictStatus status = VerdictStatus::fail;
    bool operator==(const Verdict&) const = default;
};

/// Evaluates the rule's relation on a parsed answer pair. Deterministic.
/// Throws RegistryError for an unknown rule and ContractViolation when either output
/// does not have the rule's task shape or meta lacks a key the relation declares.
Verdict check_pair(const RuleRegistry& registry, std::string_view rule_id, const TaskOutput& y1,
                   const TaskOutput& y2, const OracleMeta& meta);

/// Turns optional parses into a verdict: a missing round-1 parse wins over round 2.
Verdict judge_round_pair(const RuleRegistry& registry, std::string_view rule_id,
                         const std::optional<TaskOutput>& y1, const std::optional<TaskOutput>& y2,
                         const OracleMeta& meta);

struct DcsReport {
    std::string rule_id;
    TaskId task = TaskId::choice;
    DrType dr_type = DrType::id;
    std::size_t passes = 0;
    std::size_t total = 0;
    std::size_t unparseable = 0;
    std::size_t errored = 0;  // excluded from total; reported alongside
    double gamma = 0.0;
    bool operator==(const DcsReport&) const = default;
};

/// gamma = passes / total. Unparseable verdicts stay in the denominator.
/// Throws ContractViolation on an empty sequence or mixed rule ids.
DcsReport compute_dcs(std::span<const Verdict> verdicts);
DcsReport compute_dcs(std::span<const Verdict> verdicts, const DerivationRule& rule);

/// Most frequent sample; ties go to the lexicographically smallest candidate.
std::string majority_answer(std::span<const std::string> samples);

std::string dcs_csv_header();
/// rule_id,task,dr_type,passes,total,gamma with gamma at six decimals.
std::string dcs_csv_row(const DcsReport& report);

}  // namespace derivkit
