#include "derivkit/dr_core.hpp"

#include <algorithm>
#include <map>

#include "derivkit/errors.hpp"
#include "derivkit/util.hpp"

namespace derivkit {

namespace {

bool identical_outputs(const TaskOutput& y1, const TaskOutput& y2, const OracleMeta&) {
    if (y1.index() != y2.index()) return false;
    if (const auto* a = std::get_if<LabelAnswer>(&y1)) {
        return normalize_label(a->text) == normalize_label(std::get<LabelAnswer>(y2).text);
    }
    return y1 == y2;
}

}  // namespace

RuleRegistry::RuleRegistry() {
    add_relation({std::string(kIdentityRelation), {}, identical_outputs});
}

void RuleRegistry::add_relation(RelationChecker checker) {
    const auto name = checker.name;
    if (!relations_.emplace(name, std::move(checker)).second) {
        throw RegistryError("duplicate relation " + name);
    }
}

void RuleRegistry::add_transform(TransformEntry entry) {
    const auto name = entry.name;
    if (!transforms_.emplace(name, std::move(entry)).second) {
        throw RegistryError("duplicate transform " + name);
    }
}

void RuleRegistry::add_rule(DerivationRule rule) {
    if (index_.contains(rule.rule_id)) throw RegistryError("duplicate rule id " + rule.rule_id);
    if (!relations_.contains(rule.relation_ref)) {
        throw RegistryError("rule " + rule.rule_id + " names unknown relation " + rule.relation_ref);
    }
    const auto t = transforms_.find(rule.transform_ref);
    if (t == transforms_.end()) {
        throw RegistryError("rule " + rule.rule_id + " names unknown transform " + rule.transform_ref);
    }
    if (t->second.task != rule.task) {
        throw RegistryError("rule " + rule.rule_id + " pairs a " + std::string(to_string(rule.task)) +
                            " rule with a " + std::string(to_string(t->second.task)) + " transform");
    }
    if (rule.dr_type == DrType::id && rule.relation_ref != kIdentityRelation) {
        throw RegistryError("ID rule " + rule.rule_id + " must use the identity relation");
    }
    index_.emplace(rule.rule_id, rules_.size());
    rules_.push_back(std::move(rule));
}

const DerivationRule& RuleRegistry::rule(std::string_view rule_id) const {
    const auto it = index_.find(rule_id);
    if (it == index_.end()) throw RegistryError("unknown rule " + std::string(rule_id));
    return rules_[it->second];
}

bool RuleRegistry::contains(std::string_view rule_id) const { return index_.find(rule_id) != index_.end(); }

const RelationChecker& RuleRegistry::relation(std::string_view name) const {
    const auto it = relations_.find(name);
    if (it == relations_.end()) throw RegistryError("unknown relation " + std::string(name));
    return it->second;
}

const TransformEntry& RuleRegistry::transform(std::string_view name) const {
    const auto it = transforms_.find(name);
    if (it == transforms_.end()) throw RegistryError("unknown transform " + std::string(name));
    return it->second;
}

std::vector<std::string> RuleRegistry::rule_ids() const {
    std::vector<std::string> ids;
    ids.reserve(rules_.size());
    for (const auto& r : rules_) ids.push_back(r.rule_id);
    return ids;
}

std::string_view to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::pass: return "pass";
        case VerdictStatus::fail: return "fail";
        case VerdictStatus::unparseable_round1: return "unparseable_round1";
        case VerdictStatus::unparseable_round2: return "unparseable_round2";
    }
    return "?";
}

std::optional<VerdictStatus> parse_verdict_status(std::string_view s) {
    for (auto v : {VerdictStatus::pass, VerdictStatus::fail, VerdictStatus::unparseable_round1,
                   VerdictStatus::unparseable_round2}) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

Verdict check_pair(const RuleRegistry& registry, std::string_view rule_id, const TaskOutput& y1,
                   const TaskOutput& y2, const OracleMeta& meta) {
    const auto& rule = registry.rule(rule_id);
    const auto want = output_kind(rule.task);
    for (const auto* y : {&y1, &y2}) {
        if (y->index() != want) {
            throw ContractViolation("rule " + rule.rule_id + " expects " + std::string(output_kind_name(want)) +
                                    " outputs, got " + std::string(output_kind_name(y->index())));
        }
    }
    const auto& relation = registry.relation(rule.relation_ref);
    for (const auto& key : relation.required_meta) {
        if (!meta.contains(key)) throw ContractViolation("relation " + relation.name + " needs meta '" + key + "'");
    }
    const bool ok = relation.accepts(y1, y2, meta);
    return {rule.rule_id, ok ? VerdictStatus::pass : VerdictStatus::fail};
}

Verdict judge_round_pair(const RuleRegistry& registry, std::string_view rule_id, const std::optional<TaskOutput>& y1,
                         const std::optional<TaskOutput>& y2, const OracleMeta& meta) {
    const auto& rule = registry.rule(rule_id);
    if (!y1) return {rule.rule_id, VerdictStatus::unparseable_round1};
    if (!y2) return {rule.rule_id, VerdictStatus::unparseable_round2};
    return check_pair(registry, rule_id, *y1, *y2, meta);
}

DcsReport compute_dcs(std::span<const Verdict> verdicts) {
    if (verdicts.empty()) throw ContractViolation("DCS is undefined for an empty verdict sequence");
    DcsReport report;
    report.rule_id = verdicts.front().rule_id;
    for (const auto& v : verdicts) {
        if (v.rule_id != report.rule_id) {
            throw ContractViolation("verdicts mix rules " + report.rule_id + " and " + v.rule_id);
        }
        if (v.status == VerdictStatus::pass) ++report.passes;
        if (v.status == VerdictStatus::unparseable_round1 || v.status == VerdictStatus::unparseable_round2) {
            ++report.unparseable;
        }
    }
    report.total = verdicts.size();
    report.gamma = static_cast<double>(report.passes) / static_cast<double>(report.total);
    return report;
}

DcsReport compute_dcs(std::span<const Verdict> verdicts, const DerivationRule& rule) {
    auto report = compute_dcs(verdicts);
    if (report.rule_id != rule.rule_id) {
        throw ContractViolation("verdicts belong to " + report.rule_id + ", not " + rule.rule_id);
    }
    report.task = rule.task;
    report.dr_type = rule.dr_type;
    return report;
}

std::string majority_answer(std::span<const std::string> samples) {
    if (samples.empty()) throw ContractViolation("majority vote over no samples");
    std::map<std::string, std::size_t> tally;  // ordered: first max wins lexicographic ties
    for (const auto& s : samples) ++tally[s];
    auto best = tally.begin();
    for (auto it = tally.begin(); it != tally.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    return best->first;
}

std::string dcs_csv_header() { return "rule_id,task,dr_type,passes,total,gamma"; }

std::string dcs_csv_row(const DcsReport& r) {
    return r.rule_id + "," + std::string(to_string(r.task)) + "," + std::string(to_string(r.dr_type)) + "," +
           std::to_string(r.passes) + "," + std::to_string(r.total) + "," + util::fixed(r.gamma, 6);
}

}  // namespace derivkit
