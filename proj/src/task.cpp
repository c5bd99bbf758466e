#include "derivkit/task.hpp"

#include <charconv>

#include "derivkit/errors.hpp"
#include "derivkit/util.hpp"

namespace derivkit {

namespace {
constexpr std::array<std::string_view, 8> kTaskNames{
    "choice", "logic", "sentiment", "table_qa", "graph_path", "math_integral", "image_count", "space_walk"};
}

std::string_view to_string(TaskId t) { return kTaskNames[static_cast<std::size_t>(t)]; }

std::optional<TaskId> parse_task(std::string_view s) {
    for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
        if (kTaskNames[i] == s) return static_cast<TaskId>(i);
    }
    return std::nullopt;
}

std::string_view to_string(DrType t) {
    switch (t) {
        case DrType::id: return "ID";
        case DrType::ge: return "GE";
        case DrType::ts: return "TS";
    }
    return "?";
}

std::optional<DrType> parse_dr_type(std::string_view s) {
    if (s == "ID") return DrType::id;
    if (s == "GE") return DrType::ge;
    if (s == "TS") return DrType::ts;
    return std::nullopt;
}

std::size_t output_kind(TaskId t) {
    switch (t) {
        case TaskId::choice: return 0;
        case TaskId::logic: return 1;
        case TaskId::sentiment:
        case TaskId::table_qa: return 2;
        case TaskId::graph_path: return 3;
        case TaskId::math_integral: return 4;
        case TaskId::image_count: return 5;
        case TaskId::space_walk: return 6;
    }
    return 0;
}

std::string_view output_kind_name(std::size_t kind) {
    constexpr std::array<std::string_view, 7> names{"letter", "proof indexes", "label", "path",
                                                    "integer", "counts", "position"};
    return kind < names.size() ? names[kind] : "unknown";
}

std::string normalize_label(std::string_view s) { return util::to_lower(util::trim(s)); }

long long meta_int(const OracleMeta& meta, const std::string& key) {
    const auto& s = meta_string(meta, key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ContractViolation("oracle meta '" + key + "' is not an integer: " + s);
    }
    return v;
}

const std::string& meta_string(const OracleMeta& meta, const std::string& key) {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ContractViolation("oracle meta lacks '" + key + "'");
    return it->second;
}

}  // namespace derivkit
