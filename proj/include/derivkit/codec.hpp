#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "derivkit/gateway.hpp"
#include "derivkit/runner.hpp"
#include "derivkit/task.hpp"

namespace derivkit {

using json = nlohmann::json;

json task_input_to_json(const TaskInput& in);
TaskInput task_input_from_json(TaskId task, const json& j);

json meta_to_json(const OracleMeta& meta);
OracleMeta meta_from_json(const json& j);

json message_to_json(const ChatMessage& m);
ChatMessage message_from_json(const json& j);

json case_to_json(const CasePair& c);
CasePair case_from_json(const json& j);

json record_to_json(const TranscriptRecord& r);
TranscriptRecord record_from_json(const json& j);

/// Corpus record formats (one JSON object per line):
///   choice:    {question, options:{A..E}, answer, explanation:{option, content}}
///   logic:     {premises:[...], conclusion, proof_indexes:[...]}
///   sentiment: {content, label}
///   table_qa:  {header:[...], rows:[[...]], question, answer}
///   graph_path: {nodes, edges, start, end}; math_integral: {terms:[{coef, basis, n?}], eval_point}
TaskInput corpus_record_to_input(TaskId task, const json& record);
Corpus load_corpus(const std::filesystem::path& path, TaskId task);

}  // namespace derivkit
