#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "derivkit/gateway.hpp"
#include "derivkit/task.hpp"

namespace derivkit {

struct HarnessConfig {
    std::string endpoint = "https://api.openai.com/v1";
    std::string model;
    double temperature = 0.0;
    int max_tokens = 1024;
    int samples = 1;
    std::size_t workers = 4;
    double rate_limit = 5.0;
    int timeout_ms = 60000;
    int max_attempts = 4;
    int backoff_ms = 500;
    std::map<TaskId, std::filesystem::path> corpora;
    std::filesystem::path out;
    std::uint64_t seed = 0;
    std::string judge;

    ModelConfig model_config() const;
};

/// "key = value" per line; '#' starts a comment. Unknown keys and bad values throw UsageError.
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Applies one key. Corpus paths use keys of the form corpus.<task>.
void apply_config_value(HarnessConfig& cfg, const std::string& key, const std::string& value);

/// File values, then DEVAL_ENDPOINT from the environment. Flags are applied by the caller.
HarnessConfig load_config(const std::optional<std::filesystem::path>& file);

}  // namespace derivkit
