#include "derivkit/config.hpp"

#include <cstdlib>

#include "derivkit/errors.hpp"
#include "derivkit/util.hpp"

namespace derivkit {

ModelConfig HarnessConfig::model_config() const {
    ModelConfig cfg;
    cfg.endpoint_url = endpoint;
    cfg.model_name = model;
    cfg.temperature = temperature;
    cfg.max_tokens = max_tokens;
    cfg.samples_k = samples;
    cfg.timeout = std::chrono::milliseconds(timeout_ms);
    cfg.retry.max_attempts = max_attempts;
    cfg.retry.backoff_base = std::chrono::milliseconds(backoff_ms);
    cfg.rate_limit_rps = rate_limit;
    return cfg;
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
    std::map<std::string, std::string> out;
    std::size_t lineno = 0;
    for (const auto& raw : util::split(text, "\n")) {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = util::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key(util::trim(line.substr(0, eq)));
        if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        out[key] = std::string(util::trim(line.substr(eq + 1)));
    }
    return out;
}

namespace {

template <typename T>
T number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        T v;
        if constexpr (std::is_floating_point_v<T>) {
            v = static_cast<T>(std::stod(value, &used));
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!value.empty() && value.front() == '-') throw std::invalid_argument("negative");
            v = static_cast<T>(std::stoull(value, &used));
        } else {
            v = static_cast<T>(std::stoll(value, &used));
        }
        if (used != value.size()) throw std::invalid_argument("trailing text");
        return v;
    } catch (const std::exception&) {
        throw UsageError("config value for " + key + " is not a number: " + value);
    }
}

}  // namespace

void apply_config_value(HarnessConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "endpoint") {
        cfg.endpoint = value;
    } else if (key == "model") {
        cfg.model = value;
    } else if (key == "temperature") {
        cfg.temperature = number<double>(key, value);
        if (cfg.temperature < 0) throw UsageError("temperature must be nonnegative");
    } else if (key == "max_tokens") {
        cfg.max_tokens = number<int>(key, value);
        if (cfg.max_tokens < 1) throw UsageError("max_tokens must be positive");
    } else if (key == "samples") {
        cfg.samples = number<int>(key, value);
        if (cfg.samples < 1) throw UsageError("samples must be at least 1");
    } else if (key == "workers") {
        cfg.workers = number<std::size_t>(key, value);
        if (cfg.workers < 1) throw UsageError("workers must be at least 1");
    } else if (key == "rate_limit") {
        cfg.rate_limit = number<double>(key, value);
    } else if (key == "timeout_ms") {
        cfg.timeout_ms = number<int>(key, value);
    } else if (key == "max_attempts") {
        cfg.max_attempts = number<int>(key, value);
        if (cfg.max_attempts < 1) throw UsageError("max_attempts must be at least 1");
    } else if (key == "backoff_ms") {
        cfg.backoff_ms = number<int>(key, value);
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "seed") {
        cfg.seed = number<std::uint64_t>(key, value);
    } else if (key == "judge") {
        cfg.judge = value;
    } else if (key.starts_with("corpus.")) {
        const auto task = parse_task(key.substr(7));
        if (!task) throw UsageError("unknown task in config key " + key);
        cfg.corpora[*task] = value;
    } else if (key == "api_key" || key == "DEVAL_API_KEY") {
        throw UsageError("API keys are read from the DEVAL_API_KEY environment variable only");
    } else {
        throw UsageError("unknown config key: " + key);
    }
}

HarnessConfig load_config(const std::optional<std::filesystem::path>& file) {
    HarnessConfig cfg;
    if (file) {
        if (!std::filesystem::exists(*file)) throw UsageError("config file not found: " + file->string());
        for (const auto& [k, v] : parse_key_values(util::read_file(file->string()))) apply_config_value(cfg, k, v);
    }
    if (const char* endpoint = std::getenv(std::string(kEndpointEnv).c_str()); endpoint && *endpoint) {
        cfg.endpoint = endpoint;
    }
    return cfg;
}

}  // namespace derivkit
