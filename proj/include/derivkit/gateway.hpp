#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "derivkit/task.hpp"

namespace derivkit {

enum class Role { system, user, assistant };

std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view s);

struct ChatMessage {
    Role role = Role::user;
    std::string text;
    std::optional<std::vector<std::uint8_t>> image;  // PPM bytes; user messages only

    bool operator==(const ChatMessage&) const = default;
};

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds backoff_base{500};
};

struct ModelConfig {
    std::string endpoint_url;
    std::string model_name;
    double temperature = 0.0;
    int max_tokens = 1024;
    int samples_k = 1;
    std::chrono::milliseconds timeout{60000};
    RetryPolicy retry;
    double rate_limit_rps = 5.0;
};

/// A model under test (or a judge). Implementations must be safe to call from several
/// threads at once.
class ChatModel {
public:
    virtual ~ChatModel() = default;
    virtual std::string name() const = 0;
    virtual std::string complete(std::span<const ChatMessage> history, const ModelConfig& cfg) = 0;
};

/// Validates history shape (nonempty, ends with user, system only first, images only on
/// user turns) and forwards to the model. Throws ContractViolation on a malformed history.
std::string complete_chat(ChatModel& model, std::span<const ChatMessage> history, const ModelConfig& cfg);

/// Draws cfg.samples_k completions, votes over their parsed-answer normal forms and
/// returns the full text of the first completion carrying the winning answer.
std::string sample_majority(ChatModel& model, std::span<const ChatMessage> history, const ModelConfig& cfg,
                            TaskId task);

/// Token bucket shared by all threads talking to one endpoint.
class RateLimiter {
public:
    explicit RateLimiter(double per_second, double burst = 1.0);
    void acquire();

private:
    std::mutex mu_;
    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
};

/// Client for {endpoint}/chat/completions. 429 and 5xx responses and transport failures
/// are retried with exponential backoff; other non-success statuses fail immediately.
class RemoteChatModel final : public ChatModel {
public:
    RemoteChatModel(std::string endpoint_url, std::string model_name, std::string api_key, double rate_limit_rps);

    std::string name() const override { return model_name_; }
    std::string complete(std::span<const ChatMessage> history, const ModelConfig& cfg) override;

    /// Number of HTTP requests sent so far (retries included).
    std::size_t requests_sent() const;

private:
    std::string endpoint_url_;
    std::string model_name_;
    std::string api_key_;
    RateLimiter limiter_;
    mutable std::mutex stats_mu_;
    std::size_t requests_ = 0;
};

/// Request body in the chat-completions shape; images become data-URL content parts.
std::string build_chat_request(std::span<const ChatMessage> history, const std::string& model_name,
                               const ModelConfig& cfg);
/// choices[0].message.content; throws ProtocolError when absent.
std::string parse_chat_response(std::string_view body);

/// Reads the harness's own prompts and answers with the task solvers.
/// Throws PromptParseError for a prompt it cannot read.
class OracleModel final : public ChatModel {
public:
    std::string name() const override { return "builtin:oracle"; }
    std::string complete(std::span<const ChatMessage> history, const ModelConfig& cfg) override;
};

/// Text the oracle would reply for the given history.
std::string oracle_reply(std::span<const ChatMessage> history);

/// Answers the first round like the oracle and repeats its previous reply afterwards.
class StubbornModel final : public ChatModel {
public:
    std::string name() const override { return "builtin:stubborn"; }
    std::string complete(std::span<const ChatMessage> history, const ModelConfig& cfg) override;
};

/// Replays a fixture. Each line is either a reply (plain text, or a JSON string when
/// it starts with a quote, which allows embedded newlines) served in order, or a JSON
/// object {"match": s, "reply": r} served whenever the last user message contains s.
/// Keyed entries take precedence; running out of sequential replies throws ContractViolation.
class ScriptedModel final : public ChatModel {
public:
    explicit ScriptedModel(const std::filesystem::path& fixture);
    ScriptedModel(std::vector<std::string> sequential, std::vector<std::pair<std::string, std::string>> keyed = {});

    std::string name() const override { return name_; }
    std::string complete(std::span<const ChatMessage> history, const ModelConfig& cfg) override;

private:
    std::string name_ = "builtin:scripted";
    std::vector<std::string> sequential_;
    std::vector<std::pair<std::string, std::string>> keyed_;
    std::mutex mu_;
    std::size_t cursor_ = 0;
};

inline constexpr std::string_view kApiKeyEnv = "DEVAL_API_KEY";
inline constexpr std::string_view kEndpointEnv = "DEVAL_ENDPOINT";

bool is_builtin_model(std::string_view spec);

/// "builtin:oracle", "builtin:stubborn", "builtin:scripted:<path>", or a remote model name
/// served at cfg.endpoint_url. Remote models need a key; throws UsageError otherwise.
std::unique_ptr<ChatModel> make_model(std::string_view spec, const ModelConfig& cfg,
                                      std::optional<std::string> api_key);

}  // namespace derivkit
