#include "derivkit/gateway.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "derivkit/answers.hpp"
#include "derivkit/dr_core.hpp"
#include "derivkit/errors.hpp"
#include "derivkit/util.hpp"

namespace derivkit {

using json = nlohmann::json;

std::string_view to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

std::optional<Role> parse_role(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    return std::nullopt;
}

std::string complete_chat(ChatModel& model, std::span<const ChatMessage> history, const ModelConfig& cfg) {
    if (history.empty()) throw ContractViolation("chat history is empty");
    if (history.back().role != Role::user) throw ContractViolation("chat history must end with a user message");
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (history[i].role == Role::system && i != 0) throw ContractViolation("system message after the first turn");
        if (history[i].image && history[i].role != Role::user) throw ContractViolation("image on a non-user message");
    }
    return model.complete(history, cfg);
}

std::string sample_majority(ChatModel& model, std::span<const ChatMessage> history, const ModelConfig& cfg,
                            TaskId task) {
    if (cfg.samples_k < 1) throw ContractViolation("samples_k must be at least 1");
    if (cfg.samples_k == 1) return complete_chat(model, history, cfg);

    std::vector<std::string> texts;
    std::vector<std::string> forms;
    for (int i = 0; i < cfg.samples_k; ++i) {
        texts.push_back(complete_chat(model, history, cfg));
        const auto parsed = parse_answer(task, texts.back());
        if (!parsed) {
            // Sorts after any printable answer, so unparseable samples lose ties.
            forms.push_back("\x7f" + std::string(util::trim(texts.back())));
        } else if (const auto* label = std::get_if<LabelAnswer>(&*parsed)) {
            forms.push_back(normalize_label(label->text));
        } else {
            forms.push_back(render_answer(*parsed));
        }
    }
    const auto winner = majority_answer(forms);
    const auto it = std::find(forms.begin(), forms.end(), winner);
    return texts[static_cast<std::size_t>(it - forms.begin())];
}

// ---- rate limiting ----------------------------------------------------------

RateLimiter::RateLimiter(double per_second, double burst)
    : rate_(per_second), capacity_(std::max(burst, 1.0)), tokens_(std::max(burst, 1.0)),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (rate_ <= 0) return;
    while (true) {
        std::chrono::duration<double> wait{};
        {
            std::lock_guard lock(mu_);
            const auto now = std::chrono::steady_clock::now();
            tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
            last_ = now;
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
        }
        std::this_thread::sleep_for(wait);
    }
}

// ---- remote -----------------------------------------------------------------

std::string build_chat_request(std::span<const ChatMessage> history, const std::string& model_name,
                               const ModelConfig& cfg) {
    json messages = json::array();
    for (const auto& m : history) {
        json msg{{"role", to_string(m.role)}};
        if (m.image) {
            const std::string url = "data:image/x-portable-pixmap;base64," + util::base64_encode(*m.image);
            msg["content"] = json::array({json{{"type", "text"}, {"text", m.text}},
                                          json{{"type", "image_url"}, {"image_url", {{"url", url}}}}});
        } else {
            msg["content"] = m.text;
        }
        messages.push_back(std::move(msg));
    }
    json body{{"model", model_name},
              {"messages", std::move(messages)},
              {"temperature", cfg.temperature},
              {"max_tokens", cfg.max_tokens}};
    return body.dump();
}

std::string parse_chat_response(std::string_view body) {
    const auto doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw ProtocolError("response body is not JSON");
    if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw ProtocolError("response has no choices");
    }
    const auto& choice = doc["choices"][0];
    if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
        throw ProtocolError("first choice has no message");
    }
    const auto& content = choice["message"].value("content", json());
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
        std::string out;
        for (const auto& part : content) {
            if (part.is_object() && part.value("type", "") == "text" && part.contains("text") && part["text"].is_string()) {
                out += part["text"].get<std::string>();
            }
        }
        return out;
    }
    throw ProtocolError("message content is missing");
}

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string base_path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw UsageError("endpoint must start with http:// or https://: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint e;
    e.origin = url.substr(0, path_start);
    e.base_path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
    return e;
}

std::string excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

}  // namespace

RemoteChatModel::RemoteChatModel(std::string endpoint_url, std::string model_name, std::string api_key,
                                 double rate_limit_rps)
    : endpoint_url_(std::move(endpoint_url)), model_name_(std::move(model_name)), api_key_(std::move(api_key)),
      limiter_(rate_limit_rps) {}

std::size_t RemoteChatModel::requests_sent() const {
    std::lock_guard lock(stats_mu_);
    return requests_;
}

std::string RemoteChatModel::complete(std::span<const ChatMessage> history, const ModelConfig& cfg) {
    const auto endpoint = split_endpoint(cfg.endpoint_url.empty() ? endpoint_url_ : cfg.endpoint_url);
    const auto body = build_chat_request(history, model_name_, cfg);
    const auto path = endpoint.base_path + "/chat/completions";

    httplib::Client client(endpoint.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_bearer_token_auth(api_key_);

    const int attempts = std::max(1, cfg.retry.max_attempts);
    std::string last_failure;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) std::this_thread::sleep_for(cfg.retry.backoff_base * (1LL << std::min(attempt - 2, 16)));
        limiter_.acquire();
        {
            std::lock_guard lock(stats_mu_);
            ++requests_;
        }
        const auto res = client.Post(path, body, "application/json");
        if (!res) {
            last_failure = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) return parse_chat_response(res->body);
        if (res->status == 429 || res->status >= 500) {
            last_failure = "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body);
            continue;
        }
        throw ProviderError(res->status, excerpt(res->body));
    }
    throw TransportError("gave up after " + std::to_string(attempts) + " attempts (" + last_failure + ")");
}

// ---- built-ins --------------------------------------------------------------

std::string OracleModel::complete(std::span<const ChatMessage> history, const ModelConfig&) {
    return oracle_reply(history);
}

std::string StubbornModel::complete(std::span<const ChatMessage> history, const ModelConfig&) {
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (it->role == Role::assistant) return it->text;
    }
    return oracle_reply(history);
}

ScriptedModel::ScriptedModel(const std::filesystem::path& fixture) {
    std::ifstream in(fixture);
    if (!in) throw UsageError("cannot open scripted model fixture: " + fixture.string());
    name_ = "builtin:scripted:" + fixture.filename().string();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (util::trim(line).empty()) continue;
        if (line.front() == '{' || line.front() == '"') {
            const auto j = json::parse(line, nullptr, false);
            if (j.is_string()) {
                sequential_.push_back(j.get<std::string>());
                continue;
            }
            if (j.is_object() && j.contains("match") && j.contains("reply") && j["match"].is_string() &&
                j["reply"].is_string()) {
                keyed_.emplace_back(j["match"].get<std::string>(), j["reply"].get<std::string>());
                continue;
            }
            throw UsageError(fixture.string() + ":" + std::to_string(lineno) + ": malformed scripted entry");
        }
        sequential_.push_back(line);
    }
}

ScriptedModel::ScriptedModel(std::vector<std::string> sequential, std::vector<std::pair<std::string, std::string>> keyed)
    : sequential_(std::move(sequential)), keyed_(std::move(keyed)) {}

std::string ScriptedModel::complete(std::span<const ChatMessage> history, const ModelConfig&) {
    const ChatMessage* last_user = nullptr;
    for (const auto& m : history) {
        if (m.role == Role::user) last_user = &m;
    }
    if (last_user) {
        for (const auto& [match, reply] : keyed_) {
            if (last_user->text.find(match) != std::string::npos) return reply;
        }
    }
    std::lock_guard lock(mu_);
    if (cursor_ >= sequential_.size()) throw ContractViolation("scripted model ran out of replies");
    return sequential_[cursor_++];
}

bool is_builtin_model(std::string_view spec) { return spec.starts_with("builtin:"); }

std::unique_ptr<ChatModel> make_model(std::string_view spec, const ModelConfig& cfg,
                                      std::optional<std::string> api_key) {
    if (spec == "builtin:oracle") return std::make_unique<OracleModel>();
    if (spec == "builtin:stubborn") return std::make_unique<StubbornModel>();
    if (spec.starts_with("builtin:scripted:")) {
        return std::make_unique<ScriptedModel>(std::filesystem::path(std::string(spec.substr(17))));
    }
    if (is_builtin_model(spec)) throw UsageError("unknown built-in model: " + std::string(spec));
    if (spec.empty()) throw UsageError("no model given");
    if (!api_key || api_key->empty()) {
        throw UsageError("remote model " + std::string(spec) + " needs an API key in " + std::string(kApiKeyEnv));
    }
    if (cfg.endpoint_url.empty()) throw UsageError("remote model " + std::string(spec) + " needs an endpoint");
    return std::make_unique<RemoteChatModel>(cfg.endpoint_url, std::string(spec), *api_key, cfg.rate_limit_rps);
}

}  // namespace derivkit
