#include "vpersona/provider.hpp"

#include "vpersona/digest.hpp"
#include "vpersona/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <thread>

namespace vpersona {

void SamplingParams::validate() const {
    require(temperature >= 0.0 && std::isfinite(temperature), ErrorCode::InvalidArgument,
            "temperature must be >= 0");
    require(top_p > 0.0 && top_p <= 1.0, ErrorCode::InvalidArgument, "top_p must lie in (0, 1]");
    require(max_tokens > 0, ErrorCode::InvalidArgument, "max_tokens must be positive");
    require(n_samples >= 1, ErrorCode::InvalidArgument, "n_samples must be at least 1");
}

CompletionRequest::CompletionRequest(std::variant<std::string, std::vector<ChatMessage>> body,
                                     SamplingParams params, std::string draw_tag)
    : body_(std::move(body)), params_(std::move(params)), draw_tag_(std::move(draw_tag)) {
    params_.validate();
}

CompletionRequest CompletionRequest::from_prompt(std::string prompt, SamplingParams params, std::string draw_tag) {
    return CompletionRequest(std::move(prompt), std::move(params), std::move(draw_tag));
}

CompletionRequest CompletionRequest::from_messages(std::vector<ChatMessage> messages, SamplingParams params,
                                                   std::string draw_tag) {
    require(!messages.empty(), ErrorCode::InvalidArgument, "chat request needs at least one message");
    return CompletionRequest(std::move(messages), std::move(params), std::move(draw_tag));
}

const std::string& CompletionRequest::prompt() const {
    require(!is_chat(), ErrorCode::InvalidArgument, "prompt() on a chat request");
    return std::get<std::string>(body_);
}

const std::vector<ChatMessage>& CompletionRequest::messages() const {
    require(is_chat(), ErrorCode::InvalidArgument, "messages() on a completion request");
    return std::get<std::vector<ChatMessage>>(body_);
}

std::string CompletionRequest::flattened_text() const {
    if (!is_chat()) {
        return prompt();
    }
    std::string text;
    for (const auto& m : messages()) {
        if (!text.empty()) {
            text += "\n\n";
        }
        text += m.content;
    }
    return text;
}

std::string CompletionRequest::cache_key(std::string_view model_id) const {
    nlohmann::json j;
    j["model"] = model_id;
    if (is_chat()) {
        auto& msgs = j["messages"] = nlohmann::json::array();
        for (const auto& m : messages()) {
            msgs.push_back({{"role", m.role}, {"content", m.content}});
        }
    } else {
        j["prompt"] = prompt();
    }
    j["temperature"] = params_.temperature;
    j["top_p"] = params_.top_p;
    j["max_tokens"] = params_.max_tokens;
    j["n"] = params_.n_samples;
    j["stop"] = params_.stop_sequences;
    j["draw"] = draw_tag_;
    return sha256_hex(j.dump());
}

std::string truncate_at_stop(std::string text, std::span<const std::string> stop_sequences) {
    std::size_t cut = text.size();
    for (const auto& stop : stop_sequences) {
        if (stop.empty()) {
            continue;
        }
        const auto pos = text.find(stop);
        if (pos != std::string::npos) {
            cut = std::min(cut, pos);
        }
    }
    text.resize(cut);
    return text;
}

std::string_view to_string(ProviderMode mode) noexcept {
    return mode == ProviderMode::completion ? "completion" : "chat";
}

ProviderMode parse_provider_mode(std::string_view name) {
    if (name == "completion") return ProviderMode::completion;
    if (name == "chat") return ProviderMode::chat;
    fail(ErrorCode::ConfigError, "unknown provider mode '" + std::string(name) + "'");
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, std::size_t failed_attempt,
                                        double jitter_unit) {
    const double base = static_cast<double>(policy.backoff_base.count());
    const double exponent = static_cast<double>(std::min<std::size_t>(failed_attempt, 32) - 1);
    const double raw = std::min(base * std::pow(2.0, exponent), static_cast<double>(policy.backoff_cap.count()));
    const double jittered = raw * (0.5 + 0.5 * std::clamp(jitter_unit, 0.0, 1.0));
    return std::chrono::milliseconds(static_cast<std::int64_t>(jittered));
}

std::vector<std::string> run_with_retry(const RetryPolicy& policy, std::uint64_t jitter_seed,
                                        const std::function<std::vector<std::string>()>& attempt,
                                        const Sleeper& sleeper) {
    require(policy.max_attempts >= 1, ErrorCode::ConfigError, "retry policy needs at least one attempt");
    Rng rng(jitter_seed);
    for (std::size_t k = 1;; ++k) {
        try {
            return attempt();
        } catch (const RetryableError& e) {
            if (k >= policy.max_attempts) {
                throw Error(e.code(), std::string(e.what()) + " (gave up after " + std::to_string(k) + " attempts)");
            }
            const auto delay = backoff_delay(policy, k, uniform_unit(rng));
            if (sleeper) {
                sleeper(delay);
            } else {
                std::this_thread::sleep_for(delay);
            }
        }
    }
}

void ProviderConfig::validate() const {
    require(!base_url.empty(), ErrorCode::ConfigError, "provider base_url is empty");
    require(base_url.rfind("http://", 0) == 0 || base_url.rfind("https://", 0) == 0, ErrorCode::ConfigError,
            "provider base_url must start with http:// or https://");
    require(!model_id.empty(), ErrorCode::ConfigError, "provider model id is empty");
    require(max_concurrent_requests >= 1, ErrorCode::ConfigError, "max_concurrent_requests must be >= 1");
    require(retry.max_attempts >= 1, ErrorCode::ConfigError, "retry max_attempts must be >= 1");
}

} // namespace vpersona
