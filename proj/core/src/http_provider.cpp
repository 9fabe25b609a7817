#include "vpersona/provider.hpp"

#include "vpersona/digest.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <semaphore>

namespace vpersona {

namespace {

struct Endpoint {
    std::string scheme_host_port;
    std::string path_prefix;
};

Endpoint split_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    const auto path_start = base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    Endpoint e;
    if (path_start == std::string::npos) {
        e.scheme_host_port = base_url;
    } else {
        e.scheme_host_port = base_url.substr(0, path_start);
        e.path_prefix = base_url.substr(path_start);
        while (!e.path_prefix.empty() && e.path_prefix.back() == '/') {
            e.path_prefix.pop_back();
        }
    }
    return e;
}

} // namespace

class HttpProvider::Gate {
  public:
    explicit Gate(std::size_t slots) : semaphore_(static_cast<std::ptrdiff_t>(slots)) {}

    class Slot {
      public:
        explicit Slot(Gate& gate) : gate_(gate) { gate_.semaphore_.acquire(); }
        ~Slot() { gate_.semaphore_.release(); }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

      private:
        Gate& gate_;
    };

  private:
    std::counting_semaphore<4096> semaphore_;
};

HttpProvider::HttpProvider(ProviderConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
    config_.validate();
    gate_ = std::make_unique<Gate>(std::min<std::size_t>(config_.max_concurrent_requests, 4096));
}

HttpProvider::~HttpProvider() = default;

std::vector<std::string> HttpProvider::complete(const CompletionRequest& request) {
    const std::size_t n = request.params().n_samples;
    std::vector<std::string> out;
    out.reserve(n);
    // Servers may return fewer choices than asked; keep asking for the rest so
    // that a successful call always yields exactly n texts.
    for (std::size_t round = 0; out.size() < n; ++round) {
        require(round < 4 * n + 4, ErrorCode::TransportError, "server keeps returning empty choice lists");
        auto batch = request_batch(request, n - out.size());
        for (auto& text : batch) {
            if (out.size() < n) {
                out.push_back(truncate_at_stop(std::move(text), request.params().stop_sequences));
            }
        }
    }
    return out;
}

std::vector<std::string> HttpProvider::request_batch(const CompletionRequest& request, std::size_t n) {
    const auto& params = request.params();
    nlohmann::json body;
    body["model"] = config_.model_id;
    body["temperature"] = params.temperature;
    body["top_p"] = params.top_p;
    body["max_tokens"] = params.max_tokens;
    body["n"] = n;
    if (!params.stop_sequences.empty()) {
        body["stop"] = params.stop_sequences;
    }

    const bool chat = config_.mode == ProviderMode::chat;
    if (chat) {
        auto& messages = body["messages"] = nlohmann::json::array();
        if (request.is_chat()) {
            for (const auto& m : request.messages()) {
                messages.push_back({{"role", m.role}, {"content", m.content}});
            }
        } else {
            messages.push_back({{"role", "user"}, {"content", request.prompt()}});
        }
    } else {
        body["prompt"] = request.flattened_text();
    }

    const Endpoint endpoint = split_url(config_.base_url);
    const std::string path = endpoint.path_prefix + (chat ? "/v1/chat/completions" : "/v1/completions");

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        require(key != nullptr && *key != '\0', ErrorCode::ConfigError,
                "environment variable '" + config_.api_key_env + "' holding the API key is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    const std::string payload = body.dump();

    auto attempt = [&]() -> std::vector<std::string> {
        Gate::Slot slot(*gate_);
        ++attempts_;
        httplib::Client client(endpoint.scheme_host_port);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            throw RetryableError(ErrorCode::TransportError,
                                 "POST " + config_.base_url + path + ": " + httplib::to_string(res.error()));
        }
        if (res->status == 429) {
            throw RetryableError(ErrorCode::RateLimited, "POST " + path + ": HTTP 429 rate limited");
        }
        if (res->status >= 500 || res->status == 408) {
            throw RetryableError(ErrorCode::TransportError, "POST " + path + ": HTTP " + std::to_string(res->status));
        }
        if (res->status != 200) {
            fail(ErrorCode::TransportError,
                 "POST " + path + ": HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
        }
        const auto doc = nlohmann::json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array()) {
            throw RetryableError(ErrorCode::TransportError, "POST " + path + ": malformed response body");
        }
        std::vector<std::pair<std::size_t, std::string>> indexed;
        std::size_t position = 0;
        for (const auto& choice : doc["choices"]) {
            const std::size_t index = choice.value("index", position);
            std::string text;
            if (chat) {
                if (choice.contains("message") && choice["message"].contains("content") &&
                    choice["message"]["content"].is_string()) {
                    text = choice["message"]["content"].get<std::string>();
                }
            } else if (choice.contains("text") && choice["text"].is_string()) {
                text = choice["text"].get<std::string>();
            }
            indexed.emplace_back(index, std::move(text));
            ++position;
        }
        std::stable_sort(indexed.begin(), indexed.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::string> texts;
        texts.reserve(indexed.size());
        for (auto& [index, text] : indexed) {
            texts.push_back(std::move(text));
        }
        return texts;
    };

    return run_with_retry(config_.retry, sha256_u64(payload), attempt, sleeper_);
}

} // namespace vpersona
