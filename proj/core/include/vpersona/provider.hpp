#pragma once

#include "vpersona/error.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace vpersona {

struct SamplingParams {
    double temperature = 1.0;
    double top_p = 1.0;
    int max_tokens = 32;
    std::size_t n_samples = 1;
    std::vector<std::string> stop_sequences;
    /// Consumed by the mock backend only; never part of the cache key.
    std::optional<std::uint64_t> seed;

    void validate() const;
};

struct ChatMessage {
    std::string role;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// A raw-completion prompt or a chat transcript, plus sampling parameters.
class CompletionRequest {
  public:
    /// `draw_tag` distinguishes deliberate re-draws of an otherwise identical
    /// request (e.g. a retry after an unparseable answer) so they do not
    /// collapse onto one cache entry.
    [[nodiscard]] static CompletionRequest from_prompt(std::string prompt, SamplingParams params,
                                                       std::string draw_tag = {});
    [[nodiscard]] static CompletionRequest from_messages(std::vector<ChatMessage> messages, SamplingParams params,
                                                         std::string draw_tag = {});

    [[nodiscard]] bool is_chat() const noexcept { return std::holds_alternative<std::vector<ChatMessage>>(body_); }
    [[nodiscard]] const std::string& prompt() const;
    [[nodiscard]] const std::vector<ChatMessage>& messages() const;
    [[nodiscard]] const SamplingParams& params() const noexcept { return params_; }
    [[nodiscard]] const std::string& draw_tag() const noexcept { return draw_tag_; }

    /// The prompt, or every message content joined by blank lines.
    [[nodiscard]] std::string flattened_text() const;

    /// Hex SHA-256 over model id, body, draw tag and params minus the seed.
    [[nodiscard]] std::string cache_key(std::string_view model_id) const;

  private:
    CompletionRequest(std::variant<std::string, std::vector<ChatMessage>> body, SamplingParams params,
                      std::string draw_tag);

    std::variant<std::string, std::vector<ChatMessage>> body_;
    SamplingParams params_;
    std::string draw_tag_;
};

/// Every backend returns exactly `params.n_samples` texts, each cut at the
/// first stop sequence, or throws.
class Provider {
  public:
    virtual ~Provider() = default;

    [[nodiscard]] virtual std::vector<std::string> complete(const CompletionRequest& request) = 0;
    [[nodiscard]] virtual std::string model_id() const = 0;
};

[[nodiscard]] std::string truncate_at_stop(std::string text, std::span<const std::string> stop_sequences);

enum class ProviderMode { completion, chat };

[[nodiscard]] std::string_view to_string(ProviderMode mode) noexcept;
[[nodiscard]] ProviderMode parse_provider_mode(std::string_view name);

struct RetryPolicy {
    /// Total attempts including the first.
    std::size_t max_attempts = 3;
    std::chrono::milliseconds backoff_base{500};
    std::chrono::milliseconds backoff_cap{30000};
};

/// Thrown by an attempt that may succeed when repeated (network failure,
/// 5xx, 429).
class RetryableError : public Error {
  public:
    using Error::Error;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Runs `attempt` until it succeeds, a non-retryable error escapes, or the
/// policy's attempt cap is hit. Delays grow as base * 2^(k-1), capped, with
/// multiplicative jitter in [0.5, 1) drawn from `jitter_seed`.
std::vector<std::string> run_with_retry(const RetryPolicy& policy, std::uint64_t jitter_seed,
                                        const std::function<std::vector<std::string>()>& attempt,
                                        const Sleeper& sleeper);

[[nodiscard]] std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, std::size_t failed_attempt,
                                                      double jitter_unit);

struct ProviderConfig {
    /// scheme://host[:port][/prefix]; endpoints are appended as /v1/...
    std::string base_url;
    /// Name of the environment variable holding the bearer token. Empty
    /// disables authentication.
    std::string api_key_env;
    std::string model_id;
    ProviderMode mode = ProviderMode::completion;
    std::size_t max_concurrent_requests = 4;
    RetryPolicy retry;
    std::chrono::milliseconds timeout{120000};

    void validate() const;
};

/// OpenAI-compatible HTTP backend.
class HttpProvider final : public Provider {
  public:
    explicit HttpProvider(ProviderConfig config, Sleeper sleeper = {});
    ~HttpProvider() override;

    [[nodiscard]] std::vector<std::string> complete(const CompletionRequest& request) override;
    [[nodiscard]] std::string model_id() const override { return config_.model_id; }

    /// HTTP attempts issued so far, including failed ones.
    [[nodiscard]] std::size_t attempts_made() const noexcept { return attempts_.load(); }

  private:
    class Gate;

    std::vector<std::string> request_batch(const CompletionRequest& request, std::size_t n);

    ProviderConfig config_;
    Sleeper sleeper_;
    std::unique_ptr<Gate> gate_;
    std::atomic<std::size_t> attempts_{0};
};

/// Scripted backend driven by a JSON fixture:
///
///   {"model": "mock", "seed": 7, "rules": [
///     {"match": {"exact": "..."}, "responses": ["..."]},
///     {"match": {"regex": "Age", "after_last": "Question:"}, "weighted": {"(A)": 0.75, "(B)": 0.25}},
///     {"match": {"contains": ["farm", "pesticides"]}, "responses": ["Very important"]}]}
///
/// Exact rules are consulted first, then the others in file order. A regex is
/// searched in the flattened request text, or only in the text after the last
/// occurrence of `after_last` when given; every `contains` string must occur
/// somewhere in the full text. `responses` are served in order with
/// a per-rule cursor that wraps around; `weighted` draws each sample from a
/// categorical sampler seeded by the request seed (or by the fixture seed and
/// the request text when the request carries none).
class MockProvider final : public Provider {
  public:
    [[nodiscard]] static std::unique_ptr<MockProvider> from_fixture(const std::filesystem::path& path);
    [[nodiscard]] static std::unique_ptr<MockProvider> from_json(std::string_view json_text);

    ~MockProvider() override;

    [[nodiscard]] std::vector<std::string> complete(const CompletionRequest& request) override;
    [[nodiscard]] std::string model_id() const override;

    [[nodiscard]] std::vector<CompletionRequest> history() const;
    [[nodiscard]] std::size_t call_count() const;

  private:
    struct Rule;
    MockProvider();

    std::string model_id_ = "mock";
    std::uint64_t seed_ = 0;
    std::vector<std::unique_ptr<Rule>> rules_;
    mutable std::mutex mutex_;
    std::vector<CompletionRequest> history_;
};

/// Content-addressed on-disk response store. One JSON array per key under
/// <dir>/<key[0:2]>/<key>.json; writes go through a temp file and rename.
class ResponseCache {
  public:
    explicit ResponseCache(std::filesystem::path directory);

    /// `configured`, overridden by $VPERSONA_CACHE_DIR when that is set.
    [[nodiscard]] static std::filesystem::path resolve_directory(const std::filesystem::path& configured);

    [[nodiscard]] std::optional<std::vector<std::string>> get(const std::string& key);
    void put(const std::string& key, const std::vector<std::string>& responses);
    [[nodiscard]] const std::filesystem::path& directory() const noexcept { return directory_; }

  private:
    [[nodiscard]] std::filesystem::path path_for(const std::string& key) const;

    std::filesystem::path directory_;
    std::mutex mutex_;
    std::unordered_map<std::string, std::vector<std::string>> memory_;
};

/// Decorator that answers repeated requests from a ResponseCache.
class CachingProvider final : public Provider {
  public:
    CachingProvider(std::shared_ptr<Provider> inner, std::shared_ptr<ResponseCache> cache);

    [[nodiscard]] std::vector<std::string> complete(const CompletionRequest& request) override;
    [[nodiscard]] std::string model_id() const override { return inner_->model_id(); }

    [[nodiscard]] std::size_t hits() const noexcept { return hits_.load(); }
    [[nodiscard]] std::size_t misses() const noexcept { return misses_.load(); }

  private:
    std::shared_ptr<Provider> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

} // namespace vpersona
