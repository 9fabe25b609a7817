#include "support/test_support.hpp"
#include "vpersona/provider.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>

using namespace vpersona;

namespace {

SamplingParams params_n(std::size_t n, std::optional<std::uint64_t> seed = std::nullopt) {
    SamplingParams p;
    p.n_samples = n;
    p.seed = seed;
    return p;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::InvalidArgument;
}

// Replays the weighted sampler without touching the library's helpers:
// mt19937_64 seeded with the request seed, one 53-bit uniform per draw,
// inverse CDF over the labels in key order.
std::vector<std::string> replay_weighted(std::uint64_t seed, const std::vector<std::pair<std::string, double>>& w,
                                         std::size_t n) {
    std::mt19937_64 gen(seed);
    double total = 0.0;
    for (const auto& [label, weight] : w) total += weight;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53 * total;
        double acc = 0.0;
        std::size_t k = 0;
        for (; k + 1 < w.size(); ++k) {
            acc += w[k].second;
            if (u < acc) break;
        }
        out.push_back(w[k].first);
    }
    return out;
}

} // namespace

TEST(Request, PromptAndChatBodies) {
    auto p = CompletionRequest::from_prompt("hello", {});
    EXPECT_FALSE(p.is_chat());
    EXPECT_EQ(p.prompt(), "hello");
    EXPECT_THROW((void)p.messages(), Error);
    auto c = CompletionRequest::from_messages({{"system", "s"}, {"user", "u"}}, {});
    EXPECT_TRUE(c.is_chat());
    EXPECT_EQ(c.flattened_text(), "s\n\nu");
}

TEST(Request, CacheKeyIgnoresSeedButNotParams) {
    const auto a = CompletionRequest::from_prompt("x", params_n(3, 1)).cache_key("m");
    const auto b = CompletionRequest::from_prompt("x", params_n(3, 2)).cache_key("m");
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), 64u);
    EXPECT_NE(a, CompletionRequest::from_prompt("x", params_n(4, 1)).cache_key("m"));
    EXPECT_NE(a, CompletionRequest::from_prompt("x", params_n(3, 1)).cache_key("other"));
    EXPECT_NE(a, CompletionRequest::from_prompt("x", params_n(3, 1), "retry").cache_key("m"));
    EXPECT_NE(a, CompletionRequest::from_messages({{"user", "x"}}, params_n(3, 1)).cache_key("m"));
}

TEST(Request, SamplingParamsValidate) {
    SamplingParams p;
    p.n_samples = 0;
    EXPECT_THROW(p.validate(), Error);
    SamplingParams t;
    t.temperature = -1;
    EXPECT_THROW(t.validate(), Error);
    EXPECT_THROW((void)CompletionRequest::from_prompt("x", p), Error);
}

TEST(Stop, TruncatesAtEarliestStop) {
    const std::vector<std::string> stops{"\n\n", "\n"};
    EXPECT_EQ(truncate_at_stop("(A) 18-29\nmore", stops), "(A) 18-29");
    EXPECT_EQ(truncate_at_stop("none", stops), "none");
}

TEST(Mock, ExactRuleReplaysScriptedText) {
    auto mock = MockProvider::from_json(R"j({"rules": [{"match": {"exact": "P"}, "responses": ["(A)"]}]})j");
    const auto out = mock->complete(CompletionRequest::from_prompt("P", params_n(3)));
    EXPECT_EQ(out, (std::vector<std::string>{"(A)", "(A)", "(A)"}));
    EXPECT_EQ(mock->call_count(), 1u);
}

TEST(Mock, RegexRuleMatchesAnyAgePrompt) {
    auto mock = MockProvider::from_json(R"j({"rules": [{"match": {"regex": ".*Age.*"}, "responses": ["(B)"]}]})j");
    for (const std::string p : {"Question: Age?\nAnswer:", "Tell me your Age", "xx Age"}) {
        EXPECT_EQ(mock->complete(CompletionRequest::from_prompt(p, {})).at(0), "(B)");
    }
}

TEST(Mock, ExactRulesBeatEarlierRegexRules) {
    auto mock = MockProvider::from_json(R"j({"rules": [
        {"match": {"regex": "P"}, "responses": ["regex"]},
        {"match": {"exact": "P"}, "responses": ["exact"]}]})j");
    EXPECT_EQ(mock->complete(CompletionRequest::from_prompt("P", {})).at(0), "exact");
    EXPECT_EQ(mock->complete(CompletionRequest::from_prompt("PP", {})).at(0), "regex");
}

TEST(Mock, AfterLastAndContains) {
    auto mock = MockProvider::from_json(R"j({"rules": [
        {"match": {"regex": "^ Age", "after_last": "Question:", "contains": ["Harold"]}, "responses": ["h"]},
        {"match": {"regex": "^ Age", "after_last": "Question:"}, "responses": ["other"]}]})j");
    EXPECT_EQ(mock->complete(CompletionRequest::from_prompt("Harold. Question: Income\nQuestion: Age", {})).at(0), "h");
    EXPECT_EQ(mock->complete(CompletionRequest::from_prompt("Mary. Question: Age", {})).at(0), "other");
    EXPECT_EQ(code_of([&] { (void)mock->complete(CompletionRequest::from_prompt("Question: Age\nQuestion: Income", {})); }),
              ErrorCode::FixtureMiss);
}

TEST(Mock, ResponsesCursorWraps) {
    auto mock = MockProvider::from_json(R"j({"rules": [{"match": {"regex": ""}, "responses": ["a", "b", "c"]}]})j");
    EXPECT_EQ(mock->complete(CompletionRequest::from_prompt("x", params_n(2))), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(mock->complete(CompletionRequest::from_prompt("x", params_n(2))), (std::vector<std::string>{"c", "a"}));
}

TEST(Mock, NoRuleIsFixtureMiss) {
    auto mock = MockProvider::from_json(R"j({"rules": [{"match": {"exact": "P"}, "responses": ["x"]}]})j");
    EXPECT_EQ(code_of([&] { (void)mock->complete(CompletionRequest::from_prompt("Q", {})); }), ErrorCode::FixtureMiss);
}

TEST(Mock, MalformedFixtures) {
    EXPECT_EQ(code_of([] { (void)MockProvider::from_json("not json"); }), ErrorCode::FixtureParseError);
    EXPECT_EQ(code_of([] { (void)MockProvider::from_json(R"j({"rules": [{"match": {}}]})j"); }),
              ErrorCode::FixtureParseError);
    EXPECT_EQ(code_of([] { (void)MockProvider::from_json(R"j({"rules": [{"match": {"regex": "("}, "responses": ["x"]}]})j"); }),
              ErrorCode::FixtureParseError);
    EXPECT_EQ(code_of([] {
                  (void)MockProvider::from_json(R"j({"rules": [{"match": {"exact": "x"}, "weighted": {"a": 0}}]})j");
              }),
              ErrorCode::FixtureParseError);
}

TEST(Mock, WeightedDrawsMatchIndependentReplay) {
    auto mock = MockProvider::from_json(
        R"j({"rules": [{"match": {"regex": "Age"}, "weighted": {"(A)": 0.75, "(B)": 0.25}}]})j");
    const auto request = CompletionRequest::from_prompt("Age?", params_n(40, 7));
    const auto first = mock->complete(request);
    const auto again = mock->complete(request);
    ASSERT_EQ(first.size(), 40u);
    EXPECT_EQ(first, again);
    EXPECT_EQ(first, replay_weighted(7, {{"(A)", 0.75}, {"(B)", 0.25}}, 40));
}

TEST(Mock, WeightedWithoutSeedIsStillDeterministic) {
    const char* fixture = R"j({"seed": 3, "rules": [{"match": {"regex": ""}, "weighted": {"x": 1, "y": 1, "z": 1}}]})j";
    auto a = MockProvider::from_json(fixture);
    auto b = MockProvider::from_json(fixture);
    const auto r = CompletionRequest::from_prompt("p", params_n(25));
    EXPECT_EQ(a->complete(r), b->complete(r));
}

TEST(Mock, PropertyAlwaysReturnsNSamples) {
    auto mock = MockProvider::from_json(R"j({"rules": [
        {"match": {"regex": "w"}, "weighted": {"a": 1, "b": 2}},
        {"match": {"regex": ""}, "responses": ["a", "b"]}]})j");
    for (std::size_t n = 1; n <= 64; ++n) {
        EXPECT_EQ(mock->complete(CompletionRequest::from_prompt("w", params_n(n, n))).size(), n);
        EXPECT_EQ(mock->complete(CompletionRequest::from_prompt("v", params_n(n))).size(), n);
    }
}

TEST(Mock, PropertyDeterministicAcrossInstances) {
    // Any sequence of calls on a fresh instance of the same fixture replays identically.
    const auto fixture = vpersona::testing::data_dir() / "mock_survey.json";
    auto a = MockProvider::from_fixture(fixture);
    auto b = MockProvider::from_fixture(fixture);
    std::mt19937_64 gen(5);
    for (int k = 0; k < 50; ++k) {
        const std::string prompt = "Question: How important is it to you? " + std::to_string(gen() % 7) + "\nAnswer:";
        const auto seed = gen();
        CompletionRequest r = CompletionRequest::from_prompt(prompt, params_n(1 + k % 3, seed));
        std::vector<std::string> ra, rb;
        try {
            ra = a->complete(r);
        } catch (const Error&) {
            ra = {"<miss>"};
        }
        try {
            rb = b->complete(r);
        } catch (const Error&) {
            rb = {"<miss>"};
        }
        EXPECT_EQ(ra, rb);
    }
}

namespace {

class CountingProvider final : public Provider {
  public:
    std::vector<std::string> complete(const CompletionRequest& request) override {
        ++calls;
        std::vector<std::string> out;
        for (std::size_t i = 0; i < request.params().n_samples; ++i) {
            out.push_back("r" + std::to_string(calls) + "." + std::to_string(i));
        }
        return out;
    }
    std::string model_id() const override { return "counting"; }
    int calls = 0;
};

} // namespace

TEST(Cache, PutGetAndPersistence) {
    const auto dir = vpersona::testing::scratch_dir("cache_persist");
    const std::string key(64, 'a');
    {
        ResponseCache cache(dir);
        EXPECT_FALSE(cache.get(key));
        cache.put(key, {"x", "y\nz"});
        EXPECT_EQ(cache.get(key), (std::vector<std::string>{"x", "y\nz"}));
    }
    ResponseCache reopened(dir);
    EXPECT_EQ(reopened.get(key), (std::vector<std::string>{"x", "y\nz"}));
    EXPECT_TRUE(std::filesystem::exists(dir / "aa" / (key + ".json")));
}

TEST(Cache, EnvironmentOverridesDirectory) {
    ::setenv("VPERSONA_CACHE_DIR", "/tmp/override-cache", 1);
    EXPECT_EQ(ResponseCache::resolve_directory("configured"), std::filesystem::path("/tmp/override-cache"));
    ::unsetenv("VPERSONA_CACHE_DIR");
    EXPECT_EQ(ResponseCache::resolve_directory("configured"), std::filesystem::path("configured"));
}

TEST(Cache, CachingProviderIsCoherent) {
    const auto dir = vpersona::testing::scratch_dir("cache_coherent");
    auto inner = std::make_shared<CountingProvider>();
    CachingProvider cached(inner, std::make_shared<ResponseCache>(dir));
    const auto r1 = CompletionRequest::from_prompt("p", params_n(2, 1));
    const auto r2 = CompletionRequest::from_prompt("p", params_n(2, 99));
    const auto first = cached.complete(r1);
    EXPECT_EQ(cached.complete(r2), first);
    EXPECT_EQ(inner->calls, 1);
    EXPECT_EQ(cached.hits(), 1u);
    EXPECT_EQ(cached.misses(), 1u);
    (void)cached.complete(CompletionRequest::from_prompt("p", params_n(2), "retry"));
    EXPECT_EQ(inner->calls, 2);

    // A second process reading the same directory sees the same answers.
    auto fresh = std::make_shared<CountingProvider>();
    CachingProvider again(fresh, std::make_shared<ResponseCache>(dir));
    EXPECT_EQ(again.complete(r1), first);
    EXPECT_EQ(fresh->calls, 0);
}

TEST(Retry, BackoffGrowsAndCaps) {
    RetryPolicy p{5, std::chrono::milliseconds(100), std::chrono::milliseconds(350)};
    EXPECT_EQ(backoff_delay(p, 1, 1.0).count(), 100);
    EXPECT_EQ(backoff_delay(p, 2, 1.0).count(), 200);
    EXPECT_EQ(backoff_delay(p, 3, 1.0).count(), 350);
    EXPECT_EQ(backoff_delay(p, 9, 1.0).count(), 350);
    EXPECT_EQ(backoff_delay(p, 2, 0.5).count(), 150);
    EXPECT_EQ(backoff_delay(p, 2, 0.0).count(), 100);
}

TEST(Retry, RetriesRetryableThenSucceeds) {
    RetryPolicy p{3, std::chrono::milliseconds(10), std::chrono::milliseconds(1000)};
    int calls = 0;
    std::vector<std::chrono::milliseconds> sleeps;
    auto out = run_with_retry(
        p, 1,
        [&]() -> std::vector<std::string> {
            if (++calls < 3) throw RetryableError(ErrorCode::RateLimited, "429");
            return {"ok"};
        },
        [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    EXPECT_EQ(out, (std::vector<std::string>{"ok"}));
    EXPECT_EQ(calls, 3);
    ASSERT_EQ(sleeps.size(), 2u);
    EXPECT_GE(sleeps[0].count(), 5);
    EXPECT_LE(sleeps[0].count(), 10);
    EXPECT_GE(sleeps[1].count(), 10);
    EXPECT_LE(sleeps[1].count(), 20);
}

TEST(Retry, GivesUpAfterCapWithLastCode) {
    RetryPolicy p{3, std::chrono::milliseconds(1), std::chrono::milliseconds(1)};
    int calls = 0;
    EXPECT_EQ(code_of([&] {
                  (void)run_with_retry(
                      p, 1,
                      [&]() -> std::vector<std::string> {
                          ++calls;
                          throw RetryableError(ErrorCode::TransportError, "down");
                      },
                      [](auto) {});
              }),
              ErrorCode::TransportError);
    EXPECT_EQ(calls, 3);
}

TEST(Retry, NonRetryableEscapesImmediately) {
    RetryPolicy p;
    int calls = 0;
    EXPECT_EQ(code_of([&] {
                  (void)run_with_retry(
                      p, 1,
                      [&]() -> std::vector<std::string> {
                          ++calls;
                          throw Error(ErrorCode::ConfigError, "bad key");
                      },
                      [](auto) {});
              }),
              ErrorCode::ConfigError);
    EXPECT_EQ(calls, 1);
}
