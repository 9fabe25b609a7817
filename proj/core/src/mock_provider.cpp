#include "vpersona/provider.hpp"

#include "vpersona/digest.hpp"
#include "vpersona/random.hpp"

#include <json.hpp>

#include <fstream>
#include <regex>
#include <sstream>

namespace vpersona {

struct MockProvider::Rule {
    enum class Kind { exact, regex };

    Kind kind = Kind::exact;
    std::string pattern;
    std::optional<std::string> after_last;
    std::optional<std::regex> compiled;
    std::vector<std::string> contains;
    std::vector<std::string> responses;
    std::vector<std::string> weighted_labels;
    std::vector<double> weights;
    std::size_t cursor = 0;

    [[nodiscard]] bool matches(const std::string& text) const {
        if (kind == Kind::exact) {
            return text == pattern;
        }
        for (const auto& needle : contains) {
            if (text.find(needle) == std::string::npos) {
                return false;
            }
        }
        if (!compiled) {
            return true;
        }
        if (after_last) {
            const auto pos = text.rfind(*after_last);
            if (pos != std::string::npos) {
                const auto tail = text.substr(pos + after_last->size());
                return std::regex_search(tail, *compiled);
            }
        }
        return std::regex_search(text, *compiled);
    }
};

MockProvider::MockProvider() = default;
MockProvider::~MockProvider() = default;

std::unique_ptr<MockProvider> MockProvider::from_fixture(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::FixtureParseError, "cannot open mock fixture '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return from_json(buffer.str());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::unique_ptr<MockProvider> MockProvider::from_json(std::string_view json_text) {
    const auto doc = nlohmann::json::parse(json_text, nullptr, false);
    require(!doc.is_discarded() && doc.is_object(), ErrorCode::FixtureParseError, "mock fixture is not a JSON object");
    std::unique_ptr<MockProvider> mock(new MockProvider());
    try {
        mock->model_id_ = doc.value("model", std::string("mock"));
        mock->seed_ = doc.value("seed", std::uint64_t{0});
        require(doc.contains("rules") && doc["rules"].is_array(), ErrorCode::FixtureParseError,
                "mock fixture needs a 'rules' array");
        std::size_t index = 0;
        for (const auto& r : doc["rules"]) {
            const std::string where = "rule " + std::to_string(index++);
            require(r.is_object() && r.contains("match") && r["match"].is_object(), ErrorCode::FixtureParseError,
                    where + ": missing 'match' object");
            auto rule = std::make_unique<Rule>();
            const auto& match = r["match"];
            if (match.contains("exact")) {
                rule->kind = Rule::Kind::exact;
                rule->pattern = match["exact"].get<std::string>();
            } else if (match.contains("regex") || match.contains("contains")) {
                rule->kind = Rule::Kind::regex;
                if (match.contains("regex")) {
                    rule->pattern = match["regex"].get<std::string>();
                    try {
                        rule->compiled = std::regex(rule->pattern, std::regex::ECMAScript);
                    } catch (const std::regex_error& e) {
                        fail(ErrorCode::FixtureParseError, where + ": bad regex: " + e.what());
                    }
                }
                if (match.contains("contains")) {
                    rule->contains = match["contains"].get<std::vector<std::string>>();
                }
                if (match.contains("after_last")) {
                    rule->after_last = match["after_last"].get<std::string>();
                }
            } else {
                fail(ErrorCode::FixtureParseError, where + ": match needs 'exact', 'regex' or 'contains'");
            }
            const bool has_list = r.contains("responses");
            const bool has_weighted = r.contains("weighted");
            require(has_list != has_weighted, ErrorCode::FixtureParseError,
                    where + ": exactly one of 'responses' or 'weighted' is required");
            if (has_list) {
                rule->responses = r["responses"].get<std::vector<std::string>>();
                require(!rule->responses.empty(), ErrorCode::FixtureParseError, where + ": empty responses");
            } else {
                require(r["weighted"].is_object() && !r["weighted"].empty(), ErrorCode::FixtureParseError,
                        where + ": 'weighted' must be a non-empty object");
                double total = 0.0;
                for (const auto& [label, weight] : r["weighted"].items()) {
                    const double w = weight.get<double>();
                    require(w >= 0.0, ErrorCode::FixtureParseError, where + ": negative weight");
                    rule->weighted_labels.push_back(label);
                    rule->weights.push_back(w);
                    total += w;
                }
                require(total > 0.0, ErrorCode::FixtureParseError, where + ": weights sum to zero");
            }
            mock->rules_.push_back(std::move(rule));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::FixtureParseError, std::string("mock fixture: ") + e.what());
    }
    return mock;
}

std::string MockProvider::model_id() const { return model_id_; }

std::vector<CompletionRequest> MockProvider::history() const {
    std::lock_guard lock(mutex_);
    return history_;
}

std::size_t MockProvider::call_count() const {
    std::lock_guard lock(mutex_);
    return history_.size();
}

std::vector<std::string> MockProvider::complete(const CompletionRequest& request) {
    const std::string text = request.flattened_text();
    const std::size_t n = request.params().n_samples;

    std::lock_guard lock(mutex_);
    history_.push_back(request);

    Rule* chosen = nullptr;
    for (const auto& rule : rules_) {
        if (rule->kind == Rule::Kind::exact && rule->matches(text)) {
            chosen = rule.get();
            break;
        }
    }
    if (chosen == nullptr) {
        for (const auto& rule : rules_) {
            if (rule->kind == Rule::Kind::regex && rule->matches(text)) {
                chosen = rule.get();
                break;
            }
        }
    }
    if (chosen == nullptr) {
        const auto preview = text.size() > 120 ? text.substr(text.size() - 120) : text;
        fail(ErrorCode::FixtureMiss, "no mock rule matches request ending in: " + preview);
    }

    std::vector<std::string> out;
    out.reserve(n);
    if (!chosen->responses.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(chosen->responses[chosen->cursor % chosen->responses.size()]);
            ++chosen->cursor;
        }
    } else {
        const std::uint64_t seed = request.params().seed.value_or(
            derive_seed(seed_, sha256_u64(text + '\x1f' + request.draw_tag())));
        Rng rng(seed);
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(chosen->weighted_labels[categorical(chosen->weights, rng)]);
        }
    }
    for (auto& s : out) {
        s = truncate_at_stop(std::move(s), request.params().stop_sequences);
    }
    return out;
}

} // namespace vpersona
