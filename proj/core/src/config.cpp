#include "vpersona/pipeline.hpp"

#include "vpersona/digest.hpp"
#include "vpersona/error.hpp"

#include <toml.hpp>

#include <cstdlib>

namespace vpersona {

namespace {

std::string interpolate(std::string_view text, std::string_view where) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find("${", pos);
        if (open == std::string_view::npos) {
            out += text.substr(pos);
            break;
        }
        const auto close = text.find('}', open + 2);
        if (close == std::string_view::npos) {
            fail(ErrorCode::ConfigError, std::string(where) + ": unterminated ${ in '" + std::string(text) + "'");
        }
        out += text.substr(pos, open - pos);
        const std::string name(text.substr(open + 2, close - open - 2));
        const char* value = std::getenv(name.c_str());
        if (value == nullptr) {
            fail(ErrorCode::ConfigError, std::string(where) + ": environment variable '" + name + "' is not set");
        }
        out += value;
        pos = close + 1;
    }
    return out;
}

// Typed access to one TOML table with dotted paths in error messages.
class Section {
  public:
    Section(const toml::table* table, std::string path) : table_(table), path_(std::move(path)) {}

    [[nodiscard]] bool has(std::string_view key) const { return table_ != nullptr && table_->contains(key); }

    [[nodiscard]] Section sub(std::string_view key) const {
        const toml::table* t = nullptr;
        if (has(key)) {
            t = (*table_)[key].as_table();
            if (t == nullptr) bad(key, "a table");
        }
        return Section(t, where(key));
    }

    [[nodiscard]] std::optional<std::string> string(std::string_view key) const {
        if (!has(key)) return std::nullopt;
        const auto v = (*table_)[key].value<std::string>();
        if (!v) bad(key, "a string");
        return interpolate(*v, where(key));
    }
    [[nodiscard]] std::string string(std::string_view key, std::string fallback) const {
        return string(key).value_or(std::move(fallback));
    }

    [[nodiscard]] std::optional<std::int64_t> integer(std::string_view key) const {
        if (!has(key)) return std::nullopt;
        const auto* node = (*table_)[key].as_integer();
        if (node == nullptr) bad(key, "an integer");
        return node->get();
    }
    [[nodiscard]] std::size_t count(std::string_view key, std::size_t fallback) const {
        const auto v = integer(key);
        if (!v) return fallback;
        if (*v < 0) bad(key, "a non-negative integer");
        return static_cast<std::size_t>(*v);
    }
    [[nodiscard]] std::optional<std::uint64_t> seed(std::string_view key) const {
        if (!has(key)) return std::nullopt;
        if (const auto s = (*table_)[key].value<std::string>()) {
            try {
                std::size_t used = 0;
                const auto v = std::stoull(*s, &used, 0);
                if (used == s->size()) return v;
            } catch (const std::exception&) {
            }
            bad(key, "an unsigned 64-bit integer");
        }
        const auto v = integer(key);
        if (*v < 0) bad(key, "a non-negative integer");
        return static_cast<std::uint64_t>(*v);
    }
    [[nodiscard]] double real(std::string_view key, double fallback) const {
        if (!has(key)) return fallback;
        const auto v = (*table_)[key].value<double>();
        if (!v) bad(key, "a number");
        return *v;
    }
    [[nodiscard]] bool boolean(std::string_view key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto v = (*table_)[key].value<bool>();
        if (!v) bad(key, "a boolean");
        return *v;
    }
    [[nodiscard]] std::vector<std::string> strings(std::string_view key, std::vector<std::string> fallback) const {
        if (!has(key)) return fallback;
        const auto* arr = (*table_)[key].as_array();
        if (arr == nullptr) bad(key, "an array of strings");
        std::vector<std::string> out;
        for (const auto& node : *arr) {
            const auto v = node.value<std::string>();
            if (!v) bad(key, "an array of strings");
            out.push_back(interpolate(*v, where(key)));
        }
        return out;
    }
    [[nodiscard]] std::vector<Section> tables(std::string_view key) const {
        std::vector<Section> out;
        if (!has(key)) return out;
        const auto* arr = (*table_)[key].as_array();
        if (arr == nullptr) bad(key, "an array of tables");
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const auto* t = (*arr)[i].as_table();
            if (t == nullptr) bad(key, "an array of tables");
            out.emplace_back(t, where(key) + "[" + std::to_string(i) + "]");
        }
        return out;
    }
    [[nodiscard]] std::vector<std::string> keys() const {
        std::vector<std::string> out;
        if (table_ == nullptr) return out;
        for (const auto& [k, v] : *table_) out.emplace_back(k.str());
        return out;
    }
    [[nodiscard]] std::string where(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

  private:
    [[noreturn]] void bad(std::string_view key, std::string_view expected) const {
        fail(ErrorCode::ConfigError, "config key '" + where(key) + "' must be " + std::string(expected));
    }

    const toml::table* table_;
    std::string path_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

void read_sampling(const Section& s, SamplingParams& params) {
    params.temperature = s.real("temperature", params.temperature);
    params.top_p = s.real("top_p", params.top_p);
    params.max_tokens = static_cast<int>(s.count("max_tokens", static_cast<std::size_t>(params.max_tokens)));
    params.stop_sequences = s.strings("stop", params.stop_sequences);
}

ProviderSpec read_provider(const Section& s, const std::filesystem::path& base) {
    ProviderSpec spec;
    const std::string kind = s.string("kind", "mock");
    if (kind == "mock") {
        spec.kind = ProviderSpec::Kind::mock;
        const auto fixture = s.string("fixture");
        if (!fixture) fail(ErrorCode::ConfigError, "config key '" + s.where("fixture") + "' is required for mock providers");
        spec.fixture = resolve(base, *fixture);
    } else if (kind == "http") {
        spec.kind = ProviderSpec::Kind::http;
        auto& h = spec.http;
        h.base_url = s.string("base_url", "");
        h.api_key_env = s.string("api_key_env", "");
        h.model_id = s.string("model", "");
        h.mode = parse_provider_mode(s.string("mode", "completion"));
        h.max_concurrent_requests = s.count("max_concurrent_requests", h.max_concurrent_requests);
        h.retry.max_attempts = s.count("max_attempts", h.retry.max_attempts);
        h.retry.backoff_base = std::chrono::milliseconds(s.count("backoff_base_ms", 500));
        h.retry.backoff_cap = std::chrono::milliseconds(s.count("backoff_cap_ms", 30000));
        h.timeout = std::chrono::milliseconds(s.count("timeout_ms", 120000));
    } else {
        fail(ErrorCode::ConfigError, "config key '" + s.where("kind") + "' must be \"mock\" or \"http\"");
    }
    if (const auto cache = s.string("cache_dir")) spec.cache_dir = resolve(base, *cache);
    return spec;
}

} // namespace

std::shared_ptr<Provider> make_provider(const ProviderSpec& spec) {
    std::shared_ptr<Provider> provider;
    if (spec.kind == ProviderSpec::Kind::mock) {
        provider = MockProvider::from_fixture(spec.fixture);
    } else {
        provider = std::make_shared<HttpProvider>(spec.http);
    }
    if (!spec.cache_dir.empty()) {
        auto cache = std::make_shared<ResponseCache>(ResponseCache::resolve_directory(spec.cache_dir));
        provider = std::make_shared<CachingProvider>(std::move(provider), std::move(cache));
    }
    return provider;
}

std::uint64_t PipelineConfig::seed(std::string_view name) const {
    if (const auto it = seed_overrides.find(std::string(name)); it != seed_overrides.end()) return it->second;
    return derive_seed(master_seed, name);
}

PipelineConfig parse_pipeline_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        const auto& where = e.source().begin;
        fail(ErrorCode::ConfigError, "config is not valid TOML (line " + std::to_string(where.line) + "): " +
                                         std::string(e.description()));
    }
    const Section top(&root, "");
    PipelineConfig c;

    const Section run = top.sub("run");
    c.output_dir = resolve(base_dir, run.string("output_dir", "out"));
    c.wave = run.string("wave", "");
    c.method = parse_method_kind(run.string("method", "anthology_natural"));
    c.matching = parse_matching_method(run.string("matching", "greedy"));
    c.preamble_style = parse_preamble_style(run.string("preamble_style", "question_answer"));
    c.master_seed = run.seed("master_seed").value_or(0);
    c.workers = std::max<std::size_t>(1, run.count("workers", 1));

    const Section seeds = top.sub("seeds");
    for (const auto& key : seeds.keys()) c.seed_overrides[key] = *seeds.seed(key);

    const Section data = top.sub("data");
    auto required_path = [&](std::string_view key) {
        const auto v = data.string(key);
        if (!v) fail(ErrorCode::ConfigError, "config key '" + data.where(key) + "' is required");
        return resolve(base_dir, *v);
    };
    c.scheme_path = required_path("scheme");
    c.survey_path = required_path("survey");
    c.respondents_path = required_path("respondents");
    if (const auto a = data.string("anthology"); a && !a->empty()) c.anthology_path = resolve(base_dir, *a);

    const Section gen = top.sub("generate");
    c.generate_count = gen.count("count", c.generate_count);
    c.natural.filter.min_chars = gen.count("min_chars", c.natural.filter.min_chars);
    c.natural.filter.max_attempts = gen.count("max_attempts", c.natural.filter.max_attempts);
    c.natural.workers = std::max<std::size_t>(1, gen.count("workers", 1));
    read_sampling(gen, c.natural.params);
    const Section primed = gen.sub("primed");
    read_sampling(primed, c.primed.params);
    c.primed.instruction = primed.string("instruction", c.primed.instruction);
    c.primed.use_chat = primed.boolean("use_chat", c.primed.use_chat);
    c.primed.max_attempts = primed.count("max_attempts", c.primed.max_attempts);

    const Section prof = top.sub("profile");
    c.profile.sampling.n_samples = prof.count("n_samples", c.profile.sampling.n_samples);
    c.profile.sampling.numeric_ranges = prof.boolean("numeric_ranges", c.profile.sampling.numeric_ranges);
    read_sampling(prof, c.profile.sampling.params);
    c.profile.extract = prof.boolean("extract", c.profile.extract);

    const Section match = top.sub("match");
    if (match.has("epsilon_floor")) c.edge_weights.epsilon_floor = match.real("epsilon_floor", 0.0);

    const Section surv = top.sub("survey");
    c.administer.retries = surv.count("retries", c.administer.retries);
    read_sampling(surv, c.administer.params);

    const Section eval = top.sub("evaluate");
    c.lower_bound_iterations = eval.count("lower_bound_iterations", c.lower_bound_iterations);
    for (const auto& g : eval.tables("subgroups")) {
        SubgroupSpec spec;
        const auto v = g.string("variable");
        if (!v) fail(ErrorCode::ConfigError, "config key '" + g.where("variable") + "' is required");
        spec.variable_id = *v;
        for (const auto& b : g.tables("bands")) {
            spec.bands.push_back({b.string("name", ""), b.strings("labels", {})});
        }
        c.subgroups.push_back(std::move(spec));
    }

    const Section providers = top.sub("providers");
    for (const auto& key : providers.keys()) c.providers[key] = read_provider(providers.sub(key), base_dir);
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    PipelineConfig c = parse_pipeline_config(read_text_file(path), path.parent_path());
    c.config_path = path;
    return c;
}

void PipelineConfig::validate() const {
    auto need_file = [](const std::filesystem::path& p, std::string_view what) {
        require(std::filesystem::is_regular_file(p), ErrorCode::ConfigError,
                std::string(what) + " '" + p.string() + "' does not exist");
    };
    need_file(scheme_path, "scheme");
    need_file(survey_path, "survey");
    need_file(respondents_path, "respondents file");
    if (anthology_path) need_file(*anthology_path, "anthology");
    require(!output_dir.empty(), ErrorCode::ConfigError, "output directory is empty");
    require(generate_count >= 1, ErrorCode::ConfigError, "generate.count must be positive");
    require(profile.sampling.n_samples >= 1, ErrorCode::ConfigError, "profile.n_samples must be positive");
    for (const auto& [name, seed] : seed_overrides) {
        bool known = false;
        for (auto n : kSeedNames) known = known || n == name;
        require(known, ErrorCode::ConfigError, "unknown seed name '" + name + "'");
    }
    for (const auto& [name, spec] : providers) {
        if (spec.kind == ProviderSpec::Kind::mock) {
            need_file(spec.fixture, "mock fixture for provider '" + name + "'");
        } else {
            spec.http.validate();
        }
    }
    auto need_provider = [&](const char* name) {
        require(providers.count(name) > 0, ErrorCode::ConfigError,
                "method '" + std::string(to_string(method)) + "' needs a [providers." + name + "] section");
    };
    const bool natural = method == MethodKind::anthology_natural;
    if ((natural || method == MethodKind::anthology_dp) && !anthology_path) need_provider("generate");
    if (natural) need_provider("profile");
    need_provider("survey");
}

} // namespace vpersona
