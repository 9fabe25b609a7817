#pragma once

#include "vpersona/backstory_gen.hpp"
#include "vpersona/demo_survey.hpp"
#include "vpersona/io.hpp"
#include "vpersona/matching.hpp"
#include "vpersona/provider.hpp"
#include "vpersona/survey_runner.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vpersona {

/// One backend for one stage: a mock fixture or an OpenAI-compatible server,
/// optionally behind an on-disk response cache.
struct ProviderSpec {
    enum class Kind { mock, http };
    Kind kind = Kind::mock;
    std::filesystem::path fixture;
    ProviderConfig http;
    /// Empty disables caching.
    std::filesystem::path cache_dir;
};

[[nodiscard]] std::shared_ptr<Provider> make_provider(const ProviderSpec& spec);

struct SubgroupSpec {
    std::string variable_id;
    std::vector<LabelBand> bands;
};

struct PipelineConfig {
    std::filesystem::path config_path;
    std::filesystem::path output_dir;
    std::string wave;
    MethodKind method = MethodKind::anthology_natural;
    MatchingMethod matching = MatchingMethod::greedy;
    PreambleStyle preamble_style = PreambleStyle::question_answer;
    std::uint64_t master_seed = 0;
    /// Explicit values for named seeds; others derive from master_seed.
    std::map<std::string, std::uint64_t> seed_overrides;
    std::size_t workers = 1;

    std::filesystem::path scheme_path;
    std::filesystem::path survey_path;
    std::filesystem::path respondents_path;
    /// Existing anthology to load instead of generating one.
    std::optional<std::filesystem::path> anthology_path;

    std::size_t generate_count = 20;
    NaturalGenerationOptions natural;
    PrimedGenerationOptions primed;
    ProfileOptions profile;
    EdgeWeightOptions edge_weights;
    AdministerOptions administer;
    std::size_t lower_bound_iterations = 100;
    std::vector<SubgroupSpec> subgroups;

    /// Keys: generate, profile, extract, survey. `extract` falls back to
    /// `profile` when absent.
    std::map<std::string, ProviderSpec> providers;

    /// Named seed: the override if present, else derive_seed(master_seed, name).
    [[nodiscard]] std::uint64_t seed(std::string_view name) const;
    /// Checks enums, counts, referenced paths and required providers.
    void validate() const;
};

inline constexpr std::string_view kSeedNames[] = {"generate", "profile", "match", "survey", "lower_bound"};

/// Parses TOML. `${NAME}` in strings expands from the environment (unset is a
/// ConfigError); relative paths resolve against `base_dir`.
[[nodiscard]] PipelineConfig parse_pipeline_config(std::string_view toml_text, const std::filesystem::path& base_dir);
[[nodiscard]] PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Digest of the whole effective configuration (inputs by content).
[[nodiscard]] std::string config_digest(const PipelineConfig& config);

enum class Stage { generate, profile, match, survey, evaluate };

[[nodiscard]] std::string_view to_string(Stage stage) noexcept;
[[nodiscard]] Stage parse_stage(std::string_view name);

/// Stages the configured method runs, in order.
[[nodiscard]] std::vector<Stage> stages_for(MethodKind method);

struct StageOutcome {
    Stage stage;
    std::string digest;
    bool reused = false;
};

struct RunOptions {
    /// Stop after this stage (inclusive). Upstream stages still run or resume.
    std::optional<Stage> until;
    /// Ignore existing artifacts.
    bool force = false;
};

struct RunResult {
    std::filesystem::path output_dir;
    std::vector<StageOutcome> stages;
};

/// generate (or load) -> profile -> match -> run-survey -> evaluate, as the
/// method requires. Each stage's artifact is stamped with a digest of exactly
/// the configuration and inputs it depends on, and is reused when that digest
/// still matches. Failures surface as StageError naming the stage.
RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

/// Artifact file names inside the output directory.
namespace artifacts {
inline constexpr std::string_view anthology = "anthology.jsonl";
inline constexpr std::string_view personas = "personas.jsonl";
inline constexpr std::string_view matching = "matching.json";
inline constexpr std::string_view responses = "responses.csv";
inline constexpr std::string_view responses_audit = "responses_audit.json";
inline constexpr std::string_view report = "report.json";
inline constexpr std::string_view report_csv = "report.csv";
inline constexpr std::string_view manifest = "manifest.json";
} // namespace artifacts

/// Writes progress lines to stderr at or above `level` ("debug", "info",
/// "warn", "error", "off").
void set_log_level(std::string_view level);

} // namespace vpersona
