#pragma once

#include "vpersona/matching.hpp"
#include "vpersona/persona_model.hpp"
#include "vpersona/provider.hpp"
#include "vpersona/random.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vpersona {

inline constexpr std::string_view kBridgeLine =
    "Please answer the following question keeping in mind your previous answers.";

/// Bio / QA baselines: a trait block alone, rendered from the human's traits.
struct DemographicConditioning {
    TraitTuple traits;
    PreambleStyle style = PreambleStyle::question_answer;
};

/// A natural backstory followed by a trait block of the traits assigned to it
/// by matching.
struct NaturalBackstoryConditioning {
    Backstory backstory;
    std::optional<TraitTuple> assigned_traits;
    PreambleStyle style = PreambleStyle::question_answer;
};

/// A demographics-primed backstory followed by its own provenance traits.
struct PrimedBackstoryConditioning {
    Backstory backstory;
};

using ConditioningMethod =
    std::variant<DemographicConditioning, NaturalBackstoryConditioning, PrimedBackstoryConditioning>;

enum class MethodKind { bio, qa, anthology_natural, anthology_dp };

[[nodiscard]] std::string_view to_string(MethodKind kind) noexcept;
/// Also accepts "anthology-natural", "natural", "anthology-dp", "dp".
[[nodiscard]] MethodKind parse_method_kind(std::string_view name);

/// Backstory text (if any), a blank line, then the trait block with its
/// variables in random order. Throws MissingAssignedTraits.
[[nodiscard]] std::string build_conditioning_prefix(const ConditioningMethod& method,
                                                    const DemographicScheme& scheme, Rng& rng);

struct RenderedQuestion {
    std::string question_id;
    std::string display_text;
    std::vector<std::string> display_options;
    /// index_map[display position] = canonical option index.
    std::vector<std::size_t> index_map;
    bool reversed = false;
    bool shuffled = false;

    /// "Question: ...\n(a) ...\n...\nAnswer:"
    [[nodiscard]] std::string block() const;

    friend bool operator==(const RenderedQuestion&, const RenderedQuestion&) = default;
};

/// Likert questions are reversed in full with probability 1/2; nominal
/// questions get a uniform random permutation.
[[nodiscard]] RenderedQuestion render_question(const SurveyQuestion& question, Rng& rng);

/// Label rule, then option-text rule, against the displayed options; the
/// result is a canonical option index.
[[nodiscard]] std::optional<std::size_t> parse_answer(std::string_view text, const RenderedQuestion& rendered);

struct TranscriptEntry {
    RenderedQuestion rendered;
    /// Last raw completion, trimmed.
    std::string reply;
    std::optional<std::size_t> display_position;
    Answer answer;
    std::size_t attempts = 0;

    /// What the transcript shows after the question: the chosen display
    /// label and option, or the raw reply when nothing parsed.
    [[nodiscard]] std::string answer_line() const;

    friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

struct AdministerOptions {
    /// Re-samples after an unparseable answer, on top of the first attempt.
    std::size_t retries = 2;
    /// T = 1.0, one completion, cut at the end of the line.
    SamplingParams params = [] {
        SamplingParams p;
        p.temperature = 1.0;
        p.top_p = 1.0;
        p.max_tokens = 32;
        p.stop_sequences = {"\n"};
        return p;
    }();
};

struct AdministrationRecord {
    std::string respondent_id;
    std::string prefix;
    std::vector<TranscriptEntry> transcript;
    std::optional<std::string> error;
    std::optional<ErrorCode> error_code;

    [[nodiscard]] std::vector<Answer> answers() const;
};

/// Prompt for the next question given the transcript so far.
[[nodiscard]] std::string build_question_prompt(std::string_view prefix, std::span<const TranscriptEntry> transcript,
                                                const RenderedQuestion& next);

/// Asks the questions in survey order, each with the full transcript of
/// earlier questions and answers. Provider errors propagate; entries already
/// answered stay in `record`.
void administer_into(AdministrationRecord& record, const Survey& survey, Provider& provider, Rng& rng,
                     const AdministerOptions& options = {});

[[nodiscard]] AdministrationRecord administer(std::string prefix, const Survey& survey, Provider& provider, Rng& rng,
                                              const AdministerOptions& options = {});

struct CohortMember {
    std::string respondent_id;
    ConditioningMethod method;
};

struct CohortOptions {
    AdministerOptions administer;
    std::size_t workers = 1;
};

struct CohortResult {
    ResponseMatrix matrix;
    std::vector<AdministrationRecord> records;
    /// "respondent: message" for every respondent whose administration failed.
    std::vector<std::string> failures;
};

/// Each respondent is administered independently with an rng derived from
/// (master_seed, respondent id). Failures are collected, not thrown; the
/// affected cells stay missing.
[[nodiscard]] CohortResult run_cohort(std::span<const CohortMember> cohort, const Survey& survey,
                                      const DemographicScheme& scheme, Provider& provider,
                                      std::uint64_t master_seed, const CohortOptions& options = {});

/// Builds the cohort for one method. Bio/QA condition on the humans' traits;
/// anthology_natural uses matched personas and looks their backstories up by
/// id; anthology_dp uses each DP backstory as its own respondent.
[[nodiscard]] std::vector<CohortMember> demographic_cohort(std::span<const HumanRespondent> humans,
                                                           PreambleStyle style);
[[nodiscard]] std::vector<CohortMember> natural_cohort(std::span<const ConditionedPersona> conditioned,
                                                       std::span<const Backstory> anthology, PreambleStyle style);
[[nodiscard]] std::vector<CohortMember> primed_cohort(std::span<const Backstory> anthology);

} // namespace vpersona
