#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vpersona {

enum class VariableKind { ordinal, nominal };

/// One demographic question with its canonical option list.
struct DemographicVariable {
    std::string id;
    std::string question_text;
    std::vector<std::string> options;
    VariableKind kind = VariableKind::nominal;
    bool extraction_eligible = false;
    /// Biography sentence with a `{label}` placeholder. Empty selects a
    /// generic sentence built from the question text.
    std::string bio_template;

    [[nodiscard]] std::size_t option_count() const noexcept { return options.size(); }
    [[nodiscard]] std::optional<std::size_t> find_option(std::string_view label) const;
    void validate() const;

    friend bool operator==(const DemographicVariable&, const DemographicVariable&) = default;
};

struct DemographicScheme {
    std::string wave_tag;
    std::vector<DemographicVariable> variables;

    [[nodiscard]] std::size_t size() const noexcept { return variables.size(); }
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view variable_id) const;
    /// Throws UnknownVariable.
    [[nodiscard]] const DemographicVariable& variable(std::string_view variable_id) const;
    void validate() const;

    friend bool operator==(const DemographicScheme&, const DemographicScheme&) = default;
};

struct TraitValue {
    std::string variable_id;
    std::size_t option_index = 0;

    friend bool operator==(const TraitValue&, const TraitValue&) = default;
};

/// One trait per scheme variable, in any order.
using TraitTuple = std::vector<TraitValue>;

[[nodiscard]] const TraitValue* find_trait(const TraitTuple& traits, std::string_view variable_id);

/// Checks that `traits` holds exactly one in-range value per scheme variable.
void validate_traits(const TraitTuple& traits, const DemographicScheme& scheme);

/// A canonical option index or the explicit missing marker. Missing never
/// aliases a real option.
class Answer {
  public:
    constexpr Answer() noexcept = default;

    [[nodiscard]] static constexpr Answer missing() noexcept { return Answer{}; }
    [[nodiscard]] static constexpr Answer of(std::size_t option_index) noexcept {
        Answer a;
        a.value_ = option_index;
        return a;
    }

    [[nodiscard]] constexpr bool is_missing() const noexcept { return value_ == kMissing; }
    /// Throws InvalidArgument on a missing answer.
    [[nodiscard]] std::size_t index() const;

    friend constexpr bool operator==(Answer, Answer) noexcept = default;

  private:
    static constexpr std::size_t kMissing = std::numeric_limits<std::size_t>::max();
    std::size_t value_ = kMissing;
};

struct HumanRespondent {
    std::string id;
    TraitTuple traits;
    std::map<std::string, Answer> answers;

    friend bool operator==(const HumanRespondent&, const HumanRespondent&) = default;
};

enum class DistributionSource { sampled, extracted };

struct TraitDistribution {
    std::string variable_id;
    std::vector<double> probs;
    DistributionSource source = DistributionSource::sampled;
    /// Sampling bookkeeping; zero for extracted distributions.
    std::size_t n_samples = 0;
    std::size_t parse_failures = 0;

    [[nodiscard]] static TraitDistribution from_counts(std::string variable_id,
                                                       std::span<const std::size_t> counts);
    [[nodiscard]] static TraitDistribution one_hot(std::string variable_id, std::size_t option_count,
                                                   std::size_t option_index);
    /// Nonnegative, sums to 1 within 1e-9, and one-hot when extracted.
    void validate() const;

    friend bool operator==(const TraitDistribution&, const TraitDistribution&) = default;
};

/// probs[i] = counts[i] / sum(counts). Throws AllZeroCounts when the sum is 0.
[[nodiscard]] std::vector<double> normalize_distribution(std::span<const std::size_t> counts);

enum class PreambleStyle { question_answer, biography };

enum class ProvenanceKind { natural, demographics_primed };

struct Provenance {
    ProvenanceKind kind = ProvenanceKind::natural;
    /// Populated for demographics-primed stories only.
    TraitTuple traits;
    PreambleStyle style = PreambleStyle::question_answer;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct GenerationMeta {
    std::string model_id;
    double temperature = 1.0;
    double top_p = 1.0;
    std::string template_id;
    std::optional<std::uint64_t> seed;

    friend bool operator==(const GenerationMeta&, const GenerationMeta&) = default;
};

struct Backstory {
    std::string id;
    std::string text;
    Provenance provenance;
    GenerationMeta generation_meta;

    void validate() const;

    friend bool operator==(const Backstory&, const Backstory&) = default;
};

struct VirtualPersona {
    std::string backstory_id;
    std::vector<TraitDistribution> distributions;
    std::optional<TraitTuple> assigned_traits;

    [[nodiscard]] const TraitDistribution* distribution(std::string_view variable_id) const;
    void validate(const DemographicScheme& scheme) const;

    friend bool operator==(const VirtualPersona&, const VirtualPersona&) = default;
};

/// P(d = t) for the persona's distribution over `trait.variable_id`.
/// Throws UnknownVariable when the persona has no such distribution.
[[nodiscard]] double trait_likelihood(const VirtualPersona& persona, const TraitValue& trait);

enum class QuestionScale { likert_reversible, nominal_shufflable };

struct SurveyQuestion {
    std::string id;
    std::string text;
    /// Canonical order; for Likert questions this is positive-to-negative.
    std::vector<std::string> options;
    QuestionScale scale = QuestionScale::likert_reversible;
    std::optional<std::string> preamble;

    [[nodiscard]] bool is_ordinal() const noexcept { return scale == QuestionScale::likert_reversible; }
    [[nodiscard]] std::optional<std::size_t> find_option(std::string_view label) const;
    void validate() const;

    friend bool operator==(const SurveyQuestion&, const SurveyQuestion&) = default;
};

struct Survey {
    std::string id;
    std::vector<SurveyQuestion> questions;

    [[nodiscard]] const SurveyQuestion* find(std::string_view question_id) const;
    [[nodiscard]] std::vector<std::string> question_ids() const;
    void validate() const;

    friend bool operator==(const Survey&, const Survey&) = default;
};

/// N respondents by Q questions of canonical answers, row-major.
class ResponseMatrix {
  public:
    ResponseMatrix(std::vector<std::string> respondent_ids, std::vector<std::string> question_ids,
                   std::vector<Answer> cells);
    /// All cells missing.
    ResponseMatrix(std::vector<std::string> respondent_ids, std::vector<std::string> question_ids);

    [[nodiscard]] std::size_t rows() const noexcept { return respondent_ids_.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return question_ids_.size(); }
    [[nodiscard]] const std::vector<std::string>& respondent_ids() const noexcept { return respondent_ids_; }
    [[nodiscard]] const std::vector<std::string>& question_ids() const noexcept { return question_ids_; }
    [[nodiscard]] std::span<const Answer> cells() const noexcept { return cells_; }

    [[nodiscard]] Answer at(std::size_t row, std::size_t col) const;
    void set(std::size_t row, std::size_t col, Answer answer);
    [[nodiscard]] std::optional<std::size_t> column_index(std::string_view question_id) const;

    /// New matrix holding the given rows in the given order.
    [[nodiscard]] ResponseMatrix select_rows(std::span<const std::size_t> rows) const;
    /// Restriction to the given question ids, in that order.
    [[nodiscard]] ResponseMatrix select_columns(std::span<const std::string> question_ids) const;
    /// Every survey question is a column and every present cell indexes into
    /// its question's options.
    void validate_against(const Survey& survey) const;

    friend bool operator==(const ResponseMatrix&, const ResponseMatrix&) = default;

  private:
    std::vector<std::string> respondent_ids_;
    std::vector<std::string> question_ids_;
    std::vector<Answer> cells_;
};

[[nodiscard]] ResponseMatrix human_response_matrix(std::span<const HumanRespondent> humans,
                                                   const Survey& survey);

[[nodiscard]] std::string_view to_string(VariableKind kind) noexcept;
[[nodiscard]] std::string_view to_string(DistributionSource source) noexcept;
[[nodiscard]] std::string_view to_string(PreambleStyle style) noexcept;
[[nodiscard]] std::string_view to_string(ProvenanceKind kind) noexcept;
[[nodiscard]] std::string_view to_string(QuestionScale scale) noexcept;

/// Inverse of to_string; throw SchemaError on unknown names.
[[nodiscard]] VariableKind parse_variable_kind(std::string_view name);
[[nodiscard]] DistributionSource parse_distribution_source(std::string_view name);
[[nodiscard]] PreambleStyle parse_preamble_style(std::string_view name);
[[nodiscard]] ProvenanceKind parse_provenance_kind(std::string_view name);
[[nodiscard]] QuestionScale parse_question_scale(std::string_view name);

} // namespace vpersona
