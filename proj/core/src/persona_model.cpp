#include "vpersona/persona_model.hpp"

#include "vpersona/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

namespace vpersona {

namespace {

constexpr double kSumTolerance = 1e-9;

void require_unique_labels(const std::vector<std::string>& options, const std::string& owner) {
    std::set<std::string_view> seen;
    for (const auto& label : options) {
        require(!label.empty(), ErrorCode::SchemaError, owner + ": empty option label");
        require(seen.insert(label).second, ErrorCode::SchemaError,
                owner + ": duplicate option label '" + label + "'");
    }
}

} // namespace

std::optional<std::size_t> DemographicVariable::find_option(std::string_view label) const {
    const auto it = std::find(options.begin(), options.end(), label);
    if (it == options.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - options.begin());
}

void DemographicVariable::validate() const {
    require(!id.empty(), ErrorCode::SchemaError, "demographic variable without id");
    require(options.size() >= 2, ErrorCode::SchemaError,
            "variable '" + id + "' needs at least two options");
    require_unique_labels(options, "variable '" + id + "'");
}

std::optional<std::size_t> DemographicScheme::index_of(std::string_view variable_id) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i].id == variable_id) {
            return i;
        }
    }
    return std::nullopt;
}

const DemographicVariable& DemographicScheme::variable(std::string_view variable_id) const {
    const auto index = index_of(variable_id);
    if (!index) {
        fail(ErrorCode::UnknownVariable, "unknown demographic variable '" + std::string(variable_id) + "'");
    }
    return variables[*index];
}

void DemographicScheme::validate() const {
    require(!variables.empty(), ErrorCode::SchemaError, "demographic scheme has no variables");
    std::set<std::string_view> ids;
    for (const auto& v : variables) {
        v.validate();
        require(ids.insert(v.id).second, ErrorCode::SchemaError, "duplicate variable id '" + v.id + "'");
    }
}

const TraitValue* find_trait(const TraitTuple& traits, std::string_view variable_id) {
    const auto it = std::find_if(traits.begin(), traits.end(),
                                 [&](const TraitValue& t) { return t.variable_id == variable_id; });
    return it == traits.end() ? nullptr : &*it;
}

void validate_traits(const TraitTuple& traits, const DemographicScheme& scheme) {
    require(traits.size() == scheme.size(), ErrorCode::SchemaError,
            "trait tuple has " + std::to_string(traits.size()) + " values, scheme has " +
                std::to_string(scheme.size()) + " variables");
    std::set<std::string_view> seen;
    for (const auto& trait : traits) {
        const auto& variable = scheme.variable(trait.variable_id);
        require(seen.insert(trait.variable_id).second, ErrorCode::SchemaError,
                "duplicate trait for variable '" + trait.variable_id + "'");
        require(trait.option_index < variable.option_count(), ErrorCode::SchemaError,
                "trait index out of range for variable '" + trait.variable_id + "'");
    }
}

std::size_t Answer::index() const {
    require(!is_missing(), ErrorCode::InvalidArgument, "index() on a missing answer");
    return value_;
}

std::vector<double> normalize_distribution(std::span<const std::size_t> counts) {
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    require(total > 0, ErrorCode::AllZeroCounts, "no parsed samples to normalize");
    std::vector<double> probs(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        probs[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return probs;
}

TraitDistribution TraitDistribution::from_counts(std::string variable_id,
                                                 std::span<const std::size_t> counts) {
    TraitDistribution d;
    d.variable_id = std::move(variable_id);
    try {
        d.probs = normalize_distribution(counts);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::AllZeroCounts) {
            fail(ErrorCode::AllZeroCounts, "variable '" + d.variable_id + "': every sample failed to parse");
        }
        throw;
    }
    d.source = DistributionSource::sampled;
    d.n_samples = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    d.validate();
    return d;
}

TraitDistribution TraitDistribution::one_hot(std::string variable_id, std::size_t option_count,
                                             std::size_t option_index) {
    require(option_index < option_count, ErrorCode::InvalidArgument, "one_hot: index out of range");
    TraitDistribution d;
    d.variable_id = std::move(variable_id);
    d.probs.assign(option_count, 0.0);
    d.probs[option_index] = 1.0;
    d.source = DistributionSource::extracted;
    d.validate();
    return d;
}

void TraitDistribution::validate() const {
    require(!probs.empty(), ErrorCode::InvalidArgument, "distribution for '" + variable_id + "' is empty");
    double sum = 0.0;
    for (double p : probs) {
        require(std::isfinite(p) && p >= 0.0, ErrorCode::InvalidArgument,
                "distribution for '" + variable_id + "' has a negative or non-finite entry");
        sum += p;
    }
    require(std::abs(sum - 1.0) <= kSumTolerance, ErrorCode::InvalidArgument,
            "distribution for '" + variable_id + "' does not sum to 1");
    if (source == DistributionSource::extracted) {
        const auto ones = std::count(probs.begin(), probs.end(), 1.0);
        const auto zeros = std::count(probs.begin(), probs.end(), 0.0);
        require(ones == 1 && zeros == static_cast<std::ptrdiff_t>(probs.size()) - 1, ErrorCode::InvalidArgument,
                "extracted distribution for '" + variable_id + "' is not one-hot");
    }
}

void Backstory::validate() const {
    require(!id.empty(), ErrorCode::SchemaError, "backstory without id");
    const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
    require(!blank, ErrorCode::SchemaError, "backstory '" + id + "' has empty text");
    if (provenance.kind == ProvenanceKind::demographics_primed) {
        require(!provenance.traits.empty(), ErrorCode::SchemaError,
                "demographics-primed backstory '" + id + "' carries no traits");
    }
}

const TraitDistribution* VirtualPersona::distribution(std::string_view variable_id) const {
    const auto it = std::find_if(distributions.begin(), distributions.end(),
                                 [&](const TraitDistribution& d) { return d.variable_id == variable_id; });
    return it == distributions.end() ? nullptr : &*it;
}

void VirtualPersona::validate(const DemographicScheme& scheme) const {
    require(distributions.size() == scheme.size(), ErrorCode::SchemaError,
            "persona '" + backstory_id + "' must have one distribution per scheme variable");
    for (const auto& variable : scheme.variables) {
        const auto* d = distribution(variable.id);
        require(d != nullptr, ErrorCode::SchemaError,
                "persona '" + backstory_id + "' lacks a distribution for '" + variable.id + "'");
        require(d->probs.size() == variable.option_count(), ErrorCode::SchemaError,
                "persona '" + backstory_id + "' distribution for '" + variable.id + "' has wrong length");
        d->validate();
    }
    if (assigned_traits) {
        validate_traits(*assigned_traits, scheme);
    }
}

double trait_likelihood(const VirtualPersona& persona, const TraitValue& trait) {
    const auto* d = persona.distribution(trait.variable_id);
    if (d == nullptr) {
        fail(ErrorCode::UnknownVariable,
             "persona '" + persona.backstory_id + "' has no distribution for '" + trait.variable_id + "'");
    }
    require(trait.option_index < d->probs.size(), ErrorCode::InvalidArgument,
            "trait index out of range for variable '" + trait.variable_id + "'");
    return std::clamp(d->probs[trait.option_index], 0.0, 1.0);
}

std::optional<std::size_t> SurveyQuestion::find_option(std::string_view label) const {
    const auto it = std::find(options.begin(), options.end(), label);
    if (it == options.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - options.begin());
}

void SurveyQuestion::validate() const {
    require(!id.empty(), ErrorCode::SchemaError, "survey question without id");
    require(options.size() >= 2, ErrorCode::SchemaError, "question '" + id + "' needs at least two options");
    require_unique_labels(options, "question '" + id + "'");
}

const SurveyQuestion* Survey::find(std::string_view question_id) const {
    const auto it = std::find_if(questions.begin(), questions.end(),
                                 [&](const SurveyQuestion& q) { return q.id == question_id; });
    return it == questions.end() ? nullptr : &*it;
}

std::vector<std::string> Survey::question_ids() const {
    std::vector<std::string> ids;
    ids.reserve(questions.size());
    for (const auto& q : questions) {
        ids.push_back(q.id);
    }
    return ids;
}

void Survey::validate() const {
    require(!questions.empty(), ErrorCode::SchemaError, "survey has no questions");
    std::set<std::string_view> ids;
    for (const auto& q : questions) {
        q.validate();
        require(ids.insert(q.id).second, ErrorCode::SchemaError, "duplicate question id '" + q.id + "'");
    }
}

ResponseMatrix::ResponseMatrix(std::vector<std::string> respondent_ids, std::vector<std::string> question_ids,
                               std::vector<Answer> cells)
    : respondent_ids_(std::move(respondent_ids)), question_ids_(std::move(question_ids)),
      cells_(std::move(cells)) {
    require(!respondent_ids_.empty(), ErrorCode::ShapeMismatch, "response matrix needs at least one respondent");
    require(!question_ids_.empty(), ErrorCode::ShapeMismatch, "response matrix needs at least one question");
    require(cells_.size() == respondent_ids_.size() * question_ids_.size(), ErrorCode::ShapeMismatch,
            "response matrix cell count does not match its shape");
    std::set<std::string_view> seen;
    for (const auto& q : question_ids_) {
        require(seen.insert(q).second, ErrorCode::SchemaError, "duplicate question column '" + q + "'");
    }
}

ResponseMatrix::ResponseMatrix(std::vector<std::string> respondent_ids, std::vector<std::string> question_ids)
    : ResponseMatrix(respondent_ids, question_ids,
                     std::vector<Answer>(respondent_ids.size() * question_ids.size())) {}

Answer ResponseMatrix::at(std::size_t row, std::size_t col) const {
    require(row < rows() && col < cols(), ErrorCode::InvalidArgument, "response matrix index out of range");
    return cells_[row * cols() + col];
}

void ResponseMatrix::set(std::size_t row, std::size_t col, Answer answer) {
    require(row < rows() && col < cols(), ErrorCode::InvalidArgument, "response matrix index out of range");
    cells_[row * cols() + col] = answer;
}

std::optional<std::size_t> ResponseMatrix::column_index(std::string_view question_id) const {
    for (std::size_t c = 0; c < question_ids_.size(); ++c) {
        if (question_ids_[c] == question_id) {
            return c;
        }
    }
    return std::nullopt;
}

ResponseMatrix ResponseMatrix::select_rows(std::span<const std::size_t> rows_to_keep) const {
    std::vector<std::string> ids;
    std::vector<Answer> cells;
    ids.reserve(rows_to_keep.size());
    cells.reserve(rows_to_keep.size() * cols());
    for (std::size_t r : rows_to_keep) {
        require(r < rows(), ErrorCode::InvalidArgument, "select_rows: row out of range");
        ids.push_back(respondent_ids_[r]);
        cells.insert(cells.end(), cells_.begin() + static_cast<std::ptrdiff_t>(r * cols()),
                     cells_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols()));
    }
    return ResponseMatrix(std::move(ids), question_ids_, std::move(cells));
}

ResponseMatrix ResponseMatrix::select_columns(std::span<const std::string> question_ids) const {
    std::vector<std::size_t> source;
    for (const auto& id : question_ids) {
        const auto c = column_index(id);
        require(c.has_value(), ErrorCode::QuestionSetMismatch, "response matrix has no column '" + id + "'");
        source.push_back(*c);
    }
    std::vector<Answer> cells;
    cells.reserve(rows() * source.size());
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c : source) {
            cells.push_back(cells_[r * cols() + c]);
        }
    }
    return ResponseMatrix(respondent_ids_, {question_ids.begin(), question_ids.end()}, std::move(cells));
}

void ResponseMatrix::validate_against(const Survey& survey) const {
    std::string missing;
    for (const auto& q : survey.questions) {
        if (!column_index(q.id)) {
            missing += (missing.empty() ? "" : ",") + q.id;
        }
    }
    require(missing.empty(), ErrorCode::QuestionSetMismatch, "response matrix lacks questions: " + missing);
    for (std::size_t c = 0; c < cols(); ++c) {
        const auto* q = survey.find(question_ids_[c]);
        require(q != nullptr, ErrorCode::QuestionSetMismatch,
                "response matrix column '" + question_ids_[c] + "' is not in the survey");
        for (std::size_t r = 0; r < rows(); ++r) {
            const Answer a = cells_[r * cols() + c];
            require(a.is_missing() || a.index() < q->options.size(), ErrorCode::SchemaError,
                    "answer out of range at respondent '" + respondent_ids_[r] + "', question '" + q->id + "'");
        }
    }
}

ResponseMatrix human_response_matrix(std::span<const HumanRespondent> humans, const Survey& survey) {
    std::vector<std::string> ids;
    ids.reserve(humans.size());
    for (const auto& h : humans) {
        ids.push_back(h.id);
    }
    ResponseMatrix matrix(std::move(ids), survey.question_ids());
    for (std::size_t r = 0; r < humans.size(); ++r) {
        for (std::size_t c = 0; c < survey.questions.size(); ++c) {
            const auto it = humans[r].answers.find(survey.questions[c].id);
            if (it != humans[r].answers.end()) {
                matrix.set(r, c, it->second);
            }
        }
    }
    matrix.validate_against(survey);
    return matrix;
}

std::string_view to_string(VariableKind kind) noexcept {
    return kind == VariableKind::ordinal ? "ordinal" : "nominal";
}

std::string_view to_string(DistributionSource source) noexcept {
    return source == DistributionSource::sampled ? "sampled" : "extracted";
}

std::string_view to_string(PreambleStyle style) noexcept {
    return style == PreambleStyle::question_answer ? "question_answer" : "biography";
}

std::string_view to_string(ProvenanceKind kind) noexcept {
    return kind == ProvenanceKind::natural ? "natural" : "demographics_primed";
}

std::string_view to_string(QuestionScale scale) noexcept {
    return scale == QuestionScale::likert_reversible ? "likert_reversible" : "nominal_shufflable";
}

VariableKind parse_variable_kind(std::string_view name) {
    if (name == "ordinal") return VariableKind::ordinal;
    if (name == "nominal") return VariableKind::nominal;
    fail(ErrorCode::SchemaError, "unknown variable kind '" + std::string(name) + "'");
}

DistributionSource parse_distribution_source(std::string_view name) {
    if (name == "sampled") return DistributionSource::sampled;
    if (name == "extracted") return DistributionSource::extracted;
    fail(ErrorCode::SchemaError, "unknown distribution source '" + std::string(name) + "'");
}

PreambleStyle parse_preamble_style(std::string_view name) {
    if (name == "question_answer" || name == "qa") return PreambleStyle::question_answer;
    if (name == "biography" || name == "bio") return PreambleStyle::biography;
    fail(ErrorCode::SchemaError, "unknown preamble style '" + std::string(name) + "'");
}

ProvenanceKind parse_provenance_kind(std::string_view name) {
    if (name == "natural") return ProvenanceKind::natural;
    if (name == "demographics_primed") return ProvenanceKind::demographics_primed;
    fail(ErrorCode::SchemaError, "unknown provenance '" + std::string(name) + "'");
}

QuestionScale parse_question_scale(std::string_view name) {
    if (name == "likert_reversible") return QuestionScale::likert_reversible;
    if (name == "nominal_shufflable") return QuestionScale::nominal_shufflable;
    fail(ErrorCode::SchemaError, "unknown question scale '" + std::string(name) + "'");
}

} // namespace vpersona
