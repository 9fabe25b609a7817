#pragma once

#include "vpersona/persona_model.hpp"
#include "vpersona/random.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vpersona {

/// Share of each canonical option among the non-missing cells of a column.
/// Throws EmptyColumn when every cell is missing.
[[nodiscard]] std::vector<double> answer_distribution(const ResponseMatrix& matrix, std::string_view question_id,
                                                      std::size_t option_count);

/// Earth mover's distance between two distributions on an ordered scale with
/// unit spacing: sum over i < m of |CDF_p(i) - CDF_q(i)|.
[[nodiscard]] double wasserstein_1d(std::span<const double> p, std::span<const double> q);

/// wasserstein_1d after checking that the question is ordinal (NotOrdinal).
[[nodiscard]] double question_wasserstein(const SurveyQuestion& question, std::span<const double> p,
                                          std::span<const double> q);

/// Per-question distances in survey order.
[[nodiscard]] std::vector<std::pair<std::string, double>> per_question_wasserstein(const ResponseMatrix& matrix_v,
                                                                                   const ResponseMatrix& matrix_h,
                                                                                   const Survey& survey);

/// Unweighted mean over survey questions. Throws QuestionSetMismatch naming
/// the ids missing from either matrix.
[[nodiscard]] double avg_wasserstein(const ResponseMatrix& matrix_v, const ResponseMatrix& matrix_h,
                                     const Survey& survey);

/// Throws QuestionSetMismatch unless both matrices hold every survey question.
void require_question_set(const ResponseMatrix& matrix_v, const ResponseMatrix& matrix_h, const Survey& survey);

struct CorrelationMatrix {
    std::vector<std::string> question_ids;
    /// Row-major Q x Q.
    std::vector<double> values;
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t size() const noexcept { return question_ids.size(); }
    [[nodiscard]] double at(std::size_t a, std::size_t b) const { return values[a * size() + b]; }
};

/// Pearson correlation of canonical indices over pairwise-complete cells.
/// Pairs where either column has no variance get 0 (diagonal stays 1) and a
/// warning. Throws TooFewRespondents when there are fewer than two rows.
[[nodiscard]] CorrelationMatrix correlation_matrix(const ResponseMatrix& matrix);

/// Frobenius norm of the difference. Throws ShapeMismatch.
[[nodiscard]] double frobenius_gap(const CorrelationMatrix& sigma_v, const CorrelationMatrix& sigma_h);

/// Rows with no missing cell.
[[nodiscard]] std::size_t complete_case_count(const ResponseMatrix& matrix);

/// Cronbach's alpha over complete-case rows with population variances.
/// Throws TooFewItems (Q < 2), TooFewRespondents (fewer than two complete
/// rows) and ZeroTotalVariance.
[[nodiscard]] double cronbach_alpha(const ResponseMatrix& matrix);

/// Alpha, or nullopt where cronbach_alpha would throw.
[[nodiscard]] std::optional<double> try_cronbach_alpha(const ResponseMatrix& matrix);

struct LowerBoundReport {
    std::size_t iterations = 0;
    std::size_t respondents = 0;
    double avg_wd = 0.0;
    double frobenius_gap = 0.0;
    /// Mean over iterations of the mean of the two halves' alphas; nullopt
    /// when no half had a defined alpha.
    std::optional<double> alpha_split_mean;
    /// Alpha of the whole cohort, for comparison.
    std::optional<double> alpha_full_cohort;
    /// Half-samples whose alpha was undefined.
    std::size_t undefined_alpha_halves = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const LowerBoundReport&, const LowerBoundReport&) = default;
};

/// Splits the human cohort into two random halves `iterations` times and
/// averages the metrics between halves. With an odd cohort one random
/// respondent sits out each iteration. Iteration i uses derive_seed(seed, i).
[[nodiscard]] LowerBoundReport human_lower_bound(const ResponseMatrix& matrix_h, const Survey& survey,
                                                 std::size_t iterations, std::uint64_t seed,
                                                 std::size_t workers = 1);

struct MetricsReport {
    std::vector<std::pair<std::string, double>> per_question_wd;
    double avg_wd = 0.0;
    double frobenius_gap = 0.0;
    std::optional<double> cronbach_alpha_virtual;
    std::optional<double> cronbach_alpha_human;
    /// Complete-case virtual rows (the alpha sample).
    std::size_t n_effective = 0;
    std::size_t n_effective_human = 0;
    std::size_t n_virtual = 0;
    std::size_t n_human = 0;
    std::vector<std::string> warnings;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

struct EvaluateOptions {
    bool include_human_alpha = true;
};

[[nodiscard]] MetricsReport evaluate(const ResponseMatrix& matrix_v, const ResponseMatrix& matrix_h,
                                     const Survey& survey, const EvaluateOptions& options = {});

/// A named subset of option labels of one variable, e.g. {"18-49": {"18-29", "30-49"}}.
struct LabelBand {
    std::string name;
    std::vector<std::string> labels;
};

struct GroupPredicate {
    std::string name;
    std::function<bool(const HumanRespondent&)> contains;
};

/// Either one group per option (or per band) of a variable, or an explicit
/// predicate set. Must partition the cohort.
struct Grouping {
    std::string variable_id;
    std::vector<LabelBand> bands;
    std::vector<GroupPredicate> predicates;

    [[nodiscard]] static Grouping by_variable(std::string variable_id, std::vector<LabelBand> bands = {});
    [[nodiscard]] static Grouping by_predicates(std::vector<GroupPredicate> predicates);
};

struct SubgroupReport {
    std::string group;
    std::size_t size = 0;
    MetricsReport report;

    friend bool operator==(const SubgroupReport&, const SubgroupReport&) = default;
};

/// Row i of matrix_v stands in for humans[i]. Throws EmptyGroup, or
/// InvalidArgument when the grouping is not a partition.
[[nodiscard]] std::vector<SubgroupReport> evaluate_subgroups(const ResponseMatrix& matrix_v,
                                                             const ResponseMatrix& matrix_h, const Survey& survey,
                                                             std::span<const HumanRespondent> humans,
                                                             const DemographicScheme& scheme,
                                                             const Grouping& grouping,
                                                             const EvaluateOptions& options = {});

} // namespace vpersona
