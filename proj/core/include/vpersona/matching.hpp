#pragma once

#include "vpersona/persona_model.hpp"
#include "vpersona/random.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vpersona {

struct EdgeWeightOptions {
    /// When set, likelihoods below the floor are raised to it. Off by default:
    /// the weight is the plain product of likelihoods.
    std::optional<double> epsilon_floor;
};

/// Product over scheme variables of the persona's probability of the human's
/// trait, accumulated in log space. Any zero factor gives exactly 0.
[[nodiscard]] double edge_weight(const HumanRespondent& human, const VirtualPersona& persona,
                                 const DemographicScheme& scheme, const EdgeWeightOptions& options = {});

/// Same product, returned as a log (-inf for a zero factor).
[[nodiscard]] double log_edge_weight(const HumanRespondent& human, const VirtualPersona& persona,
                                     const DemographicScheme& scheme, const EdgeWeightOptions& options = {});

/// n humans by m personas, row-major.
class WeightMatrix {
  public:
    WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> weights,
                 std::optional<std::vector<double>> log_weights = std::nullopt);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return weights_[i * cols_ + j]; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return std::span<const double>(weights_).subspan(i * cols_, cols_);
    }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
    [[nodiscard]] const std::optional<std::vector<double>>& log_weights() const noexcept { return log_weights_; }

  private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> weights_;
    std::optional<std::vector<double>> log_weights_;
};

/// Every (human, persona) pair; rows are computed independently.
[[nodiscard]] WeightMatrix weight_matrix(std::span<const HumanRespondent> humans,
                                         std::span<const VirtualPersona> personas, const DemographicScheme& scheme,
                                         const EdgeWeightOptions& options = {}, std::size_t workers = 1);

enum class MatchingMethod { greedy, max_weight, random };

[[nodiscard]] std::string_view to_string(MatchingMethod method) noexcept;
/// Accepts "greedy", "max_weight" (or "max-weight", "hungarian") and "random".
[[nodiscard]] MatchingMethod parse_matching_method(std::string_view name);

struct MatchingResult {
    MatchingMethod method = MatchingMethod::greedy;
    /// assignment[i] is the persona index of human i.
    std::vector<std::size_t> assignment;
    std::vector<double> pair_weights;
    double total_weight = 0.0;
    std::vector<std::string> warnings;

    [[nodiscard]] bool is_injective() const;
    void validate(std::size_t persona_count) const;

    friend bool operator==(const MatchingResult&, const MatchingResult&) = default;
};

/// Per-human argmax; ties go to the lowest persona index; personas may repeat.
[[nodiscard]] MatchingResult match_greedy(const WeightMatrix& matrix);

/// One-to-one assignment maximizing total weight (Hungarian algorithm on the
/// rectangular cost matrix -w, O(n^2 m)). Throws InfeasibleOneToOne if m < n.
[[nodiscard]] MatchingResult match_max_weight(const WeightMatrix& matrix);

/// Each human gets an independent uniformly random persona.
[[nodiscard]] MatchingResult match_random(const WeightMatrix& matrix, Rng& rng);

[[nodiscard]] MatchingResult match(const WeightMatrix& matrix, MatchingMethod method, Rng& rng);

/// A persona carrying the traits of the human it stands in for.
struct ConditionedPersona {
    std::string respondent_id;
    VirtualPersona persona;

    friend bool operator==(const ConditionedPersona&, const ConditionedPersona&) = default;
};

/// One conditioned persona per human, in human order. Backstories are
/// duplicated when the assignment reuses a persona.
[[nodiscard]] std::vector<ConditionedPersona> assign_traits(const MatchingResult& result,
                                                            std::span<const HumanRespondent> humans,
                                                            std::span<const VirtualPersona> personas);

} // namespace vpersona
