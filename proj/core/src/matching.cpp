#include "vpersona/matching.hpp"

#include "vpersona/error.hpp"
#include "vpersona/parallel.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace vpersona {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sum_of(const std::vector<double>& values) {
    double total = 0.0;
    for (double v : values) {
        total += v;
    }
    return total;
}

void warn_zero_rows(const WeightMatrix& matrix, MatchingResult& result) {
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        bool all_zero = true;
        for (double w : matrix.row(i)) {
            all_zero = all_zero && w == 0.0;
        }
        if (all_zero) {
            result.warnings.push_back("human " + std::to_string(i) +
                                      ": every edge weight is zero; assignment is arbitrary");
        }
    }
}

MatchingResult finish(const WeightMatrix& matrix, MatchingMethod method, std::vector<std::size_t> assignment) {
    MatchingResult result;
    result.method = method;
    result.assignment = std::move(assignment);
    result.pair_weights.reserve(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        result.pair_weights.push_back(matrix.at(i, result.assignment[i]));
    }
    result.total_weight = sum_of(result.pair_weights);
    warn_zero_rows(matrix, result);
    return result;
}

} // namespace

double log_edge_weight(const HumanRespondent& human, const VirtualPersona& persona, const DemographicScheme& scheme,
                       const EdgeWeightOptions& options) {
    double total = 0.0;
    for (const auto& variable : scheme.variables) {
        const TraitValue* trait = find_trait(human.traits, variable.id);
        if (trait == nullptr) {
            fail(ErrorCode::UnknownVariable, "human '" + human.id + "' has no trait for '" + variable.id + "'");
        }
        double p = trait_likelihood(persona, *trait);
        if (options.epsilon_floor) {
            p = std::max(p, *options.epsilon_floor);
        }
        if (p <= 0.0) {
            return kNegInf;
        }
        total += std::log(p);
    }
    return total;
}

double edge_weight(const HumanRespondent& human, const VirtualPersona& persona, const DemographicScheme& scheme,
                   const EdgeWeightOptions& options) {
    const double log_w = log_edge_weight(human, persona, scheme, options);
    if (log_w == kNegInf) {
        return 0.0;
    }
    return std::min(1.0, std::exp(log_w));
}

WeightMatrix::WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> weights,
                           std::optional<std::vector<double>> log_weights)
    : rows_(rows), cols_(cols), weights_(std::move(weights)), log_weights_(std::move(log_weights)) {
    require(rows_ >= 1 && cols_ >= 1, ErrorCode::InvalidArgument, "weight matrix needs at least one row and column");
    require(weights_.size() == rows_ * cols_, ErrorCode::ShapeMismatch, "weight matrix size does not match shape");
    for (double w : weights_) {
        require(w >= 0.0 && w <= 1.0, ErrorCode::InvalidArgument, "edge weights must lie in [0, 1]");
    }
    if (log_weights_) {
        require(log_weights_->size() == weights_.size(), ErrorCode::ShapeMismatch,
                "log weight matrix size does not match shape");
    }
}

WeightMatrix weight_matrix(std::span<const HumanRespondent> humans, std::span<const VirtualPersona> personas,
                           const DemographicScheme& scheme, const EdgeWeightOptions& options, std::size_t workers) {
    require(!humans.empty(), ErrorCode::InvalidArgument, "weight_matrix: no humans");
    require(!personas.empty(), ErrorCode::InvalidArgument, "weight_matrix: no personas");
    const std::size_t n = humans.size();
    const std::size_t m = personas.size();
    std::vector<double> weights(n * m);
    std::vector<double> logs(n * m);
    parallel_for(n, workers, [&](std::size_t i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double lw = log_edge_weight(humans[i], personas[j], scheme, options);
            logs[i * m + j] = lw;
            weights[i * m + j] = lw == kNegInf ? 0.0 : std::min(1.0, std::exp(lw));
        }
    });
    return WeightMatrix(n, m, std::move(weights), std::move(logs));
}

std::string_view to_string(MatchingMethod method) noexcept {
    switch (method) {
    case MatchingMethod::greedy: return "greedy";
    case MatchingMethod::max_weight: return "max_weight";
    case MatchingMethod::random: return "random";
    }
    return "?";
}

MatchingMethod parse_matching_method(std::string_view name) {
    if (name == "greedy") return MatchingMethod::greedy;
    if (name == "max_weight" || name == "max-weight" || name == "hungarian") return MatchingMethod::max_weight;
    if (name == "random") return MatchingMethod::random;
    fail(ErrorCode::ConfigError, "unknown matching method '" + std::string(name) + "'");
}

bool MatchingResult::is_injective() const {
    return std::set<std::size_t>(assignment.begin(), assignment.end()).size() == assignment.size();
}

void MatchingResult::validate(std::size_t persona_count) const {
    require(pair_weights.size() == assignment.size(), ErrorCode::ShapeMismatch,
            "matching: pair weights and assignment differ in length");
    for (std::size_t j : assignment) {
        require(j < persona_count, ErrorCode::InvalidArgument, "matching: persona index out of range");
    }
    if (method == MatchingMethod::max_weight) {
        require(is_injective(), ErrorCode::InvalidArgument, "max-weight matching must be one-to-one");
    }
    require(std::abs(total_weight - sum_of(pair_weights)) <= 1e-9, ErrorCode::InvalidArgument,
            "matching: total weight is not the sum of pair weights");
}

MatchingResult match_greedy(const WeightMatrix& matrix) {
    std::vector<std::size_t> assignment(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        const auto row = matrix.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < row.size(); ++j) {
            if (row[j] > row[best]) {
                best = j;
            }
        }
        assignment[i] = best;
    }
    return finish(matrix, MatchingMethod::greedy, std::move(assignment));
}

MatchingResult match_max_weight(const WeightMatrix& matrix) {
    const std::size_t n = matrix.rows();
    const std::size_t m = matrix.cols();
    if (m < n) {
        fail(ErrorCode::InfeasibleOneToOne, "one-to-one matching needs at least as many personas (" +
                                                std::to_string(m) + ") as humans (" + std::to_string(n) + ")");
    }
    // Shortest augmenting path Hungarian method with row/column potentials,
    // 1-based with column 0 as the virtual source.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    auto cost = [&](std::size_t i, std::size_t j) { return -matrix.at(i - 1, j - 1); };
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) {
                    continue;
                }
                const double reduced = cost(i0, j) - u[i0] - v[j];
                if (reduced < minv[j]) {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) {
            assignment[p[j] - 1] = j - 1;
        }
    }
    return finish(matrix, MatchingMethod::max_weight, std::move(assignment));
}

MatchingResult match_random(const WeightMatrix& matrix, Rng& rng) {
    std::vector<std::size_t> assignment(matrix.rows());
    for (auto& j : assignment) {
        j = uniform_index(rng, matrix.cols());
    }
    MatchingResult result = finish(matrix, MatchingMethod::random, std::move(assignment));
    return result;
}

MatchingResult match(const WeightMatrix& matrix, MatchingMethod method, Rng& rng) {
    switch (method) {
    case MatchingMethod::greedy: return match_greedy(matrix);
    case MatchingMethod::max_weight: return match_max_weight(matrix);
    case MatchingMethod::random: return match_random(matrix, rng);
    }
    fail(ErrorCode::InvalidArgument, "unknown matching method");
}

std::vector<ConditionedPersona> assign_traits(const MatchingResult& result, std::span<const HumanRespondent> humans,
                                              std::span<const VirtualPersona> personas) {
    require(result.assignment.size() == humans.size(), ErrorCode::ShapeMismatch,
            "assign_traits: assignment does not cover every human");
    std::vector<ConditionedPersona> out;
    out.reserve(humans.size());
    for (std::size_t i = 0; i < humans.size(); ++i) {
        const std::size_t j = result.assignment[i];
        require(j < personas.size(), ErrorCode::InvalidArgument, "assign_traits: persona index out of range");
        ConditionedPersona conditioned{humans[i].id, personas[j]};
        conditioned.persona.assigned_traits = humans[i].traits;
        out.push_back(std::move(conditioned));
    }
    return out;
}

} // namespace vpersona
