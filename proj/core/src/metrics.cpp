#include "vpersona/metrics.hpp"

#include "vpersona/error.hpp"
#include "vpersona/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vpersona {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        out += (out.empty() ? "" : ", ") + item;
    }
    return out;
}

double population_variance(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(values.size());
}

std::vector<std::size_t> complete_rows(const ResponseMatrix& matrix) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        bool complete = true;
        for (std::size_t c = 0; c < matrix.cols() && complete; ++c) {
            complete = !matrix.at(r, c).is_missing();
        }
        if (complete) rows.push_back(r);
    }
    return rows;
}

} // namespace

std::vector<double> answer_distribution(const ResponseMatrix& matrix, std::string_view question_id,
                                        std::size_t option_count) {
    const auto col = matrix.column_index(question_id);
    require(col.has_value(), ErrorCode::QuestionSetMismatch,
            "response matrix has no column '" + std::string(question_id) + "'");
    std::vector<std::size_t> counts(option_count, 0);
    std::size_t present = 0;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const Answer a = matrix.at(r, *col);
        if (a.is_missing()) continue;
        require(a.index() < option_count, ErrorCode::InvalidArgument,
                "answer index out of range in column '" + std::string(question_id) + "'");
        ++counts[a.index()];
        ++present;
    }
    require(present > 0, ErrorCode::EmptyColumn, "column '" + std::string(question_id) + "' has no answers");
    std::vector<double> probs(option_count);
    for (std::size_t k = 0; k < option_count; ++k) {
        probs[k] = static_cast<double>(counts[k]) / static_cast<double>(present);
    }
    return probs;
}

double wasserstein_1d(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), ErrorCode::LengthMismatch,
            "wasserstein_1d: distributions have " + std::to_string(p.size()) + " and " + std::to_string(q.size()) +
                " options");
    require(!p.empty(), ErrorCode::InvalidArgument, "wasserstein_1d: empty distributions");
    double sum_p = 0.0, sum_q = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        require(p[i] >= 0.0 && q[i] >= 0.0, ErrorCode::InvalidArgument, "wasserstein_1d: negative probability");
        sum_p += p[i];
        sum_q += q[i];
    }
    require(std::abs(sum_p - 1.0) <= 1e-9 && std::abs(sum_q - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            "wasserstein_1d: distributions must sum to 1");
    double cdf_p = 0.0, cdf_q = 0.0, distance = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        cdf_p += p[i];
        cdf_q += q[i];
        distance += std::abs(cdf_p - cdf_q);
    }
    return distance;
}

double question_wasserstein(const SurveyQuestion& question, std::span<const double> p, std::span<const double> q) {
    require(question.is_ordinal(), ErrorCode::NotOrdinal,
            "question '" + question.id + "' is nominal; Wasserstein distance needs an ordered scale");
    return wasserstein_1d(p, q);
}

void require_question_set(const ResponseMatrix& matrix_v, const ResponseMatrix& matrix_h, const Survey& survey) {
    std::vector<std::string> missing;
    for (const auto& q : survey.questions) {
        if (!matrix_v.column_index(q.id)) missing.push_back(q.id + " (virtual)");
        if (!matrix_h.column_index(q.id)) missing.push_back(q.id + " (human)");
    }
    if (!missing.empty()) {
        fail(ErrorCode::QuestionSetMismatch, "question set mismatch; missing: " + join(missing));
    }
}

std::vector<std::pair<std::string, double>> per_question_wasserstein(const ResponseMatrix& matrix_v,
                                                                     const ResponseMatrix& matrix_h,
                                                                     const Survey& survey) {
    require_question_set(matrix_v, matrix_h, survey);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(survey.questions.size());
    for (const auto& q : survey.questions) {
        const auto p = answer_distribution(matrix_v, q.id, q.options.size());
        const auto h = answer_distribution(matrix_h, q.id, q.options.size());
        out.emplace_back(q.id, question_wasserstein(q, p, h));
    }
    return out;
}

double avg_wasserstein(const ResponseMatrix& matrix_v, const ResponseMatrix& matrix_h, const Survey& survey) {
    require(!survey.questions.empty(), ErrorCode::InvalidArgument, "avg_wasserstein: survey has no questions");
    double total = 0.0;
    const auto per_question = per_question_wasserstein(matrix_v, matrix_h, survey);
    for (const auto& [id, wd] : per_question) {
        total += wd;
    }
    return total / static_cast<double>(per_question.size());
}

CorrelationMatrix correlation_matrix(const ResponseMatrix& matrix) {
    require(matrix.rows() >= 2, ErrorCode::TooFewRespondents,
            "correlation needs at least 2 respondents, got " + std::to_string(matrix.rows()));
    const std::size_t q = matrix.cols();
    CorrelationMatrix out;
    out.question_ids = matrix.question_ids();
    out.values.assign(q * q, 0.0);
    for (std::size_t a = 0; a < q; ++a) {
        out.values[a * q + a] = 1.0;
        for (std::size_t b = a + 1; b < q; ++b) {
            std::vector<double> xs, ys;
            for (std::size_t r = 0; r < matrix.rows(); ++r) {
                const Answer x = matrix.at(r, a);
                const Answer y = matrix.at(r, b);
                if (x.is_missing() || y.is_missing()) continue;
                xs.push_back(static_cast<double>(x.index()));
                ys.push_back(static_cast<double>(y.index()));
            }
            double rho = 0.0;
            if (!xs.empty()) {
                double mx = 0.0, my = 0.0;
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    mx += xs[i];
                    my += ys[i];
                }
                mx /= static_cast<double>(xs.size());
                my /= static_cast<double>(ys.size());
                double sxy = 0.0, sxx = 0.0, syy = 0.0;
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    sxy += (xs[i] - mx) * (ys[i] - my);
                    sxx += (xs[i] - mx) * (xs[i] - mx);
                    syy += (ys[i] - my) * (ys[i] - my);
                }
                if (sxx > 0.0 && syy > 0.0) {
                    rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
                } else {
                    out.warnings.push_back("no variance in pair (" + out.question_ids[a] + ", " +
                                           out.question_ids[b] + "); correlation set to 0");
                }
            } else {
                out.warnings.push_back("no complete pairs for (" + out.question_ids[a] + ", " +
                                       out.question_ids[b] + "); correlation set to 0");
            }
            out.values[a * q + b] = rho;
            out.values[b * q + a] = rho;
        }
    }
    return out;
}

double frobenius_gap(const CorrelationMatrix& sigma_v, const CorrelationMatrix& sigma_h) {
    require(sigma_v.values.size() == sigma_h.values.size() && sigma_v.size() == sigma_h.size(),
            ErrorCode::ShapeMismatch,
            "frobenius_gap: shapes " + std::to_string(sigma_v.size()) + "x" + std::to_string(sigma_v.size()) +
                " and " + std::to_string(sigma_h.size()) + "x" + std::to_string(sigma_h.size()));
    double ss = 0.0;
    for (std::size_t i = 0; i < sigma_v.values.size(); ++i) {
        const double d = sigma_v.values[i] - sigma_h.values[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

std::size_t complete_case_count(const ResponseMatrix& matrix) {
    return complete_rows(matrix).size();
}

double cronbach_alpha(const ResponseMatrix& matrix) {
    const std::size_t q = matrix.cols();
    require(q >= 2, ErrorCode::TooFewItems, "Cronbach's alpha needs at least 2 items, got " + std::to_string(q));
    const auto rows = complete_rows(matrix);
    require(rows.size() >= 2, ErrorCode::TooFewRespondents,
            "Cronbach's alpha needs at least 2 complete rows, got " + std::to_string(rows.size()));
    double item_variance = 0.0;
    std::vector<double> totals(rows.size(), 0.0);
    for (std::size_t c = 0; c < q; ++c) {
        std::vector<double> item;
        item.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double v = static_cast<double>(matrix.at(rows[i], c).index());
            item.push_back(v);
            totals[i] += v;
        }
        item_variance += population_variance(item);
    }
    const double total_variance = population_variance(totals);
    require(total_variance > 0.0, ErrorCode::ZeroTotalVariance, "total score has zero variance");
    const double qd = static_cast<double>(q);
    return qd / (qd - 1.0) * (1.0 - item_variance / total_variance);
}

std::optional<double> try_cronbach_alpha(const ResponseMatrix& matrix) {
    try {
        return cronbach_alpha(matrix);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroTotalVariance || e.code() == ErrorCode::TooFewItems ||
            e.code() == ErrorCode::TooFewRespondents) {
            return std::nullopt;
        }
        throw;
    }
}

LowerBoundReport human_lower_bound(const ResponseMatrix& matrix_h, const Survey& survey, std::size_t iterations,
                                   std::uint64_t seed, std::size_t workers) {
    require(iterations >= 1, ErrorCode::InvalidArgument, "human_lower_bound: iterations must be positive");
    require(matrix_h.rows() >= 4, ErrorCode::TooFewRespondents,
            "human_lower_bound needs at least 4 respondents, got " + std::to_string(matrix_h.rows()));
    require_question_set(matrix_h, matrix_h, survey);
    const ResponseMatrix h = matrix_h.select_columns(survey.question_ids());
    const std::size_t half = h.rows() / 2;

    struct Iteration {
        double wd = 0.0;
        double fro = 0.0;
        std::optional<double> alpha_a, alpha_b;
    };
    std::vector<Iteration> results(iterations);
    parallel_for(iterations, workers, [&](std::size_t it) {
        Rng rng(derive_seed(seed, it));
        const auto order = random_permutation(h.rows(), rng);
        // With an odd cohort the last permuted respondent sits out.
        const std::vector<std::size_t> rows_a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
        const std::vector<std::size_t> rows_b(order.begin() + static_cast<std::ptrdiff_t>(half),
                                              order.begin() + static_cast<std::ptrdiff_t>(2 * half));
        const ResponseMatrix a = h.select_rows(rows_a);
        const ResponseMatrix b = h.select_rows(rows_b);
        results[it].wd = avg_wasserstein(a, b, survey);
        results[it].fro = frobenius_gap(correlation_matrix(a), correlation_matrix(b));
        results[it].alpha_a = try_cronbach_alpha(a);
        results[it].alpha_b = try_cronbach_alpha(b);
    });

    LowerBoundReport report;
    report.iterations = iterations;
    report.respondents = h.rows();
    report.seed = seed;
    double alpha_sum = 0.0;
    std::size_t alpha_count = 0;
    for (const auto& r : results) {
        report.avg_wd += r.wd;
        report.frobenius_gap += r.fro;
        double iteration_sum = 0.0;
        std::size_t defined = 0;
        for (const auto& alpha : {r.alpha_a, r.alpha_b}) {
            if (alpha) {
                iteration_sum += *alpha;
                ++defined;
            } else {
                ++report.undefined_alpha_halves;
            }
        }
        if (defined > 0) {
            alpha_sum += iteration_sum / static_cast<double>(defined);
            ++alpha_count;
        }
    }
    report.avg_wd /= static_cast<double>(iterations);
    report.frobenius_gap /= static_cast<double>(iterations);
    if (alpha_count > 0) {
        report.alpha_split_mean = alpha_sum / static_cast<double>(alpha_count);
    }
    report.alpha_full_cohort = try_cronbach_alpha(h);
    return report;
}

MetricsReport evaluate(const ResponseMatrix& matrix_v, const ResponseMatrix& matrix_h, const Survey& survey,
                       const EvaluateOptions& options) {
    require_question_set(matrix_v, matrix_h, survey);
    const auto ids = survey.question_ids();
    const ResponseMatrix v = matrix_v.select_columns(ids);
    const ResponseMatrix h = matrix_h.select_columns(ids);

    MetricsReport report;
    report.per_question_wd = per_question_wasserstein(v, h, survey);
    for (const auto& [id, wd] : report.per_question_wd) {
        report.avg_wd += wd;
    }
    report.avg_wd /= static_cast<double>(report.per_question_wd.size());

    const auto sigma_v = correlation_matrix(v);
    const auto sigma_h = correlation_matrix(h);
    report.frobenius_gap = frobenius_gap(sigma_v, sigma_h);
    for (const auto& w : sigma_v.warnings) report.warnings.push_back("virtual: " + w);
    for (const auto& w : sigma_h.warnings) report.warnings.push_back("human: " + w);

    report.cronbach_alpha_virtual = try_cronbach_alpha(v);
    if (!report.cronbach_alpha_virtual) report.warnings.push_back("virtual: Cronbach's alpha undefined");
    if (options.include_human_alpha) {
        report.cronbach_alpha_human = try_cronbach_alpha(h);
        if (!report.cronbach_alpha_human) report.warnings.push_back("human: Cronbach's alpha undefined");
    }
    report.n_effective = complete_case_count(v);
    report.n_effective_human = complete_case_count(h);
    report.n_virtual = v.rows();
    report.n_human = h.rows();
    return report;
}

Grouping Grouping::by_variable(std::string variable_id, std::vector<LabelBand> bands) {
    Grouping g;
    g.variable_id = std::move(variable_id);
    g.bands = std::move(bands);
    return g;
}

Grouping Grouping::by_predicates(std::vector<GroupPredicate> predicates) {
    Grouping g;
    g.predicates = std::move(predicates);
    return g;
}

std::vector<SubgroupReport> evaluate_subgroups(const ResponseMatrix& matrix_v, const ResponseMatrix& matrix_h,
                                               const Survey& survey, std::span<const HumanRespondent> humans,
                                               const DemographicScheme& scheme, const Grouping& grouping,
                                               const EvaluateOptions& options) {
    require(matrix_v.rows() == humans.size() && matrix_h.rows() == humans.size(), ErrorCode::ShapeMismatch,
            "evaluate_subgroups: matrices must have one row per human");

    std::vector<GroupPredicate> groups = grouping.predicates;
    if (!grouping.variable_id.empty()) {
        const auto& variable = scheme.variable(grouping.variable_id);
        const std::string vid = variable.id;
        if (grouping.bands.empty()) {
            for (std::size_t k = 0; k < variable.option_count(); ++k) {
                groups.push_back({variable.options[k], [vid, k](const HumanRespondent& h) {
                                      const auto* t = find_trait(h.traits, vid);
                                      return t != nullptr && t->option_index == k;
                                  }});
            }
        } else {
            std::multiset<std::size_t> covered;
            for (const auto& band : grouping.bands) {
                std::set<std::size_t> members;
                for (const auto& label : band.labels) {
                    const auto k = variable.find_option(label);
                    if (!k) {
                        fail(ErrorCode::UnknownOptionLabel,
                             "variable '" + vid + "' has no option '" + label + "' (band '" + band.name + "')");
                    }
                    members.insert(*k);
                    covered.insert(*k);
                }
                groups.push_back({band.name, [vid, members](const HumanRespondent& h) {
                                      const auto* t = find_trait(h.traits, vid);
                                      return t != nullptr && members.count(t->option_index) > 0;
                                  }});
            }
            for (std::size_t k = 0; k < variable.option_count(); ++k) {
                require(covered.count(k) == 1, ErrorCode::InvalidArgument,
                        "bands of '" + vid + "' must cover option '" + variable.options[k] + "' exactly once");
            }
        }
    }
    require(!groups.empty(), ErrorCode::InvalidArgument, "evaluate_subgroups: no groups defined");

    std::vector<std::vector<std::size_t>> members(groups.size());
    for (std::size_t i = 0; i < humans.size(); ++i) {
        std::size_t hits = 0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (groups[g].contains(humans[i])) {
                members[g].push_back(i);
                ++hits;
            }
        }
        require(hits == 1, ErrorCode::InvalidArgument,
                "grouping is not a partition: human '" + humans[i].id + "' falls in " + std::to_string(hits) +
                    " groups");
    }

    std::vector<SubgroupReport> out;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        require(!members[g].empty(), ErrorCode::EmptyGroup, "group '" + groups[g].name + "' has no respondents");
        out.push_back({groups[g].name, members[g].size(),
                       evaluate(matrix_v.select_rows(members[g]), matrix_h.select_rows(members[g]), survey, options)});
    }
    return out;
}

} // namespace vpersona
