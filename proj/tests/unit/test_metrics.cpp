#include "oracles/transport_oracle.hpp"
#include "support/test_support.hpp"
#include "vpersona/io.hpp"
#include "vpersona/metrics.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <random>

using namespace vpersona;
using vpersona::testing::likert;
using vpersona::testing::matrix_of;
using vpersona::testing::random_distribution;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::InvalidArgument;
}

Survey survey_of(std::size_t q, std::size_t m) {
    Survey s{"s", {}};
    for (std::size_t c = 0; c < q; ++c) s.questions.push_back(likert("Q" + std::to_string(c + 1), m));
    return s;
}

ResponseMatrix random_matrix(std::mt19937_64& gen, std::size_t n, std::size_t q, std::size_t m,
                             double missing_rate = 0.0) {
    std::vector<std::vector<int>> rows(n, std::vector<int>(q));
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& row : rows)
        for (auto& x : row) x = u(gen) < missing_rate ? -1 : static_cast<int>(gen() % m);
    return matrix_of(rows);
}

} // namespace

TEST(AnswerDistribution, Examples) {
    const auto m = matrix_of({{0}, {0}, {1}, {-1}});
    const auto d = answer_distribution(m, "Q1", 3);
    EXPECT_DOUBLE_EQ(d[0], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(d[1], 1.0 / 3.0);
    EXPECT_EQ(d[2], 0.0);
    EXPECT_EQ(code_of([] { (void)answer_distribution(matrix_of({{-1}, {-1}}), "Q1", 2); }), ErrorCode::EmptyColumn);
    EXPECT_EQ(answer_distribution(matrix_of({{0}, {1}, {2}}), "Q1", 3),
              (std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}));
}

TEST(Wasserstein, WorkedExamplesMatchTransportOracles) {
    const std::vector<double> p{0.2, 0.2, 0.2, 0.2, 0.2};
    EXPECT_EQ(wasserstein_1d(p, p), 0.0);
    const std::vector<double> a{1, 0, 0, 0, 0}, b{0, 0, 0, 0, 1};
    EXPECT_EQ(wasserstein_1d(a, b), 4.0);
    EXPECT_EQ(oracle::unit_atom_transport(a, b, 1), 4.0);
    EXPECT_EQ(oracle::min_cost_transport(a, b), 4.0);
    const std::vector<double> c{0.5, 0.5, 0, 0, 0}, d{0, 0, 0, 0.5, 0.5};
    EXPECT_EQ(wasserstein_1d(c, d), 3.0);
    EXPECT_EQ(oracle::unit_atom_transport(c, d, 2), 3.0);
    EXPECT_EQ(oracle::min_cost_transport(c, d), 3.0);
}

TEST(Wasserstein, AgreesWithMinCostTransport) {
    std::mt19937_64 gen(41);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 2 + gen() % 6;
        const auto p = random_distribution(gen, m), q = random_distribution(gen, m);
        EXPECT_NEAR(wasserstein_1d(p, q), oracle::min_cost_transport(p, q), 1e-9);
    }
}

TEST(Wasserstein, AgreesWithUnitAtomsOnDyadicMasses) {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 100; ++trial) {
        const int D = 6;
        std::vector<double> p(4, 0.0), q(4, 0.0);
        for (int a = 0; a < D; ++a) {
            p[gen() % 4] += 1.0 / D;
            q[gen() % 4] += 1.0 / D;
        }
        EXPECT_NEAR(wasserstein_1d(p, q), oracle::unit_atom_transport(p, q, D), 1e-12);
    }
}

TEST(Wasserstein, PropertyMetricAxioms) {
    std::mt19937_64 gen(43);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto p = random_distribution(gen, 5), q = random_distribution(gen, 5), r = random_distribution(gen, 5);
        const double pq = wasserstein_1d(p, q);
        EXPECT_GE(pq, 0.0);
        EXPECT_LE(pq, 4.0 + 1e-9);
        EXPECT_NEAR(wasserstein_1d(p, p), 0.0, 1e-9);
        EXPECT_NEAR(pq, wasserstein_1d(q, p), 1e-9);
        EXPECT_LE(wasserstein_1d(p, r), pq + wasserstein_1d(q, r) + 1e-9);
        if (p != q) EXPECT_GT(pq, 0.0);
    }
}

TEST(Wasserstein, Guards) {
    const std::vector<double> a{0.5, 0.5}, b{1, 0, 0};
    EXPECT_EQ(code_of([&] { (void)wasserstein_1d(a, b); }), ErrorCode::LengthMismatch);
    auto nominal = likert("N", 2);
    nominal.scale = QuestionScale::nominal_shufflable;
    EXPECT_EQ(code_of([&] { (void)question_wasserstein(nominal, a, a); }), ErrorCode::NotOrdinal);
}

TEST(AvgWasserstein, MeanOverQuestions) {
    const auto s = survey_of(2, 5);
    const auto v = matrix_of({{0, 0}, {1, 0}});
    const auto h = matrix_of({{1, 3}, {2, 3}});
    EXPECT_DOUBLE_EQ(avg_wasserstein(v, h, s), 2.0);
    EXPECT_EQ(avg_wasserstein(v, v, s), 0.0);
}

TEST(AvgWasserstein, PerQuestionMatchesTransportOracle) {
    std::mt19937_64 gen(44);
    const auto s = survey_of(4, 5);
    const auto v = random_matrix(gen, 40, 4, 5, 0.1), h = random_matrix(gen, 30, 4, 5, 0.1);
    const auto per = per_question_wasserstein(v, h, s);
    ASSERT_EQ(per.size(), 4u);
    for (const auto& [qid, wd] : per) {
        EXPECT_NEAR(wd, oracle::min_cost_transport(answer_distribution(v, qid, 5), answer_distribution(h, qid, 5)),
                    1e-9);
    }
}

TEST(AvgWasserstein, QuestionSetMismatchNamesIds) {
    const auto s = survey_of(3, 3);
    const auto v = matrix_of({{0, 1, 2}});
    const auto h = matrix_of({{0, 1}});
    try {
        (void)avg_wasserstein(v, h, s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::QuestionSetMismatch);
        EXPECT_NE(std::string(e.what()).find("Q3"), std::string::npos);
    }
}

TEST(Correlation, PerfectAndReversed) {
    const auto same = correlation_matrix(matrix_of({{0, 0, 2}, {1, 1, 1}, {2, 2, 0}, {1, 1, 1}}));
    EXPECT_NEAR(same.at(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(same.at(0, 2), -1.0, 1e-12);
    EXPECT_EQ(same.at(1, 1), 1.0);
}

TEST(Correlation, IndependentColumnsNearZero) {
    std::mt19937_64 gen(45);
    const auto c = correlation_matrix(random_matrix(gen, 10000, 2, 5));
    EXPECT_LT(std::abs(c.at(0, 1)), 0.05);
}

TEST(Correlation, ZeroVarianceWarnsAndGuards) {
    const auto c = correlation_matrix(matrix_of({{0, 1}, {0, 2}, {0, 0}}));
    EXPECT_EQ(c.at(0, 1), 0.0);
    EXPECT_EQ(c.at(0, 0), 1.0);
    EXPECT_FALSE(c.warnings.empty());
    EXPECT_EQ(code_of([] { (void)correlation_matrix(matrix_of({{0, 1}})); }), ErrorCode::TooFewRespondents);
}

TEST(Correlation, PairwiseCompleteCells) {
    // Rows with a missing cell only drop out of the pairs they touch.
    const auto c = correlation_matrix(matrix_of({{0, 0, -1}, {1, 1, 2}, {2, 2, 0}, {-1, 0, 1}}));
    EXPECT_NEAR(c.at(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(c.at(0, 2), -1.0, 1e-12);
}

TEST(Correlation, PropertySymmetricUnitDiagonal) {
    std::mt19937_64 gen(46);
    for (int trial = 0; trial < 100; ++trial) {
        const auto c = correlation_matrix(random_matrix(gen, 30, 5, 4, 0.1));
        for (std::size_t a = 0; a < 5; ++a) {
            EXPECT_EQ(c.at(a, a), 1.0);
            for (std::size_t b = 0; b < 5; ++b) {
                EXPECT_EQ(c.at(a, b), c.at(b, a));
                EXPECT_LE(std::abs(c.at(a, b)), 1.0 + 1e-12);
            }
        }
    }
}

TEST(Frobenius, Examples) {
    CorrelationMatrix identity{{"a", "b"}, {1, 0, 0, 1}, {}};
    CorrelationMatrix ones{{"a", "b"}, {1, 1, 1, 1}, {}};
    EXPECT_EQ(frobenius_gap(identity, identity), 0.0);
    EXPECT_DOUBLE_EQ(frobenius_gap(identity, ones), std::sqrt(2.0));
    CorrelationMatrix three{{"a", "b", "c"}, std::vector<double>(9, 1.0), {}};
    EXPECT_EQ(code_of([&] { (void)frobenius_gap(identity, three); }), ErrorCode::ShapeMismatch);
}

TEST(Frobenius, PropertySymmetricAndTransposeInvariant) {
    std::mt19937_64 gen(47);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = correlation_matrix(random_matrix(gen, 20, 4, 5));
        const auto b = correlation_matrix(random_matrix(gen, 20, 4, 5));
        EXPECT_EQ(frobenius_gap(a, b), frobenius_gap(b, a));
        EXPECT_EQ(frobenius_gap(a, a), 0.0);
        auto at = a, bt = b;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                at.values[i * 4 + j] = a.at(j, i);
                bt.values[i * 4 + j] = b.at(j, i);
            }
        EXPECT_NEAR(frobenius_gap(at, bt), frobenius_gap(a, b), 1e-15);
    }
}

TEST(Alpha, PerfectlyCorrelatedEqualVariance) {
    EXPECT_NEAR(cronbach_alpha(matrix_of({{1, 1}, {2, 2}, {3, 3}})), 1.0, 1e-9);
}

TEST(Alpha, IndependentItemsNearZero) {
    std::mt19937_64 gen(48);
    EXPECT_LT(std::abs(cronbach_alpha(random_matrix(gen, 10000, 5, 5))), 0.1);
}

TEST(Alpha, Guards) {
    EXPECT_EQ(code_of([] { (void)cronbach_alpha(matrix_of({{1, 2}, {1, 2}, {1, 2}})); }), ErrorCode::ZeroTotalVariance);
    EXPECT_EQ(code_of([] { (void)cronbach_alpha(matrix_of({{1}, {2}})); }), ErrorCode::TooFewItems);
    EXPECT_EQ(code_of([] { (void)cronbach_alpha(matrix_of({{1, 2}, {-1, 2}})); }), ErrorCode::TooFewRespondents);
    EXPECT_FALSE(try_cronbach_alpha(matrix_of({{1, 2}, {1, 2}})));
}

TEST(Alpha, CompleteCaseOnly) {
    const auto base = matrix_of({{0, 0}, {1, 2}, {2, 1}});
    const auto with_missing = matrix_of({{0, 0}, {1, 2}, {2, 1}, {-1, 3}, {2, -1}});
    EXPECT_EQ(cronbach_alpha(base), cronbach_alpha(with_missing));
    EXPECT_EQ(complete_case_count(with_missing), 3u);
}

TEST(Alpha, PropertyAtMostOne) {
    std::mt19937_64 gen(49);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = random_matrix(gen, 3 + gen() % 20, 2 + gen() % 5, 2 + gen() % 5, 0.05);
        if (const auto a = try_cronbach_alpha(m)) EXPECT_LE(*a, 1.0 + 1e-9);
    }
}

TEST(LowerBound, IdenticalRespondentsGiveZeroDistances) {
    std::vector<std::vector<int>> rows(200, std::vector<int>{0, 1, 2, 3, 4, 0, 1, 2});
    const auto m = matrix_of(rows);
    const auto r = human_lower_bound(m, survey_of(8, 5), 100, 7);
    EXPECT_EQ(r.avg_wd, 0.0);
    EXPECT_EQ(r.frobenius_gap, 0.0);
    EXPECT_FALSE(r.alpha_split_mean);
    EXPECT_FALSE(r.alpha_full_cohort);
    EXPECT_EQ(r.undefined_alpha_halves, 200u);
    EXPECT_EQ(r.iterations, 100u);
}

TEST(LowerBound, ReproducibleAndParallelSafe) {
    std::mt19937_64 gen(50);
    const auto m = random_matrix(gen, 41, 4, 5, 0.05);
    const auto s = survey_of(4, 5);
    const auto a = human_lower_bound(m, s, 1, 3);
    EXPECT_EQ(a, human_lower_bound(m, s, 1, 3));
    EXPECT_EQ(human_lower_bound(m, s, 20, 3, 1), human_lower_bound(m, s, 20, 3, 4));
    EXPECT_NE(human_lower_bound(m, s, 20, 3).avg_wd, human_lower_bound(m, s, 20, 4).avg_wd);
    EXPECT_EQ(code_of([&] { (void)human_lower_bound(matrix_of({{0}, {1}, {2}}), survey_of(1, 3), 5, 1); }),
              ErrorCode::TooFewRespondents);
}

TEST(Evaluate, SelfComparison) {
    std::mt19937_64 gen(51);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_matrix(gen, 25, 4, 4, 0.1);
        const auto r = evaluate(m, m, survey_of(4, 4));
        EXPECT_EQ(r.avg_wd, 0.0);
        EXPECT_EQ(r.frobenius_gap, 0.0);
        EXPECT_EQ(r.cronbach_alpha_virtual, r.cronbach_alpha_human);
        for (const auto& [q, wd] : r.per_question_wd) EXPECT_EQ(wd, 0.0);
    }
}

TEST(Evaluate, EffectiveCountsReflectMissing) {
    const auto v = matrix_of({{0, 1}, {1, -1}, {2, 2}, {-1, 0}});
    const auto h = matrix_of({{0, 1}, {1, 2}, {2, 0}});
    const auto r = evaluate(v, h, survey_of(2, 3));
    EXPECT_EQ(r.n_virtual, 4u);
    EXPECT_EQ(r.n_effective, 2u);
    EXPECT_EQ(r.n_human, 3u);
    EXPECT_EQ(r.n_effective_human, 3u);
}

TEST(Evaluate, CheckedInFixtureMatchesOracle) {
    const auto dir = vpersona::testing::fixture_dir() / "evaluate";
    const auto survey = load_survey(dir / "survey.json");
    const auto v = load_response_matrix(dir / "virtual.csv");
    const auto h = load_response_matrix(dir / "human.csv");
    const auto expected = nlohmann::json::parse(read_text_file(dir / "expected.json"));
    const auto r = evaluate(v, h, survey);
    EXPECT_NEAR(r.avg_wd, expected["avg_wd"].get<double>(), 1e-9);
    EXPECT_NEAR(r.frobenius_gap, expected["frobenius_gap"].get<double>(), 1e-9);
    ASSERT_TRUE(r.cronbach_alpha_virtual);
    ASSERT_TRUE(r.cronbach_alpha_human);
    EXPECT_NEAR(*r.cronbach_alpha_virtual, expected["cronbach_alpha_virtual"].get<double>(), 1e-9);
    EXPECT_NEAR(*r.cronbach_alpha_human, expected["cronbach_alpha_human"].get<double>(), 1e-9);
    EXPECT_EQ(r.n_effective, expected["n_effective_virtual"].get<std::size_t>());
    EXPECT_EQ(r.n_effective_human, expected["n_effective_human"].get<std::size_t>());
    for (const auto& [qid, wd] : r.per_question_wd) {
        EXPECT_NEAR(wd, expected["per_question_wd"][qid].get<double>(), 1e-9) << qid;
    }
    const auto cv = correlation_matrix(v);
    for (std::size_t a = 0; a < cv.size(); ++a)
        for (std::size_t b = 0; b < cv.size(); ++b)
            EXPECT_NEAR(cv.at(a, b), expected["correlation_virtual"][a][b].get<double>(), 1e-9);
}

namespace {

DemographicScheme age_scheme() {
    return DemographicScheme{"w", {vpersona::testing::variable("age", {"18-29", "30-49", "50-64", "65+"})}};
}

std::vector<HumanRespondent> humans_with_ages(const std::vector<std::size_t>& ages) {
    std::vector<HumanRespondent> out;
    for (std::size_t i = 0; i < ages.size(); ++i) out.push_back({"r" + std::to_string(i), {{"age", ages[i]}}, {}});
    return out;
}

} // namespace

TEST(Subgroups, ConstantGroupingEqualsFullEvaluate) {
    std::mt19937_64 gen(52);
    const auto v = random_matrix(gen, 12, 3, 4), h = random_matrix(gen, 12, 3, 4);
    const auto s = survey_of(3, 4);
    const auto humans = humans_with_ages(std::vector<std::size_t>(12, 1));
    const auto groups = evaluate_subgroups(
        v, h, s, humans, age_scheme(), Grouping::by_predicates({{"everyone", [](const HumanRespondent&) { return true; }}}));
    ASSERT_EQ(groups.size(), 1u);
    EXPECT_EQ(groups[0].size, 12u);
    EXPECT_EQ(groups[0].report, evaluate(v, h, s));
}

TEST(Subgroups, AgeBandsGiveThreeReports) {
    std::mt19937_64 gen(53);
    const std::vector<std::size_t> ages{0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3};
    const auto v = random_matrix(gen, 12, 3, 4), h = random_matrix(gen, 12, 3, 4);
    const auto groups = evaluate_subgroups(
        v, h, survey_of(3, 4), humans_with_ages(ages), age_scheme(),
        Grouping::by_variable("age", {{"18-49", {"18-29", "30-49"}}, {"50-64", {"50-64"}}, {"65+", {"65+"}}}));
    ASSERT_EQ(groups.size(), 3u);
    EXPECT_EQ(groups[0].group, "18-49");
    EXPECT_EQ(groups[0].size, 6u);
    EXPECT_EQ(groups[1].size + groups[2].size, 6u);
}

TEST(Subgroups, EducationLowHighGivesTwoReports) {
    const DemographicScheme s{"w", {vpersona::testing::variable("education", {"HS", "Some college", "College", "Post"})}};
    std::vector<HumanRespondent> humans;
    for (std::size_t i = 0; i < 8; ++i) humans.push_back({"r" + std::to_string(i), {{"education", i % 4}}, {}});
    std::mt19937_64 gen(54);
    const auto v = random_matrix(gen, 8, 2, 3), h = random_matrix(gen, 8, 2, 3);
    const auto groups = evaluate_subgroups(v, h, survey_of(2, 3), humans, s,
                                           Grouping::by_variable("education", {{"low", {"HS", "Some college"}},
                                                                               {"high", {"College", "Post"}}}));
    EXPECT_EQ(groups.size(), 2u);
}

TEST(Subgroups, EmptyGroupAndBadPartition) {
    const auto humans = humans_with_ages({0, 0, 0, 0});
    std::mt19937_64 gen(55);
    const auto v = random_matrix(gen, 4, 2, 3), h = random_matrix(gen, 4, 2, 3);
    EXPECT_EQ(code_of([&] {
                  (void)evaluate_subgroups(v, h, survey_of(2, 3), humans, age_scheme(), Grouping::by_variable("age"));
              }),
              ErrorCode::EmptyGroup);
    EXPECT_EQ(code_of([&] {
                  (void)evaluate_subgroups(v, h, survey_of(2, 3), humans, age_scheme(),
                                           Grouping::by_variable("age", {{"young", {"18-29", "30-49"}}}));
              }),
              ErrorCode::InvalidArgument);
}
