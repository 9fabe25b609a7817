#include "support/test_support.hpp"
#include "vpersona/survey_runner.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <numeric>
#include <random>

using namespace vpersona;
using nlohmann::json;
using vpersona::testing::likert;
using vpersona::testing::variable;

namespace {

DemographicScheme scheme5() {
    return DemographicScheme{"w",
                             {variable("age", {"18-29", "30-49", "50-64", "65+"}), variable("gender", {"Male", "Female"}),
                              variable("race", {"White", "Black", "Asian", "Other"}),
                              variable("education", {"HS", "Some college", "College"}),
                              variable("income", {"Low", "Middle", "High"})}};
}

TraitTuple traits5() { return {{"age", 1}, {"gender", 0}, {"race", 2}, {"education", 1}, {"income", 2}}; }

SurveyQuestion nominal(std::string id, std::size_t m) {
    auto q = likert(std::move(id), m);
    q.scale = QuestionScale::nominal_shufflable;
    return q;
}

std::unique_ptr<MockProvider> mock_of(const json& rules) { return MockProvider::from_json(json{{"rules", rules}}.dump()); }

/// Answers each question with the text of a fixed canonical option,
/// whatever order it is shown in.
std::unique_ptr<MockProvider> content_keyed_mock(const Survey& survey, const std::vector<std::size_t>& choice) {
    json rules = json::array();
    for (std::size_t q = 0; q < survey.questions.size(); ++q) {
        const auto& question = survey.questions[q];
        rules.push_back(json{{"match", {{"regex", "^ " + question.id + " ask"}, {"after_last", "Question:"}}},
                             {"responses", {question.options[choice[q]]}}});
    }
    return mock_of(rules);
}

Survey content_survey() {
    Survey s{"s", {}};
    for (int q = 0; q < 6; ++q) {
        auto question = q % 3 == 2 ? nominal("Q" + std::to_string(q), 4) : likert("Q" + std::to_string(q), 5);
        question.text = question.id + " ask";
        for (std::size_t k = 0; k < question.options.size(); ++k) {
            question.options[k] = "choice " + std::string(1, static_cast<char>('k' + q)) + std::to_string(k) + " text";
        }
        s.questions.push_back(question);
    }
    return s;
}

} // namespace

TEST(Prefix, MissingAssignedTraits) {
    Backstory b{"b", "My story.", {}, {}};
    Rng rng(1);
    try {
        (void)build_conditioning_prefix(NaturalBackstoryConditioning{b, std::nullopt}, scheme5(), rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingAssignedTraits);
    }
    EXPECT_THROW((void)build_conditioning_prefix(PrimedBackstoryConditioning{b}, scheme5(), rng), Error);
}

TEST(Prefix, QaHasOneBlockPerVariable) {
    Rng rng(2);
    const auto prefix = build_conditioning_prefix(DemographicConditioning{traits5(), PreambleStyle::question_answer},
                                                  scheme5(), rng);
    std::size_t blocks = 0;
    for (auto pos = prefix.find("Question: "); pos != std::string::npos; pos = prefix.find("Question: ", pos + 1)) ++blocks;
    EXPECT_EQ(blocks, 5u);
}

TEST(Prefix, BackstoryComesFirstVerbatim) {
    Backstory dp{"dp-1", "I grew up in Texas.", {ProvenanceKind::demographics_primed, traits5(), PreambleStyle::biography}, {}};
    Rng rng(3);
    const auto prefix = build_conditioning_prefix(PrimedBackstoryConditioning{dp}, scheme5(), rng);
    EXPECT_EQ(prefix.rfind("I grew up in Texas.\n\n", 0), 0u);
    Backstory nat{"n", "Farm life.", {}, {}};
    const auto p2 = build_conditioning_prefix(NaturalBackstoryConditioning{nat, traits5()}, scheme5(), rng);
    EXPECT_EQ(p2.rfind("Farm life.\n\nQuestion: ", 0), 0u);
}

TEST(Render, ReversedLikert) {
    const auto q = likert("Q", 5);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const auto r = render_question(q, rng);
        if (!r.reversed) continue;
        EXPECT_EQ(r.index_map, (std::vector<std::size_t>{4, 3, 2, 1, 0}));
        EXPECT_EQ(r.display_options.front(), q.options.back());
        EXPECT_EQ(r.display_options.back(), q.options.front());
        return;
    }
    FAIL() << "no reversal drawn in 50 seeds";
}

TEST(Render, BothOrientationsOccur) {
    const auto q = likert("Q", 4);
    int reversed = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        Rng rng(seed);
        reversed += render_question(q, rng).reversed;
    }
    EXPECT_GT(reversed, 150);
    EXPECT_LT(reversed, 250);
}

TEST(Render, NominalShuffleDeterministic) {
    const auto q = nominal("N", 3);
    Rng a(77), b(77);
    const auto ra = render_question(q, a);
    EXPECT_EQ(ra, render_question(q, b));
    EXPECT_TRUE(ra.shuffled);
    EXPECT_FALSE(ra.reversed);
}

TEST(Render, BlockUsesLowerCaseLabels) {
    auto q = likert("Q", 2);
    q.preamble = "Thinking about work:";
    Rng rng(0);
    const auto r = render_question(q, rng);
    EXPECT_EQ(r.block(), "Question: Thinking about work:\nQuestion Q?\n(a) " + r.display_options[0] + "\n(b) " +
                             r.display_options[1] + "\nAnswer:");
}

TEST(Render, PropertyIndexMapRoundTrip) {
    std::mt19937_64 gen(10);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 2 + gen() % 7;
        const auto q = gen() % 2 ? likert("Q", m) : nominal("N", m);
        Rng rng(gen());
        const auto r = render_question(q, rng);
        ASSERT_EQ(r.index_map.size(), m);
        for (std::size_t canonical = 0; canonical < m; ++canonical) {
            const auto pos = std::find(r.index_map.begin(), r.index_map.end(), canonical) - r.index_map.begin();
            ASSERT_LT(static_cast<std::size_t>(pos), m);
            EXPECT_EQ(r.index_map[pos], canonical);
            EXPECT_EQ(r.display_options[pos], q.options[canonical]);
        }
    }
}

TEST(ParseAnswer, Examples) {
    const auto q = likert("Q", 5);
    RenderedQuestion reversed{"Q", q.text, {q.options.rbegin(), q.options.rend()}, {4, 3, 2, 1, 0}, true, false};
    EXPECT_EQ(parse_answer("(a)", reversed), 4u);
    EXPECT_EQ(parse_answer(q.options[1], reversed), 1u);
    EXPECT_FALSE(parse_answer("I'm not sure.", reversed));
}

TEST(Administer, AlwaysAAcrossTwoQuestions) {
    Survey s{"s", {likert("Q1", 4), nominal("Q2", 3)}};
    auto mock = mock_of(json::array({json{{"match", {{"regex", ""}}}, {"responses", {"(a)"}}}}));
    Rng rng(5);
    const auto record = administer("prefix", s, *mock, rng);
    ASSERT_EQ(record.transcript.size(), 2u);
    for (const auto& e : record.transcript) {
        EXPECT_EQ(e.answer, Answer::of(e.rendered.index_map[0]));
        EXPECT_EQ(e.display_position, 0u);
        EXPECT_EQ(e.attempts, 1u);
    }
}

TEST(Administer, UnparseableRetriedThenMissingAndContinues) {
    Survey s{"s", {likert("Q1", 4), likert("Q2", 4)}};
    s.questions[0].text = "first ask";
    s.questions[1].text = "second ask";
    auto mock = mock_of(json::array({json{{"match", {{"regex", "^ first ask"}, {"after_last", "Question:"}}},
                                          {"responses", {"I'm not sure."}}},
                                     json{{"match", {{"regex", "^ second ask"}, {"after_last", "Question:"}}},
                                          {"responses", {"(b)"}}}}));
    AdministerOptions opts;
    opts.retries = 1;
    Rng rng(5);
    const auto record = administer("prefix", s, *mock, rng, opts);
    ASSERT_EQ(record.transcript.size(), 2u);
    EXPECT_TRUE(record.transcript[0].answer.is_missing());
    EXPECT_EQ(record.transcript[0].attempts, 2u);
    EXPECT_EQ(record.transcript[0].answer_line(), "I'm not sure.");
    EXPECT_FALSE(record.transcript[1].answer.is_missing());
    EXPECT_EQ(mock->call_count(), 3u);
    const auto tags = mock->history();
    EXPECT_EQ(tags[0].draw_tag(), "q=Q1;attempt=0");
    EXPECT_EQ(tags[1].draw_tag(), "q=Q1;attempt=1");
}

TEST(Administer, LaterPromptsCarryEarlierQuestionsAndAnswers) {
    Survey s{"s", {likert("Q1", 3), likert("Q2", 3), likert("Q3", 3)}};
    auto mock = mock_of(json::array({json{{"match", {{"regex", ""}}}, {"responses", {"(c)"}}}}));
    Rng rng(8);
    const auto record = administer("PREFIX", s, *mock, rng);
    const auto history = mock->history();
    ASSERT_EQ(history.size(), 3u);
    const auto& p2 = history[1].prompt();
    EXPECT_EQ(p2.rfind("PREFIX\n\n" + std::string(kBridgeLine), 0), 0u);
    EXPECT_NE(p2.find(record.transcript[0].rendered.block() + " " + record.transcript[0].answer_line()),
              std::string::npos);
    EXPECT_EQ(record.transcript[0].answer_line().rfind("(c) ", 0), 0u);
    // Prefix-closed: each prompt extends the previous one.
    for (std::size_t k = 1; k < history.size(); ++k) {
        const auto& prev = history[k - 1].prompt();
        EXPECT_EQ(history[k].prompt().rfind(prev, 0), 0u);
    }
    // Question order is the survey's.
    for (std::size_t q = 0; q < 3; ++q) EXPECT_EQ(record.transcript[q].rendered.question_id, s.questions[q].id);
    EXPECT_EQ(history[0].params().stop_sequences, (std::vector<std::string>{"\n"}));
}

TEST(Cohort, DeterministicUnderMasterSeed) {
    Survey s{"s", {likert("Q1", 4), nominal("Q2", 3), likert("Q3", 5)}};
    const char* fixture = R"j({"rules": [{"match": {"regex": ""}, "weighted": {"(a)": 1, "(b)": 1, "(c)": 1}}]})j";
    std::vector<HumanRespondent> humans{{"h1", traits5(), {}}, {"h2", traits5(), {}}, {"h3", traits5(), {}}};
    const auto cohort = demographic_cohort(humans, PreambleStyle::biography);
    auto run = [&](std::uint64_t seed, std::size_t workers) {
        auto mock = MockProvider::from_json(fixture);
        CohortOptions opts;
        opts.workers = workers;
        return run_cohort(cohort, s, scheme5(), *mock, seed, opts);
    };
    const auto a = run(11, 1);
    EXPECT_EQ(a.matrix.rows(), 3u);
    EXPECT_EQ(a.matrix.cols(), 3u);
    EXPECT_EQ(a.matrix, run(11, 3).matrix);
    EXPECT_TRUE(a.failures.empty());
    const auto b = run(12, 1);
    EXPECT_EQ(b.matrix.rows(), 3u);
    EXPECT_EQ(b.matrix.cols(), 3u);
}

TEST(Cohort, FailuresAreCollected) {
    Survey s{"s", {likert("Q1", 2)}};
    auto mock = mock_of(json::array({json{{"match", {{"contains", {"I am odd"}}}}, {"responses", {"(a)"}}}}));
    std::vector<CohortMember> cohort{
        {"ok", NaturalBackstoryConditioning{Backstory{"b1", "I am odd.", {}, {}}, traits5()}},
        {"bad", NaturalBackstoryConditioning{Backstory{"b2", "Plain.", {}, {}}, traits5()}},
    };
    const auto result = run_cohort(cohort, s, scheme5(), *mock, 1);
    ASSERT_EQ(result.failures.size(), 1u);
    EXPECT_EQ(result.failures[0].rfind("bad: FixtureMiss", 0), 0u);
    EXPECT_FALSE(result.matrix.at(0, 0).is_missing());
    EXPECT_TRUE(result.matrix.at(1, 0).is_missing());
    EXPECT_EQ(result.records[1].error_code, ErrorCode::FixtureMiss);
}

TEST(Cohort, MetamorphicInvarianceToPresentation) {
    const auto survey = content_survey();
    const std::vector<std::size_t> choice{0, 3, 2, 4, 1, 1};
    std::vector<HumanRespondent> humans;
    for (int i = 0; i < 12; ++i) humans.push_back({"h" + std::to_string(i), traits5(), {}});
    const auto cohort = demographic_cohort(humans, PreambleStyle::question_answer);
    std::vector<ResponseMatrix> matrices;
    std::set<std::string> prompts;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto mock = content_keyed_mock(survey, choice);
        const auto r = run_cohort(cohort, survey, scheme5(), *mock, seed);
        ASSERT_TRUE(r.failures.empty()) << r.failures[0];
        matrices.push_back(r.matrix);
        prompts.insert(mock->history().back().prompt());
    }
    EXPECT_EQ(matrices[0], matrices[1]);
    EXPECT_EQ(matrices[0], matrices[2]);
    for (std::size_t q = 0; q < survey.questions.size(); ++q) EXPECT_EQ(matrices[0].at(0, q), Answer::of(choice[q]));
    EXPECT_GT(prompts.size(), 1u); // presentation really did change
}

TEST(Cohort, BuildersFollowMethods) {
    std::vector<HumanRespondent> humans{{"h1", traits5(), {}}, {"h2", traits5(), {}}};
    EXPECT_EQ(demographic_cohort(humans, PreambleStyle::biography).size(), 2u);
    std::vector<Backstory> anthology{{"b0", "zero", {}, {}}, {"b1", "one", {}, {}}};
    VirtualPersona p;
    p.backstory_id = "b1";
    p.assigned_traits = traits5();
    std::vector<ConditionedPersona> conditioned{{"h1", p}, {"h2", p}};
    const auto natural = natural_cohort(conditioned, anthology, PreambleStyle::question_answer);
    ASSERT_EQ(natural.size(), 2u);
    EXPECT_EQ(std::get<NaturalBackstoryConditioning>(natural[0].method).backstory.text, "one");
    EXPECT_EQ(natural[1].respondent_id, "h2");
    anthology[0].provenance = {ProvenanceKind::demographics_primed, traits5(), PreambleStyle::question_answer};
    const std::vector<Backstory> primed{anthology[0]};
    EXPECT_EQ(primed_cohort(primed).at(0).respondent_id, "b0");
    EXPECT_EQ(parse_method_kind("anthology-dp"), MethodKind::anthology_dp);
    EXPECT_EQ(parse_method_kind("natural"), MethodKind::anthology_natural);
}
