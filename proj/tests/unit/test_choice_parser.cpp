#include "vpersona/choice_parser.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace vpersona;

namespace {
const std::vector<std::string> kAge{"18-29", "30-49", "50-64", "65+"};
const std::vector<std::string> kEducation{"High school or less", "Some college", "College graduate",
                                          "Postgraduate"};
} // namespace

TEST(ChoiceParser, Labels) {
    EXPECT_EQ(choice_label(0, LabelCase::upper), "(A)");
    EXPECT_EQ(choice_label(4, LabelCase::lower), "(e)");
}

TEST(ChoiceParser, ParenthesizedLabel) {
    auto m = parse_choice("(B) 30-49", kAge);
    ASSERT_TRUE(m);
    EXPECT_EQ(m->index, 1u);
    EXPECT_EQ(m->rule, ParseRule::parenthesized_label);
}

TEST(ChoiceParser, LeadingLetter) {
    auto m = parse_choice("C. 50-64", kAge);
    ASSERT_TRUE(m);
    EXPECT_EQ(m->index, 2u);
    EXPECT_EQ(m->rule, ParseRule::leading_letter);
    EXPECT_EQ(parse_choice("D", kAge)->index, 3u);
}

TEST(ChoiceParser, OutOfRangeLabelDoesNotMatch) { EXPECT_FALSE(parse_choice("(F)", kAge)); }

TEST(ChoiceParser, OptionText) {
    auto m = parse_choice("Some college", kEducation);
    ASSERT_TRUE(m);
    EXPECT_EQ(m->index, 1u);
    EXPECT_EQ(m->rule, ParseRule::option_text);
    EXPECT_EQ(parse_choice("i finished some COLLEGE", kEducation)->index, 1u);
}

TEST(ChoiceParser, LongestOptionTextWins) {
    const std::vector<std::string> opts{"Important", "Very important"};
    EXPECT_EQ(parse_choice("Very important.", opts)->index, 1u);
}

TEST(ChoiceParser, BareNumberNeedsNumericRule) {
    EXPECT_FALSE(parse_choice("I am 27 years old", kAge));
    auto m = parse_choice("I am 27 years old", kAge, {LabelCase::upper, true});
    ASSERT_TRUE(m);
    EXPECT_EQ(m->index, 0u);
    EXPECT_EQ(m->rule, ParseRule::numeric_range);
    EXPECT_EQ(parse_choice("71", kAge, {LabelCase::upper, true})->index, 3u);
}

TEST(ChoiceParser, NoMatch) { EXPECT_FALSE(parse_choice("I'm not sure.", kAge)); }

TEST(ChoiceParser, LowerCaseLabels) {
    EXPECT_EQ(parse_choice("(b)", kAge, {LabelCase::lower, false})->index, 1u);
}

TEST(ChoiceParser, NumericRanges) {
    auto r = option_numeric_range("18-29");
    ASSERT_TRUE(r);
    EXPECT_TRUE(r->contains(18));
    EXPECT_TRUE(r->contains(29));
    EXPECT_FALSE(r->contains(30));
    EXPECT_TRUE(option_numeric_range("65+")->contains(90));
    EXPECT_TRUE(option_numeric_range("Less than $30,000")->contains(29999));
    EXPECT_FALSE(option_numeric_range("Less than $30,000")->contains(30000));
    EXPECT_FALSE(option_numeric_range("Some college"));
}

TEST(ChoiceParser, PropertyPureAndStable) {
    // The same text and options always give the same (index, rule).
    std::mt19937_64 gen(21);
    const std::string alphabet = "()ABCDabcd .:-0123456789 collegeSome";
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text;
        const auto len = gen() % 20;
        for (std::size_t i = 0; i < len; ++i) text += alphabet[gen() % alphabet.size()];
        const auto a = parse_choice(text, kEducation, {LabelCase::upper, true});
        const auto b = parse_choice(text, kEducation, {LabelCase::upper, true});
        ASSERT_EQ(a.has_value(), b.has_value()) << text;
        if (a) {
            EXPECT_EQ(a->index, b->index);
            EXPECT_EQ(a->rule, b->rule);
            EXPECT_LT(a->index, kEducation.size());
        }
    }
}
