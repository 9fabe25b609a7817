#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace vpersona {

enum class LabelCase { upper, lower };

/// Which parse rule produced a match. Rules are tried in declaration order
/// and the first one that yields an in-range option wins.
enum class ParseRule { parenthesized_label, leading_letter, option_text, numeric_range };

struct ChoiceMatch {
    std::size_t index = 0;
    ParseRule rule = ParseRule::parenthesized_label;
};

struct ChoiceParseOptions {
    LabelCase label_case = LabelCase::upper;
    /// Map a bare number such as "27" into an option bracket like "18-29".
    bool numeric_ranges = false;
};

/// "(A)" / "(a)" for display position `position`.
[[nodiscard]] std::string choice_label(std::size_t position, LabelCase label_case);

/// Matches, in order: a parenthesized letter "(B)"; a leading letter followed
/// by '.', ')' or ':' (or standing alone); the longest option text contained
/// in the response, case-insensitively (equal-length ties between different
/// options do not match); and, when enabled, numeric-range inference.
[[nodiscard]] std::optional<ChoiceMatch> parse_choice(std::string_view text, std::span<const std::string> options,
                                                      const ChoiceParseOptions& options_cfg = {});

struct NumericRange {
    double low;
    double high;
    bool high_inclusive = true;

    [[nodiscard]] bool contains(double value) const noexcept {
        return value >= low && (high_inclusive ? value <= high : value < high);
    }
};

/// Numeric bracket described by an option label ("18-29", "65+",
/// "Less than $30,000", "$30,000 to less than $50,000"), if any.
[[nodiscard]] std::optional<NumericRange> option_numeric_range(std::string_view label);

} // namespace vpersona
