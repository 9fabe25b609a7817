#include "vpersona/choice_parser.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <regex>
#include <vector>

namespace vpersona {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::optional<std::size_t> letter_index(char letter, std::size_t option_count) {
    const auto lower = static_cast<char>(std::tolower(static_cast<unsigned char>(letter)));
    if (lower < 'a' || lower > 'z') {
        return std::nullopt;
    }
    const auto index = static_cast<std::size_t>(lower - 'a');
    return index < option_count ? std::optional<std::size_t>(index) : std::nullopt;
}

std::optional<std::size_t> match_parenthesized(std::string_view text, std::size_t option_count) {
    for (std::size_t i = 0; i + 2 < text.size(); ++i) {
        if (text[i] == '(' && text[i + 2] == ')' && std::isalpha(static_cast<unsigned char>(text[i + 1]))) {
            if (auto index = letter_index(text[i + 1], option_count)) {
                return index;
            }
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> match_leading_letter(std::string_view text, std::size_t option_count, LabelCase label_case) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
        ++i;
    }
    if (i >= text.size()) {
        return std::nullopt;
    }
    const auto c = static_cast<unsigned char>(text[i]);
    const bool case_ok = label_case == LabelCase::upper ? std::isupper(c) != 0 : std::islower(c) != 0;
    if (!case_ok) {
        return std::nullopt;
    }
    std::size_t j = i + 1;
    const bool alone = j == text.size() ||
                       std::all_of(text.begin() + static_cast<std::ptrdiff_t>(j), text.end(),
                                   [](unsigned char ch) { return std::isspace(ch); });
    const bool delimited = j < text.size() && (text[j] == '.' || text[j] == ')' || text[j] == ':');
    if (!alone && !delimited) {
        return std::nullopt;
    }
    return letter_index(static_cast<char>(c), option_count);
}

std::optional<std::size_t> match_option_text(std::string_view text, std::span<const std::string> options) {
    const std::string haystack = lowercase(text);
    std::optional<std::size_t> best;
    std::size_t best_length = 0;
    bool tie = false;
    for (std::size_t k = 0; k < options.size(); ++k) {
        const std::string needle = lowercase(options[k]);
        if (needle.empty() || haystack.find(needle) == std::string::npos) {
            continue;
        }
        if (needle.size() > best_length) {
            best = k;
            best_length = needle.size();
            tie = false;
        } else if (needle.size() == best_length) {
            tie = true;
        }
    }
    if (tie) {
        return std::nullopt;
    }
    return best;
}

double parse_number(std::string digits, bool thousands) {
    digits.erase(std::remove(digits.begin(), digits.end(), ','), digits.end());
    double value = std::stod(digits);
    return thousands ? value * 1000.0 : value;
}

const std::regex& number_regex() {
    static const std::regex re(R"((\d{1,3}(?:,\d{3})+|\d+(?:\.\d+)?)\s*([kK]\b)?)");
    return re;
}

std::vector<double> numbers_in(std::string_view text) {
    std::vector<double> values;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), number_regex()); it != std::sregex_iterator(); ++it) {
        values.push_back(parse_number((*it)[1].str(), (*it)[2].matched));
    }
    return values;
}

std::optional<std::size_t> match_numeric(std::string_view text, std::span<const std::string> options) {
    const auto values = numbers_in(text);
    if (values.empty()) {
        return std::nullopt;
    }
    const double value = values.front();
    for (std::size_t k = 0; k < options.size(); ++k) {
        if (const auto range = option_numeric_range(options[k]); range && range->contains(value)) {
            return k;
        }
    }
    return std::nullopt;
}

} // namespace

std::string choice_label(std::size_t position, LabelCase label_case) {
    const char base = label_case == LabelCase::upper ? 'A' : 'a';
    return std::string("(") + static_cast<char>(base + static_cast<char>(position % 26)) + ")";
}

std::optional<NumericRange> option_numeric_range(std::string_view label) {
    const std::string lower = lowercase(label);
    const auto values = numbers_in(label);
    if (values.empty()) {
        return std::nullopt;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    const bool below = lower.find("less than") != std::string::npos || lower.find("under") != std::string::npos ||
                       lower.find("below") != std::string::npos;
    if (values.size() >= 2) {
        return NumericRange{values[0], values[1], !below};
    }
    if (lower.find('+') != std::string::npos || lower.find("or more") != std::string::npos ||
        lower.find("or older") != std::string::npos || lower.find("or over") != std::string::npos ||
        lower.find("and over") != std::string::npos || lower.find("above") != std::string::npos) {
        return NumericRange{values[0], inf, true};
    }
    if (below) {
        return NumericRange{-inf, values[0], false};
    }
    return NumericRange{values[0], values[0], true};
}

std::optional<ChoiceMatch> parse_choice(std::string_view text, std::span<const std::string> options,
                                        const ChoiceParseOptions& cfg) {
    if (options.empty()) {
        return std::nullopt;
    }
    if (auto index = match_parenthesized(text, options.size())) {
        return ChoiceMatch{*index, ParseRule::parenthesized_label};
    }
    if (auto index = match_leading_letter(text, options.size(), cfg.label_case)) {
        return ChoiceMatch{*index, ParseRule::leading_letter};
    }
    if (auto index = match_option_text(text, options)) {
        return ChoiceMatch{*index, ParseRule::option_text};
    }
    if (cfg.numeric_ranges) {
        if (auto index = match_numeric(text, options)) {
            return ChoiceMatch{*index, ParseRule::numeric_range};
        }
    }
    return std::nullopt;
}

} // namespace vpersona
