#pragma once

#include "vpersona/persona_model.hpp"
#include "vpersona/provider.hpp"
#include "vpersona/random.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vpersona {

/// The open-ended generation prompt; no system message, no demographics.
inline constexpr std::string_view kNaturalPrompt = "Question: Tell me about yourself.\n\nAnswer:";
inline constexpr std::string_view kNaturalTemplateId = "natural/tell-me-about-yourself";
inline constexpr std::string_view kPrimedTemplateId = "primed/preamble-then-life-story";

/// Bridges a demographic preamble to the story request. Configurable because
/// the exact production wording is not public.
inline constexpr std::string_view kDefaultPrimedInstruction =
    "Above are the answers a person gave to a demographic survey. Write that person's life story in the "
    "first person, in their own voice. Describe where and how they grew up, their education, work, family "
    "and relationships, and the values and beliefs that shape them. Every detail must be consistent with "
    "the answers above.";

/// Completions shorter than `min_chars` (after trimming) are discarded and
/// redrawn, up to `max_attempts` draws per story.
struct StoryFilter {
    std::size_t min_chars = 200;
    std::size_t max_attempts = 5;
};

/// T = 1.0, top_p = 1.0.
[[nodiscard]] SamplingParams default_natural_params();
/// T = 1.1, top_p = 1.0.
[[nodiscard]] SamplingParams default_primed_params();

struct NaturalGenerationOptions {
    SamplingParams params = default_natural_params();
    StoryFilter filter;
    std::string id_prefix = "natural";
    std::size_t workers = 1;
};

/// `count` stories from the fixed natural prompt. Output order follows the
/// story index regardless of completion order. Throws GenerationExhausted
/// when one story cannot pass the filter.
[[nodiscard]] std::vector<Backstory> generate_natural(std::size_t count, Provider& provider,
                                                      const NaturalGenerationOptions& options, std::uint64_t seed);

/// The demographic block for `traits`. Question-answer style emits one
/// multiple-choice block per variable with the full option list and the
/// chosen answer; biography style emits one templated sentence per variable.
/// Variable order is a uniform random permutation drawn from `rng`.
[[nodiscard]] std::string render_demographic_preamble(const TraitTuple& traits, const DemographicScheme& scheme,
                                                      PreambleStyle style, Rng& rng);

/// The biography sentence for one trait.
[[nodiscard]] std::string biography_sentence(const DemographicVariable& variable, std::size_t option_index);

struct PrimedGenerationOptions {
    SamplingParams params = default_primed_params();
    std::string instruction = std::string(kDefaultPrimedInstruction);
    /// Chat by default: instruction following matters more than voice here.
    bool use_chat = true;
    std::size_t max_attempts = 5;
};

[[nodiscard]] Backstory generate_demographics_primed(const TraitTuple& traits, const DemographicScheme& scheme,
                                                     PreambleStyle style, Provider& provider, Rng& rng,
                                                     std::string id,
                                                     const PrimedGenerationOptions& options = {});

} // namespace vpersona
