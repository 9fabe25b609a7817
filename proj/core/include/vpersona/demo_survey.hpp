#pragma once

#include "vpersona/persona_model.hpp"
#include "vpersona/provider.hpp"
#include "vpersona/random.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vpersona {

/// Reply the extraction model is told to give when the story does not state
/// the trait outright.
inline constexpr std::string_view kAbstainToken = "NOT_MENTIONED";

inline constexpr std::size_t kDefaultDemographicSamples = 40;

struct ExtractionOptions {
    /// T = 0, top_p = 1.0, one completion.
    SamplingParams params = [] {
        SamplingParams p;
        p.temperature = 0.0;
        p.top_p = 1.0;
        p.max_tokens = 24;
        return p;
    }();
};

struct SamplingOptions {
    std::size_t n_samples = kDefaultDemographicSamples;
    /// T = 1.0, top_p = 1.0, stop on a blank line.
    SamplingParams params = [] {
        SamplingParams p;
        p.temperature = 1.0;
        p.top_p = 1.0;
        p.max_tokens = 32;
        p.stop_sequences = {"\n\n"};
        return p;
    }();
    bool numeric_ranges = false;
};

struct ProfileOptions {
    SamplingOptions sampling;
    ExtractionOptions extraction;
    /// Try explicit-mention extraction for eligible variables first.
    bool extract = true;
    std::size_t workers = 1;
};

/// "Question: ...\n(A) ...\n...\nAnswer:" in canonical option order.
[[nodiscard]] std::string demographic_question_block(const DemographicVariable& variable);
[[nodiscard]] std::string demographic_sampling_prompt(const Backstory& backstory, const DemographicVariable& variable);
[[nodiscard]] std::vector<ChatMessage> extraction_messages(const Backstory& backstory,
                                                           const DemographicVariable& variable);

/// Canonical option index of a free-text demographic answer, or nullopt.
[[nodiscard]] std::optional<std::size_t> parse_demographic_response(std::string_view text,
                                                                     const DemographicVariable& variable,
                                                                     bool numeric_ranges = false);

/// Requires `variable.extraction_eligible`; returns nullopt on abstention or
/// an unparseable reply.
[[nodiscard]] std::optional<TraitValue> extract_explicit_trait(const Backstory& backstory,
                                                               const DemographicVariable& variable,
                                                               Provider& provider,
                                                               const ExtractionOptions& options = {});

/// Draws `n_samples` answers in one request and normalizes the parsed counts.
/// Throws AllZeroCounts when nothing parses.
[[nodiscard]] TraitDistribution sample_trait_distribution(const Backstory& backstory,
                                                          const DemographicVariable& variable, Provider& provider,
                                                          Rng& rng, const SamplingOptions& options = {});

struct ProfileProviders {
    Provider& sampler;
    /// Null disables extraction.
    Provider* extractor = nullptr;
};

/// One distribution per scheme variable: extracted one-hot where eligible and
/// explicitly stated, sampled otherwise.
[[nodiscard]] VirtualPersona profile_persona(const Backstory& backstory, const DemographicScheme& scheme,
                                             ProfileProviders providers, Rng& rng,
                                             const ProfileOptions& options = {});

} // namespace vpersona
