#include "vpersona/demo_survey.hpp"

#include "vpersona/choice_parser.hpp"
#include "vpersona/parallel.hpp"

#include <algorithm>
#include <cctype>

namespace vpersona {

namespace {

bool contains_abstain(std::string_view text) {
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    return upper.find(kAbstainToken) != std::string::npos;
}

} // namespace

std::string demographic_question_block(const DemographicVariable& variable) {
    std::string block = "Question: " + variable.question_text + "\n";
    for (std::size_t k = 0; k < variable.options.size(); ++k) {
        block += choice_label(k, LabelCase::upper) + " " + variable.options[k] + "\n";
    }
    block += "Answer:";
    return block;
}

std::string demographic_sampling_prompt(const Backstory& backstory, const DemographicVariable& variable) {
    return backstory.text + "\n\n" + demographic_question_block(variable);
}

std::vector<ChatMessage> extraction_messages(const Backstory& backstory, const DemographicVariable& variable) {
    std::string instruction =
        "Read the life story below and answer the multiple-choice question about its author. Answer only if "
        "the story explicitly states the information; do not guess from indirect hints. If it is explicitly "
        "stated, reply with the letter of the matching option, for example (A). Otherwise reply with exactly ";
    instruction += kAbstainToken;
    instruction += ".";
    return {
        {"system", "You locate explicitly stated facts in text and never infer beyond them."},
        {"user", instruction + "\n\nStory:\n" + backstory.text + "\n\n" + demographic_question_block(variable)},
    };
}

std::optional<std::size_t> parse_demographic_response(std::string_view text, const DemographicVariable& variable,
                                                      bool numeric_ranges) {
    const auto match = parse_choice(text, variable.options, ChoiceParseOptions{LabelCase::upper, numeric_ranges});
    if (!match) {
        return std::nullopt;
    }
    return match->index;
}

std::optional<TraitValue> extract_explicit_trait(const Backstory& backstory, const DemographicVariable& variable,
                                                 Provider& provider, const ExtractionOptions& options) {
    require(variable.extraction_eligible, ErrorCode::PreconditionError,
            "variable '" + variable.id + "' is not eligible for explicit extraction");
    SamplingParams params = options.params;
    params.n_samples = 1;
    const auto request = CompletionRequest::from_messages(extraction_messages(backstory, variable), params,
                                                          "extract/" + backstory.id + "/" + variable.id);
    const std::string reply = provider.complete(request).at(0);
    if (contains_abstain(reply)) {
        return std::nullopt;
    }
    const auto index = parse_demographic_response(reply, variable, false);
    if (!index) {
        return std::nullopt;
    }
    return TraitValue{variable.id, *index};
}

TraitDistribution sample_trait_distribution(const Backstory& backstory, const DemographicVariable& variable,
                                            Provider& provider, Rng& rng, const SamplingOptions& options) {
    require(options.n_samples >= 1, ErrorCode::InvalidArgument, "sample_trait_distribution: n must be >= 1");
    SamplingParams params = options.params;
    params.n_samples = options.n_samples;
    params.seed = rng();
    const auto request = CompletionRequest::from_prompt(demographic_sampling_prompt(backstory, variable), params,
                                                        "demographic/" + backstory.id + "/" + variable.id);
    const auto replies = provider.complete(request);
    std::vector<std::size_t> counts(variable.option_count(), 0);
    std::size_t failures = 0;
    for (const auto& reply : replies) {
        if (const auto index = parse_demographic_response(reply, variable, options.numeric_ranges)) {
            ++counts[*index];
        } else {
            ++failures;
        }
    }
    auto distribution = TraitDistribution::from_counts(variable.id, counts);
    distribution.n_samples = replies.size();
    distribution.parse_failures = failures;
    return distribution;
}

VirtualPersona profile_persona(const Backstory& backstory, const DemographicScheme& scheme,
                               ProfileProviders providers, Rng& rng, const ProfileOptions& options) {
    require(scheme.size() >= 1, ErrorCode::InvalidArgument, "profile_persona: empty scheme");
    // Seeds are drawn up front in scheme order so that concurrent variables
    // see the same streams as a sequential run.
    std::vector<std::uint64_t> seeds(scheme.size());
    for (auto& s : seeds) {
        s = rng();
    }
    std::vector<TraitDistribution> distributions(scheme.size());
    parallel_for(scheme.size(), options.workers, [&](std::size_t l) {
        const auto& variable = scheme.variables[l];
        if (options.extract && variable.extraction_eligible && providers.extractor != nullptr) {
            if (const auto trait = extract_explicit_trait(backstory, variable, *providers.extractor, options.extraction)) {
                distributions[l] = TraitDistribution::one_hot(variable.id, variable.option_count(), trait->option_index);
                return;
            }
        }
        Rng variable_rng(seeds[l]);
        try {
            distributions[l] = sample_trait_distribution(backstory, variable, providers.sampler, variable_rng,
                                                         options.sampling);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::AllZeroCounts) {
                fail(ErrorCode::AllZeroCounts, "backstory '" + backstory.id + "', variable '" + variable.id +
                                                   "': no sampled answer could be parsed");
            }
            throw;
        }
    });
    VirtualPersona persona;
    persona.backstory_id = backstory.id;
    persona.distributions = std::move(distributions);
    persona.validate(scheme);
    return persona;
}

} // namespace vpersona
