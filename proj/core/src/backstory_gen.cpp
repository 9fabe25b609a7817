#include "vpersona/backstory_gen.hpp"

#include "vpersona/choice_parser.hpp"
#include "vpersona/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <optional>

namespace vpersona {

namespace {

std::string trim(std::string_view s) {
    auto begin = s.begin();
    auto end = s.end();
    while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) {
        ++begin;
    }
    while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) {
        --end;
    }
    return std::string(begin, end);
}

std::string padded(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05zu", i);
    return buf;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
        text.replace(pos, from.size(), to);
    }
    return text;
}

std::string qa_block(const DemographicVariable& variable, std::size_t option_index) {
    std::string block = "Question: " + variable.question_text + "\n";
    for (std::size_t k = 0; k < variable.options.size(); ++k) {
        block += choice_label(k, LabelCase::upper) + " " + variable.options[k] + "\n";
    }
    block += "Answer: " + choice_label(option_index, LabelCase::upper) + " " + variable.options[option_index];
    return block;
}

} // namespace

SamplingParams default_natural_params() {
    SamplingParams p;
    p.temperature = 1.0;
    p.top_p = 1.0;
    p.max_tokens = 1024;
    return p;
}

SamplingParams default_primed_params() {
    SamplingParams p;
    p.temperature = 1.1;
    p.top_p = 1.0;
    p.max_tokens = 1024;
    return p;
}

std::vector<Backstory> generate_natural(std::size_t count, Provider& provider,
                                        const NaturalGenerationOptions& options, std::uint64_t seed) {
    require(count >= 1, ErrorCode::InvalidArgument, "generate_natural: count must be at least 1");
    require(options.filter.max_attempts >= 1, ErrorCode::InvalidArgument, "story filter needs at least one attempt");
    std::vector<std::optional<Backstory>> slots(count);
    parallel_for(count, options.workers, [&](std::size_t i) {
        const std::uint64_t story_seed = derive_seed(seed, i);
        for (std::size_t attempt = 0; attempt < options.filter.max_attempts; ++attempt) {
            SamplingParams params = options.params;
            params.n_samples = 1;
            params.seed = derive_seed(story_seed, attempt);
            const auto request = CompletionRequest::from_prompt(
                std::string(kNaturalPrompt), params,
                options.id_prefix + "/" + std::to_string(i) + "/" + std::to_string(attempt));
            const auto texts = provider.complete(request);
            std::string text = trim(texts.at(0));
            if (text.empty() || text.size() < options.filter.min_chars) {
                continue;
            }
            Backstory story;
            story.id = options.id_prefix + "-" + padded(i);
            story.text = std::move(text);
            story.provenance.kind = ProvenanceKind::natural;
            story.generation_meta = GenerationMeta{provider.model_id(), params.temperature, params.top_p,
                                                   std::string(kNaturalTemplateId), params.seed};
            story.validate();
            slots[i] = std::move(story);
            return;
        }
        fail(ErrorCode::GenerationExhausted, "story " + std::to_string(i) + ": no usable completion after " +
                                                 std::to_string(options.filter.max_attempts) + " attempts");
    });
    std::vector<Backstory> stories;
    stories.reserve(count);
    for (auto& slot : slots) {
        stories.push_back(std::move(*slot));
    }
    return stories;
}

std::string biography_sentence(const DemographicVariable& variable, std::size_t option_index) {
    const std::string& label = variable.options.at(option_index);
    if (!variable.bio_template.empty()) {
        return replace_all(variable.bio_template, "{label}", label);
    }
    return "Asked \"" + variable.question_text + "\", I answer \"" + label + "\".";
}

std::string render_demographic_preamble(const TraitTuple& traits, const DemographicScheme& scheme,
                                        PreambleStyle style, Rng& rng) {
    validate_traits(traits, scheme);
    const auto order = random_permutation(scheme.size(), rng);
    std::string out;
    for (std::size_t position = 0; position < order.size(); ++position) {
        const auto& variable = scheme.variables[order[position]];
        const std::size_t option_index = find_trait(traits, variable.id)->option_index;
        if (style == PreambleStyle::question_answer) {
            out += (position == 0 ? "" : "\n\n") + qa_block(variable, option_index);
        } else {
            out += (position == 0 ? "" : " ") + biography_sentence(variable, option_index);
        }
    }
    return out;
}

Backstory generate_demographics_primed(const TraitTuple& traits, const DemographicScheme& scheme,
                                       PreambleStyle style, Provider& provider, Rng& rng, std::string id,
                                       const PrimedGenerationOptions& options) {
    require(options.max_attempts >= 1, ErrorCode::InvalidArgument, "primed generation needs at least one attempt");
    const std::string prompt = render_demographic_preamble(traits, scheme, style, rng) + "\n\n" + options.instruction;
    const std::uint64_t story_seed = rng();
    for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
        SamplingParams params = options.params;
        params.n_samples = 1;
        params.seed = derive_seed(story_seed, attempt);
        const std::string tag = "primed/" + id + "/" + std::to_string(attempt);
        const auto request = options.use_chat
                                 ? CompletionRequest::from_messages({{"user", prompt}}, params, tag)
                                 : CompletionRequest::from_prompt(prompt, params, tag);
        std::string text = trim(provider.complete(request).at(0));
        if (text.empty()) {
            continue;
        }
        Backstory story;
        story.id = std::move(id);
        story.text = std::move(text);
        story.provenance = Provenance{ProvenanceKind::demographics_primed, traits, style};
        story.generation_meta = GenerationMeta{provider.model_id(), params.temperature, params.top_p,
                                               std::string(kPrimedTemplateId), params.seed};
        story.validate();
        return story;
    }
    fail(ErrorCode::GenerationExhausted, "primed story '" + id + "': only empty completions");
}

} // namespace vpersona
