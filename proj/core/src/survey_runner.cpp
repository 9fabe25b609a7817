#include "vpersona/survey_runner.hpp"

#include "vpersona/backstory_gen.hpp"
#include "vpersona/choice_parser.hpp"
#include "vpersona/error.hpp"
#include "vpersona/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>

namespace vpersona {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

} // namespace

std::string_view to_string(MethodKind kind) noexcept {
    switch (kind) {
    case MethodKind::bio: return "bio";
    case MethodKind::qa: return "qa";
    case MethodKind::anthology_natural: return "anthology_natural";
    case MethodKind::anthology_dp: return "anthology_dp";
    }
    return "?";
}

MethodKind parse_method_kind(std::string_view name) {
    if (name == "bio") return MethodKind::bio;
    if (name == "qa") return MethodKind::qa;
    if (name == "anthology_natural" || name == "anthology-natural" || name == "natural") {
        return MethodKind::anthology_natural;
    }
    if (name == "anthology_dp" || name == "anthology-dp" || name == "dp") return MethodKind::anthology_dp;
    fail(ErrorCode::ConfigError, "unknown conditioning method '" + std::string(name) + "'");
}

std::string build_conditioning_prefix(const ConditioningMethod& method, const DemographicScheme& scheme, Rng& rng) {
    return std::visit(
        overloaded{
            [&](const DemographicConditioning& m) { return render_demographic_preamble(m.traits, scheme, m.style, rng); },
            [&](const NaturalBackstoryConditioning& m) {
                if (!m.assigned_traits) {
                    fail(ErrorCode::MissingAssignedTraits,
                         "backstory '" + m.backstory.id + "' has no assigned traits; run matching first");
                }
                return m.backstory.text + "\n\n" + render_demographic_preamble(*m.assigned_traits, scheme, m.style, rng);
            },
            [&](const PrimedBackstoryConditioning& m) {
                const auto& provenance = m.backstory.provenance;
                if (provenance.kind != ProvenanceKind::demographics_primed || provenance.traits.empty()) {
                    fail(ErrorCode::MissingAssignedTraits,
                         "backstory '" + m.backstory.id + "' carries no demographics-primed traits");
                }
                return m.backstory.text + "\n\n" +
                       render_demographic_preamble(provenance.traits, scheme, provenance.style, rng);
            },
        },
        method);
}

std::string RenderedQuestion::block() const {
    std::string out = "Question: " + display_text + "\n";
    for (std::size_t k = 0; k < display_options.size(); ++k) {
        out += choice_label(k, LabelCase::lower) + " " + display_options[k] + "\n";
    }
    out += "Answer:";
    return out;
}

RenderedQuestion render_question(const SurveyQuestion& question, Rng& rng) {
    RenderedQuestion rendered;
    rendered.question_id = question.id;
    rendered.display_text = question.preamble ? *question.preamble + "\n" + question.text : question.text;
    rendered.index_map.resize(question.options.size());
    std::iota(rendered.index_map.begin(), rendered.index_map.end(), std::size_t{0});
    if (question.scale == QuestionScale::likert_reversible) {
        if (coin_flip(rng)) {
            std::reverse(rendered.index_map.begin(), rendered.index_map.end());
            rendered.reversed = true;
        }
    } else {
        shuffle(std::span<std::size_t>(rendered.index_map), rng);
        rendered.shuffled = true;
    }
    for (std::size_t canonical : rendered.index_map) {
        rendered.display_options.push_back(question.options[canonical]);
    }
    return rendered;
}

std::optional<std::size_t> parse_answer(std::string_view text, const RenderedQuestion& rendered) {
    const auto match = parse_choice(text, rendered.display_options, ChoiceParseOptions{LabelCase::lower, false});
    if (!match) {
        return std::nullopt;
    }
    return rendered.index_map[match->index];
}

std::string TranscriptEntry::answer_line() const {
    if (display_position) {
        return choice_label(*display_position, LabelCase::lower) + " " + rendered.display_options[*display_position];
    }
    return reply;
}

std::vector<Answer> AdministrationRecord::answers() const {
    std::vector<Answer> out;
    out.reserve(transcript.size());
    for (const auto& entry : transcript) {
        out.push_back(entry.answer);
    }
    return out;
}

std::string build_question_prompt(std::string_view prefix, std::span<const TranscriptEntry> transcript,
                                  const RenderedQuestion& next) {
    std::string prompt(prefix);
    for (const auto& entry : transcript) {
        prompt += "\n\n";
        prompt += kBridgeLine;
        prompt += "\n\n" + entry.rendered.block();
        const std::string line = entry.answer_line();
        if (!line.empty()) {
            prompt += " " + line;
        }
    }
    prompt += "\n\n";
    prompt += kBridgeLine;
    prompt += "\n\n" + next.block();
    return prompt;
}

void administer_into(AdministrationRecord& record, const Survey& survey, Provider& provider, Rng& rng,
                     const AdministerOptions& options) {
    require(!survey.questions.empty(), ErrorCode::InvalidArgument, "administer: survey has no questions");
    for (const auto& question : survey.questions) {
        TranscriptEntry entry;
        entry.rendered = render_question(question, rng);
        const std::string prompt = build_question_prompt(record.prefix, record.transcript, entry.rendered);
        for (std::size_t attempt = 0; attempt <= options.retries; ++attempt) {
            SamplingParams params = options.params;
            params.n_samples = 1;
            params.seed = rng();
            const auto request = CompletionRequest::from_prompt(
                prompt, params, "q=" + question.id + ";attempt=" + std::to_string(attempt));
            entry.reply = trim(provider.complete(request).at(0));
            entry.attempts = attempt + 1;
            if (const auto canonical = parse_answer(entry.reply, entry.rendered)) {
                entry.answer = Answer::of(*canonical);
                for (std::size_t pos = 0; pos < entry.rendered.index_map.size(); ++pos) {
                    if (entry.rendered.index_map[pos] == *canonical) {
                        entry.display_position = pos;
                    }
                }
                break;
            }
        }
        record.transcript.push_back(std::move(entry));
    }
}

AdministrationRecord administer(std::string prefix, const Survey& survey, Provider& provider, Rng& rng,
                                const AdministerOptions& options) {
    AdministrationRecord record;
    record.prefix = std::move(prefix);
    administer_into(record, survey, provider, rng, options);
    return record;
}

CohortResult run_cohort(std::span<const CohortMember> cohort, const Survey& survey, const DemographicScheme& scheme,
                        Provider& provider, std::uint64_t master_seed, const CohortOptions& options) {
    require(!cohort.empty(), ErrorCode::InvalidArgument, "run_cohort: empty cohort");
    survey.validate();
    std::vector<AdministrationRecord> records(cohort.size());
    parallel_for(cohort.size(), options.workers, [&](std::size_t r) {
        const auto& member = cohort[r];
        auto& record = records[r];
        record.respondent_id = member.respondent_id;
        Rng rng(derive_seed(master_seed, member.respondent_id));
        try {
            record.prefix = build_conditioning_prefix(member.method, scheme, rng);
            administer_into(record, survey, provider, rng, options.administer);
        } catch (const Error& e) {
            record.error = std::string(to_string(e.code())) + ": " + e.what();
            record.error_code = e.code();
        }
    });

    std::vector<std::string> ids;
    ids.reserve(cohort.size());
    for (const auto& member : cohort) {
        ids.push_back(member.respondent_id);
    }
    ResponseMatrix matrix(ids, survey.question_ids());
    std::vector<std::string> failures;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& transcript = records[r].transcript;
        for (std::size_t q = 0; q < transcript.size(); ++q) {
            matrix.set(r, q, transcript[q].answer);
        }
        if (records[r].error) {
            failures.push_back(records[r].respondent_id + ": " + *records[r].error);
        }
    }
    return CohortResult{std::move(matrix), std::move(records), std::move(failures)};
}

std::vector<CohortMember> demographic_cohort(std::span<const HumanRespondent> humans, PreambleStyle style) {
    std::vector<CohortMember> cohort;
    cohort.reserve(humans.size());
    for (const auto& human : humans) {
        cohort.push_back({human.id, DemographicConditioning{human.traits, style}});
    }
    return cohort;
}

std::vector<CohortMember> natural_cohort(std::span<const ConditionedPersona> conditioned,
                                         std::span<const Backstory> anthology, PreambleStyle style) {
    std::map<std::string_view, const Backstory*> by_id;
    for (const auto& story : anthology) {
        by_id.emplace(story.id, &story);
    }
    std::vector<CohortMember> cohort;
    cohort.reserve(conditioned.size());
    for (const auto& c : conditioned) {
        const auto it = by_id.find(c.persona.backstory_id);
        require(it != by_id.end(), ErrorCode::SchemaError,
                "persona refers to unknown backstory '" + c.persona.backstory_id + "'");
        cohort.push_back({c.respondent_id, NaturalBackstoryConditioning{*it->second, c.persona.assigned_traits, style}});
    }
    return cohort;
}

std::vector<CohortMember> primed_cohort(std::span<const Backstory> anthology) {
    std::vector<CohortMember> cohort;
    cohort.reserve(anthology.size());
    for (const auto& story : anthology) {
        cohort.push_back({story.id, PrimedBackstoryConditioning{story}});
    }
    return cohort;
}

} // namespace vpersona
