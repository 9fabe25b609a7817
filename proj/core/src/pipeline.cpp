#include "vpersona/pipeline.hpp"

#include "vpersona/digest.hpp"
#include "vpersona/error.hpp"
#include "vpersona/metrics.hpp"
#include "vpersona/parallel.hpp"

#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>

namespace vpersona {

namespace {

using Json = nlohmann::json; // sorted keys: canonical digest input

std::shared_ptr<spdlog::logger> log() {
    static const auto logger = [] {
        auto l = spdlog::stderr_color_mt("vpersona");
        l->set_pattern("[%l] %v");
        return l;
    }();
    return logger;
}

Json sampling_json(const SamplingParams& p) {
    return {{"temperature", p.temperature},
            {"top_p", p.top_p},
            {"max_tokens", p.max_tokens},
            {"n", p.n_samples},
            {"stop", p.stop_sequences}};
}

std::string file_digest(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

Json provider_json(const ProviderSpec& spec) {
    if (spec.kind == ProviderSpec::Kind::mock) {
        return {{"kind", "mock"}, {"fixture_sha256", file_digest(spec.fixture)}};
    }
    return {{"kind", "http"},
            {"base_url", spec.http.base_url},
            {"model", spec.http.model_id},
            {"mode", to_string(spec.http.mode)}};
}

struct Inputs {
    DemographicScheme scheme;
    Survey survey;
    std::vector<HumanRespondent> humans;
    std::string scheme_sha;
    std::string survey_sha;
    std::string respondents_sha;
};

// What each stage's output depends on. Digests chain through `upstream`, so
// a change only invalidates the stages at and below it.
struct Plan {
    std::vector<Stage> stages;
    std::map<Stage, Json> descriptions;
    std::map<Stage, std::string> digests;
};

std::string digest_of(const Json& j) { return sha256_hex(j.dump()); }

Json seeds_for(const PipelineConfig& c, std::initializer_list<std::string_view> names) {
    Json j = Json::object();
    for (auto n : names) j[std::string(n)] = c.seed(n);
    return j;
}

Json optional_provider(const PipelineConfig& c, const char* name) {
    const auto it = c.providers.find(name);
    return it == c.providers.end() ? Json(nullptr) : provider_json(it->second);
}

Plan make_plan(const PipelineConfig& c, const Inputs& in) {
    Plan plan;
    plan.stages = stages_for(c.method);
    const bool natural = c.method == MethodKind::anthology_natural;
    const bool primed = c.method == MethodKind::anthology_dp;
    std::string upstream;
    for (Stage stage : plan.stages) {
        Json d = {{"stage", to_string(stage)}, {"upstream", upstream}};
        switch (stage) {
        case Stage::generate:
            if (c.anthology_path) {
                d["anthology_sha256"] = file_digest(*c.anthology_path);
            } else if (natural) {
                d["kind"] = "natural";
                d["count"] = c.generate_count;
                d["params"] = sampling_json(c.natural.params);
                d["min_chars"] = c.natural.filter.min_chars;
                d["max_attempts"] = c.natural.filter.max_attempts;
                d["provider"] = optional_provider(c, "generate");
                d["seeds"] = seeds_for(c, {"generate"});
            } else {
                d["kind"] = "demographics_primed";
                d["params"] = sampling_json(c.primed.params);
                d["instruction"] = c.primed.instruction;
                d["use_chat"] = c.primed.use_chat;
                d["max_attempts"] = c.primed.max_attempts;
                d["style"] = to_string(c.preamble_style);
                d["scheme"] = in.scheme_sha;
                d["respondents"] = in.respondents_sha;
                d["provider"] = optional_provider(c, "generate");
                d["seeds"] = seeds_for(c, {"generate"});
            }
            break;
        case Stage::profile:
            d["scheme"] = in.scheme_sha;
            d["n_samples"] = c.profile.sampling.n_samples;
            d["params"] = sampling_json(c.profile.sampling.params);
            d["numeric_ranges"] = c.profile.sampling.numeric_ranges;
            d["extract"] = c.profile.extract;
            d["extraction_params"] = sampling_json(c.profile.extraction.params);
            d["provider"] = optional_provider(c, "profile");
            d["extractor"] = c.providers.count("extract") ? optional_provider(c, "extract") : d["provider"];
            d["seeds"] = seeds_for(c, {"profile"});
            break;
        case Stage::match:
            d["scheme"] = in.scheme_sha;
            d["respondents"] = in.respondents_sha;
            d["method"] = to_string(c.matching);
            d["epsilon_floor"] = c.edge_weights.epsilon_floor ? Json(*c.edge_weights.epsilon_floor) : Json(nullptr);
            d["seeds"] = seeds_for(c, {"match"});
            break;
        case Stage::survey:
            d["method"] = to_string(c.method);
            d["style"] = to_string(c.preamble_style);
            d["scheme"] = in.scheme_sha;
            d["survey"] = in.survey_sha;
            if (!primed) d["respondents"] = in.respondents_sha;
            d["retries"] = c.administer.retries;
            d["params"] = sampling_json(c.administer.params);
            d["provider"] = optional_provider(c, "survey");
            d["seeds"] = seeds_for(c, {"survey"});
            break;
        case Stage::evaluate: {
            d["survey"] = in.survey_sha;
            d["respondents"] = in.respondents_sha;
            d["scheme"] = in.scheme_sha;
            d["lower_bound_iterations"] = c.lower_bound_iterations;
            Json groups = Json::array();
            for (const auto& g : c.subgroups) {
                Json bands = Json::array();
                for (const auto& b : g.bands) bands.push_back({{"name", b.name}, {"labels", b.labels}});
                groups.push_back({{"variable", g.variable_id}, {"bands", bands}});
            }
            d["subgroups"] = groups;
            d["seeds"] = seeds_for(c, {"lower_bound"});
            d["method"] = to_string(c.method);
            d["wave"] = c.wave;
            break;
        }
        }
        (void)natural;
        plan.digests[stage] = digest_of(d);
        plan.descriptions[stage] = std::move(d);
        upstream = plan.digests[stage];
    }
    return plan;
}

ArtifactMeta meta_for(const PipelineConfig& c, const Plan& plan, Stage stage) {
    ArtifactMeta meta;
    meta["stage"] = std::string(to_string(stage));
    meta["config_digest"] = plan.digests.at(stage);
    meta["master_seed"] = std::to_string(c.master_seed);
    const auto& seeds = plan.descriptions.at(stage)["seeds"];
    if (seeds.is_object()) {
        for (const auto& [name, value] : seeds.items()) meta["seed." + name] = std::to_string(value.get<std::uint64_t>());
    }
    return meta;
}

// Loads an artifact only if it parses and carries the expected digest.
template <typename Load>
auto reuse(const std::filesystem::path& path, const std::string& digest, bool force, Load load)
    -> std::optional<decltype(load(path))> {
    if (force || !std::filesystem::is_regular_file(path)) return std::nullopt;
    try {
        auto [value, meta] = load(path);
        const auto it = meta.find("config_digest");
        if (it != meta.end() && it->second == digest) return std::make_optional(std::make_pair(std::move(value), meta));
    } catch (const Error&) {
    }
    return std::nullopt;
}

ProviderSpec provider_spec(const PipelineConfig& c, const char* name) {
    const auto it = c.providers.find(name);
    if (it == c.providers.end()) fail(ErrorCode::ConfigError, std::string("no [providers.") + name + "] configured");
    return it->second;
}

void write_manifest(const PipelineConfig& c, const Plan& plan, const std::vector<StageOutcome>& done) {
    Json seeds = Json::object();
    for (auto n : kSeedNames) seeds[std::string(n)] = c.seed(n);
    Json stages = Json::array();
    for (const auto& o : done) stages.push_back({{"stage", to_string(o.stage)}, {"config_digest", o.digest}});
    Json planned = Json::array();
    for (Stage s : plan.stages) planned.push_back(to_string(s));
    const Json manifest = {{"artifact", "manifest"},
                           {"config_digest", config_digest(c)},
                           {"master_seed", c.master_seed},
                           {"seeds", seeds},
                           {"method", to_string(c.method)},
                           {"matching", to_string(c.matching)},
                           {"wave", c.wave},
                           {"planned_stages", planned},
                           {"completed_stages", stages}};
    write_text_file(c.output_dir / artifacts::manifest, manifest.dump(2) + "\n");
}

Inputs load_inputs(const PipelineConfig& c) {
    Inputs in;
    const std::string scheme_text = read_text_file(c.scheme_path);
    const std::string survey_text = read_text_file(c.survey_path);
    const std::string respondents_text = read_text_file(c.respondents_path);
    in.scheme = parse_scheme_json(scheme_text);
    in.survey = parse_survey_json(survey_text);
    in.humans = parse_respondents_csv(respondents_text, in.scheme, in.survey);
    require(!in.humans.empty(), ErrorCode::SchemaError, "respondents file has no rows");
    in.scheme_sha = sha256_hex(scheme_text);
    in.survey_sha = sha256_hex(survey_text);
    in.respondents_sha = sha256_hex(respondents_text);
    return in;
}

} // namespace

std::string_view to_string(Stage stage) noexcept {
    switch (stage) {
    case Stage::generate: return "generate";
    case Stage::profile: return "profile";
    case Stage::match: return "match";
    case Stage::survey: return "run-survey";
    case Stage::evaluate: return "evaluate";
    }
    return "?";
}

Stage parse_stage(std::string_view name) {
    for (Stage s : {Stage::generate, Stage::profile, Stage::match, Stage::survey, Stage::evaluate}) {
        if (to_string(s) == name) return s;
    }
    if (name == "survey" || name == "run_survey") return Stage::survey;
    fail(ErrorCode::UsageError, "unknown stage '" + std::string(name) + "'");
}

std::vector<Stage> stages_for(MethodKind method) {
    switch (method) {
    case MethodKind::anthology_natural:
        return {Stage::generate, Stage::profile, Stage::match, Stage::survey, Stage::evaluate};
    case MethodKind::anthology_dp: return {Stage::generate, Stage::survey, Stage::evaluate};
    case MethodKind::bio:
    case MethodKind::qa: return {Stage::survey, Stage::evaluate};
    }
    return {};
}

std::string config_digest(const PipelineConfig& config) {
    const Inputs in = load_inputs(config);
    const Plan plan = make_plan(config, in);
    Json j = {{"method", to_string(config.method)}, {"matching", to_string(config.matching)}};
    for (const auto& [stage, d] : plan.descriptions) j["stages"][std::string(to_string(stage))] = d;
    return digest_of(j);
}

void set_log_level(std::string_view level) {
    log()->set_level(spdlog::level::from_str(std::string(level)));
}

RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options) {
    Inputs in;
    Plan plan;
    try {
        config.validate();
        in = load_inputs(config);
        plan = make_plan(config, in);
    } catch (const Error& e) {
        throw StageError("setup", e.code(), e.what());
    }
    std::vector<Stage> stages = plan.stages;
    if (options.until) {
        const auto it = std::find(stages.begin(), stages.end(), *options.until);
        if (it == stages.end()) {
            throw StageError(std::string(to_string(*options.until)), ErrorCode::ConfigError,
                             "method '" + std::string(to_string(config.method)) + "' does not use this stage");
        }
        stages.erase(it + 1, stages.end());
    }

    const auto dir = config.output_dir;
    std::filesystem::create_directories(dir);
    RunResult result{dir, {}};

    std::vector<Backstory> anthology;
    std::vector<VirtualPersona> personas;
    MatchingResult matching;
    std::optional<ResponseMatrix> responses;
    std::vector<std::string> failures;

    for (Stage stage : stages) {
        const std::string& digest = plan.digests.at(stage);
        const ArtifactMeta meta = meta_for(config, plan, stage);
        StageOutcome outcome{stage, digest, false};
        try {
            switch (stage) {
            case Stage::generate: {
                const auto path = dir / artifacts::anthology;
                auto loaded = reuse(path, digest, options.force, [](const auto& p) {
                    auto l = load_anthology(p);
                    return std::make_pair(std::move(l.items), std::move(l.meta));
                });
                if (loaded) {
                    anthology = std::move(loaded->first);
                    outcome.reused = true;
                    break;
                }
                if (config.anthology_path) {
                    anthology = load_anthology(*config.anthology_path).items;
                } else if (config.method == MethodKind::anthology_natural) {
                    auto provider = make_provider(provider_spec(config, "generate"));
                    anthology = generate_natural(config.generate_count, *provider, config.natural,
                                                 config.seed("generate"));
                } else {
                    auto provider = make_provider(provider_spec(config, "generate"));
                    anthology.assign(in.humans.size(), Backstory{});
                    parallel_for(in.humans.size(), config.natural.workers, [&](std::size_t i) {
                        const auto& human = in.humans[i];
                        Rng rng(derive_seed(config.seed("generate"), human.id));
                        anthology[i] = generate_demographics_primed(human.traits, in.scheme, config.preamble_style,
                                                                    *provider, rng, "dp-" + human.id, config.primed);
                    });
                }
                require(!anthology.empty(), ErrorCode::SchemaError, "anthology is empty");
                save_anthology(path, anthology, meta);
                break;
            }
            case Stage::profile: {
                const auto path = dir / artifacts::personas;
                auto loaded = reuse(path, digest, options.force, [](const auto& p) {
                    auto l = load_personas(p);
                    return std::make_pair(std::move(l.items), std::move(l.meta));
                });
                if (loaded) {
                    personas = std::move(loaded->first);
                    outcome.reused = true;
                    break;
                }
                auto sampler = make_provider(provider_spec(config, "profile"));
                auto extractor = config.providers.count("extract") ? make_provider(provider_spec(config, "extract"))
                                                                   : sampler;
                ProfileOptions profile = config.profile;
                profile.workers = 1;
                personas.assign(anthology.size(), VirtualPersona{});
                parallel_for(anthology.size(), config.workers, [&](std::size_t i) {
                    Rng rng(derive_seed(config.seed("profile"), anthology[i].id));
                    personas[i] = profile_persona(anthology[i], in.scheme,
                                                  ProfileProviders{*sampler, profile.extract ? extractor.get() : nullptr},
                                                  rng, profile);
                });
                save_personas(path, personas, meta);
                break;
            }
            case Stage::match: {
                const auto path = dir / artifacts::matching;
                auto loaded = reuse(path, digest, options.force, [](const auto& p) {
                    ArtifactMeta m;
                    auto r = load_matching(p, &m);
                    return std::make_pair(std::move(r), std::move(m));
                });
                if (loaded) {
                    matching = std::move(loaded->first);
                    matching.validate(personas.size());
                    outcome.reused = true;
                    break;
                }
                const auto weights = weight_matrix(in.humans, personas, in.scheme, config.edge_weights, config.workers);
                Rng rng(config.seed("match"));
                matching = match(weights, config.matching, rng);
                for (const auto& w : matching.warnings) log()->warn("match: {}", w);
                save_matching(path, matching, meta);
                break;
            }
            case Stage::survey: {
                const auto path = dir / artifacts::responses;
                const auto audit_path = dir / artifacts::responses_audit;
                auto loaded = reuse(path, digest, options.force, [&](const auto& p) {
                    ArtifactMeta m, audit_meta;
                    auto matrix = load_response_matrix(p, &m);
                    auto f = parse_audit_failures(read_text_file(audit_path), &audit_meta);
                    if (audit_meta != m) fail(ErrorCode::SchemaError, "audit does not belong to responses");
                    matrix.validate_against(in.survey);
                    return std::make_pair(std::make_pair(std::move(matrix), std::move(f)), std::move(m));
                });
                if (loaded) {
                    responses = std::move(loaded->first.first);
                    failures = std::move(loaded->first.second);
                    outcome.reused = true;
                    break;
                }
                std::vector<CohortMember> cohort;
                switch (config.method) {
                case MethodKind::bio: cohort = demographic_cohort(in.humans, PreambleStyle::biography); break;
                case MethodKind::qa: cohort = demographic_cohort(in.humans, PreambleStyle::question_answer); break;
                case MethodKind::anthology_natural:
                    cohort = natural_cohort(assign_traits(matching, in.humans, personas), anthology,
                                            config.preamble_style);
                    break;
                case MethodKind::anthology_dp: cohort = primed_cohort(anthology); break;
                }
                auto provider = make_provider(provider_spec(config, "survey"));
                auto cohort_result = run_cohort(cohort, in.survey, in.scheme, *provider, config.seed("survey"),
                                                CohortOptions{config.administer, config.workers});
                failures = cohort_result.failures;
                for (const auto& f : failures) log()->warn("run-survey: {}", f);
                if (failures.size() == cohort.size()) {
                    const auto code = cohort_result.records.front().error_code.value_or(ErrorCode::InvalidArgument);
                    fail(code, "every respondent failed; first: " + failures.front());
                }
                save_response_matrix(path, cohort_result.matrix, meta);
                write_text_file(audit_path, audit_to_json(cohort_result.records, meta));
                responses = std::move(cohort_result.matrix);
                break;
            }
            case Stage::evaluate: {
                const auto path = dir / artifacts::report;
                auto loaded = reuse(path, digest, options.force, [](const auto& p) {
                    ArtifactMeta m;
                    auto r = parse_report_json(read_text_file(p), &m);
                    return std::make_pair(std::move(r), std::move(m));
                });
                if (loaded) {
                    write_text_file(dir / artifacts::report_csv, report_to_csv(loaded->first));
                    outcome.reused = true;
                    break;
                }
                const ResponseMatrix human = human_response_matrix(in.humans, in.survey);
                ReportDocument report;
                report.method = std::string(to_string(config.method));
                if (config.method == MethodKind::anthology_natural) {
                    report.method += "/" + std::string(to_string(config.matching));
                }
                report.wave = config.wave.empty() ? in.scheme.wave_tag : config.wave;
                report.overall = evaluate(*responses, human, in.survey);
                for (const auto& g : config.subgroups) {
                    auto groups = evaluate_subgroups(*responses, human, in.survey, in.humans, in.scheme,
                                                     Grouping::by_variable(g.variable_id, g.bands));
                    for (auto& r : groups) {
                        r.group = g.variable_id + "=" + r.group;
                        report.subgroups.push_back(std::move(r));
                    }
                }
                if (config.lower_bound_iterations > 0) {
                    report.lower_bound = human_lower_bound(human, in.survey, config.lower_bound_iterations,
                                                           config.seed("lower_bound"), config.workers);
                }
                report.failures = failures;
                write_text_file(path, report_to_json(report, meta));
                write_text_file(dir / artifacts::report_csv, report_to_csv(report));
                break;
            }
            }
        } catch (const StageError&) {
            throw;
        } catch (const Error& e) {
            log()->error("stage {} failed: {}", to_string(stage), e.what());
            throw StageError(std::string(to_string(stage)), e.code(), e.what());
        } catch (const std::filesystem::filesystem_error& e) {
            throw StageError(std::string(to_string(stage)), ErrorCode::IoError, e.what());
        }
        log()->info("stage {}: {}", to_string(stage), outcome.reused ? "reused" : "done");
        result.stages.push_back(outcome);
        write_manifest(config, plan, result.stages);
    }
    return result;
}

} // namespace vpersona
