#include "cli.hpp"

#include "vpersona/io.hpp"
#include "vpersona/metrics.hpp"
#include "vpersona/pipeline.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace vpersona {

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool force = false;
    std::string log_level = "warn";
};

void add_common(CLI::App& cmd, CommonFlags& flags, bool config_required) {
    auto* c = cmd.add_option("--config,-c", flags.config, "Pipeline TOML file");
    if (config_required) c->required();
    cmd.add_option("--seed", flags.seed, "Override the master seed");
    cmd.add_option("--out,-o", flags.out, "Override the output directory");
    cmd.add_flag("--force", flags.force, "Recompute even if a matching artifact exists");
    cmd.add_option("--log-level", flags.log_level, "debug, info, warn, error or off")->capture_default_str();
}

PipelineConfig configured(const CommonFlags& flags) {
    PipelineConfig config = load_pipeline_config(flags.config);
    if (flags.seed) config.master_seed = *flags.seed;
    if (!flags.out.empty()) config.output_dir = flags.out;
    return config;
}

void report_run(const RunResult& result, std::ostream& out) {
    for (const auto& stage : result.stages) {
        out << "stage " << to_string(stage.stage) << ": " << (stage.reused ? "reused" : "done") << "\n";
    }
    out << "output: " << result.output_dir.string() << "\n";
}

int run_stage(const CommonFlags& flags, PipelineConfig config, Stage until, std::ostream& out) {
    set_log_level(flags.log_level);
    report_run(run_pipeline(config, RunOptions{until, flags.force}), out);
    return 0;
}

} // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Survey simulation with backstory-conditioned virtual personas", "vpersona"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "vpersona 0.1.0");

    CommonFlags flags;

    auto* generate = app.add_subcommand("generate", "Generate an anthology of backstories");
    std::string generate_kind;
    generate->add_option("kind", generate_kind, "natural or dp")->required()->check(CLI::IsMember({"natural", "dp"}));
    add_common(*generate, flags, true);

    auto* profile = app.add_subcommand("profile", "Estimate demographic trait distributions of each backstory");
    add_common(*profile, flags, true);

    auto* match = app.add_subcommand("match", "Match personas to the human cohort");
    std::string match_method;
    match->add_option("--method", match_method, "greedy, max_weight or random")
        ->check(CLI::IsMember({"greedy", "max_weight", "max-weight", "hungarian", "random"}));
    add_common(*match, flags, true);

    auto* survey = app.add_subcommand("run-survey", "Administer the survey to the conditioned cohort");
    std::string survey_method;
    survey->add_option("--method", survey_method, "bio, qa, anthology_natural or anthology_dp");
    add_common(*survey, flags, true);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score virtual responses against human responses");
    std::string virtual_csv, human_csv, survey_json, respondents_csv, scheme_json;
    evaluate_cmd->add_option("--virtual", virtual_csv, "Virtual response matrix CSV");
    evaluate_cmd->add_option("--human", human_csv, "Human response matrix CSV");
    evaluate_cmd->add_option("--respondents", respondents_csv, "Respondents CSV (instead of --human)");
    evaluate_cmd->add_option("--scheme", scheme_json, "Demographic scheme JSON (with --respondents)");
    evaluate_cmd->add_option("--survey", survey_json, "Survey JSON");
    add_common(*evaluate_cmd, flags, false);

    auto* lower = app.add_subcommand("lower-bound", "Human split-half lower bound");
    std::size_t iterations = 100;
    lower->add_option("--human", human_csv, "Human response matrix CSV");
    lower->add_option("--respondents", respondents_csv, "Respondents CSV (instead of --human)");
    lower->add_option("--scheme", scheme_json, "Demographic scheme JSON (with --respondents)");
    lower->add_option("--survey", survey_json, "Survey JSON");
    lower->add_option("--iterations", iterations, "Number of random splits")->capture_default_str();
    add_common(*lower, flags, false);

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage the configured method needs");
    add_common(*pipeline, flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: UsageError: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        auto human_matrix = [&](const Survey& s) {
            if (!human_csv.empty()) return load_response_matrix(human_csv);
            if (respondents_csv.empty() || scheme_json.empty()) {
                fail(ErrorCode::UsageError, "give --human, or --respondents with --scheme");
            }
            const auto humans = ingest_respondents(respondents_csv, load_scheme(scheme_json), s);
            return human_response_matrix(humans, s);
        };

        if (*generate) {
            auto config = configured(flags);
            config.method = generate_kind == "dp" ? MethodKind::anthology_dp : MethodKind::anthology_natural;
            return run_stage(flags, std::move(config), Stage::generate, out);
        }
        if (*profile) return run_stage(flags, configured(flags), Stage::profile, out);
        if (*match) {
            auto config = configured(flags);
            if (!match_method.empty()) config.matching = parse_matching_method(match_method);
            return run_stage(flags, std::move(config), Stage::match, out);
        }
        if (*survey) {
            auto config = configured(flags);
            if (!survey_method.empty()) config.method = parse_method_kind(survey_method);
            return run_stage(flags, std::move(config), Stage::survey, out);
        }
        if (*pipeline) {
            set_log_level(flags.log_level);
            report_run(run_pipeline(configured(flags), RunOptions{std::nullopt, flags.force}), out);
            return 0;
        }
        if (*evaluate_cmd) {
            if (!flags.config.empty()) return run_stage(flags, configured(flags), Stage::evaluate, out);
            if (virtual_csv.empty() || survey_json.empty()) {
                fail(ErrorCode::UsageError, "evaluate needs --config, or --virtual, --survey and human responses");
            }
            const Survey s = load_survey(survey_json);
            ReportDocument report;
            report.overall = evaluate(load_response_matrix(virtual_csv), human_matrix(s), s);
            const std::string json = report_to_json(report);
            if (flags.out.empty()) {
                out << json;
            } else {
                write_text_file(flags.out, json);
                out << "report: " << flags.out << "\n";
            }
            return 0;
        }
        if (*lower) {
            std::optional<ResponseMatrix> human;
            std::optional<Survey> s;
            std::uint64_t seed = flags.seed.value_or(0);
            if (!flags.config.empty()) {
                const auto config = load_pipeline_config(flags.config);
                s = load_survey(config.survey_path);
                const auto humans = ingest_respondents(config.respondents_path, load_scheme(config.scheme_path), *s);
                human.emplace(human_response_matrix(humans, *s));
                if (!flags.seed) seed = config.seed("lower_bound");
            } else {
                if (survey_json.empty()) fail(ErrorCode::UsageError, "lower-bound needs --config or --survey");
                s = load_survey(survey_json);
                human.emplace(human_matrix(*s));
            }
            const auto report = human_lower_bound(*human, *s, iterations, seed);
            ArtifactMeta meta{{"seed.lower_bound", std::to_string(seed)}};
            const std::string json = lower_bound_to_json(report, meta);
            if (flags.out.empty()) {
                out << json;
            } else {
                write_text_file(flags.out, json);
                out << "lower bound: " << flags.out << "\n";
            }
            return 0;
        }
    } catch (const StageError& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return e.code() == ErrorCode::UsageError ? kExitUsage : kExitFailure;
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return e.code() == ErrorCode::UsageError ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        err << "error: InternalError: " << e.what() << "\n";
        return kExitFailure;
    }
    err << "error: UsageError: no subcommand\n" << app.help();
    return kExitUsage;
}

} // namespace vpersona
