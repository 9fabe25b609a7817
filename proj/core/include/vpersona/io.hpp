#pragma once

#include "vpersona/matching.hpp"
#include "vpersona/metrics.hpp"
#include "vpersona/persona_model.hpp"
#include "vpersona/survey_runner.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vpersona {

/// Provenance stamped into every artifact: config digest, seeds, stage
/// digests. Sorted keys keep the serialized form stable.
using ArtifactMeta = std::map<std::string, std::string>;

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
/// Writes through a sibling temp file and renames, so readers never see a
/// half-written artifact. Creates parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view content);

// --- Definitions -----------------------------------------------------------

[[nodiscard]] DemographicScheme parse_scheme_json(std::string_view text);
[[nodiscard]] DemographicScheme load_scheme(const std::filesystem::path& path);
[[nodiscard]] std::string scheme_to_json(const DemographicScheme& scheme);

[[nodiscard]] Survey parse_survey_json(std::string_view text);
[[nodiscard]] Survey load_survey(const std::filesystem::path& path);
[[nodiscard]] std::string survey_to_json(const Survey& survey);

// --- Anthologies and personas (JSONL) --------------------------------------
//
// The first line may be a header {"artifact": ..., "meta": {...}}; every
// other line is one record. Records without provenance or generation
// metadata are read as natural backstories, which lets external corpora with
// just {"id", "text"} be imported directly.

template <typename T>
struct Loaded {
    std::vector<T> items;
    ArtifactMeta meta;
};

[[nodiscard]] std::string anthology_to_jsonl(std::span<const Backstory> stories, const ArtifactMeta& meta = {});
[[nodiscard]] Loaded<Backstory> parse_anthology_jsonl(std::string_view text);
void save_anthology(const std::filesystem::path& path, std::span<const Backstory> stories, const ArtifactMeta& meta = {});
[[nodiscard]] Loaded<Backstory> load_anthology(const std::filesystem::path& path);

[[nodiscard]] std::string personas_to_jsonl(std::span<const VirtualPersona> personas, const ArtifactMeta& meta = {});
[[nodiscard]] Loaded<VirtualPersona> parse_personas_jsonl(std::string_view text);
void save_personas(const std::filesystem::path& path, std::span<const VirtualPersona> personas,
                   const ArtifactMeta& meta = {});
[[nodiscard]] Loaded<VirtualPersona> load_personas(const std::filesystem::path& path);

// --- Matching ---------------------------------------------------------------

[[nodiscard]] std::string matching_to_json(const MatchingResult& result, const ArtifactMeta& meta = {});
[[nodiscard]] MatchingResult parse_matching_json(std::string_view text, ArtifactMeta* meta = nullptr);
void save_matching(const std::filesystem::path& path, const MatchingResult& result, const ArtifactMeta& meta = {});
[[nodiscard]] MatchingResult load_matching(const std::filesystem::path& path, ArtifactMeta* meta = nullptr);

// --- Response matrices ------------------------------------------------------
//
// CSV: an optional "# key=value;key=value" comment line, a header
// "respondent_id,<question ids>", then one canonical index or NA per cell.

[[nodiscard]] std::string response_matrix_to_csv(const ResponseMatrix& matrix, const ArtifactMeta& meta = {});
[[nodiscard]] ResponseMatrix parse_response_matrix_csv(std::string_view text, ArtifactMeta* meta = nullptr);
void save_response_matrix(const std::filesystem::path& path, const ResponseMatrix& matrix,
                          const ArtifactMeta& meta = {});
[[nodiscard]] ResponseMatrix load_response_matrix(const std::filesystem::path& path, ArtifactMeta* meta = nullptr);

/// Full per-question rendering and reply for every respondent.
[[nodiscard]] std::string audit_to_json(std::span<const AdministrationRecord> records, const ArtifactMeta& meta = {});
/// "respondent: error" for each failed administration in an audit document.
[[nodiscard]] std::vector<std::string> parse_audit_failures(std::string_view text, ArtifactMeta* meta = nullptr);

// --- Reports ----------------------------------------------------------------

struct ReportDocument {
    std::string method;
    std::string wave;
    MetricsReport overall;
    std::vector<SubgroupReport> subgroups;
    std::optional<LowerBoundReport> lower_bound;
    /// Respondents whose administration failed.
    std::vector<std::string> failures;

    friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

[[nodiscard]] std::string report_to_json(const ReportDocument& report, const ArtifactMeta& meta = {});
[[nodiscard]] ReportDocument parse_report_json(std::string_view text, ArtifactMeta* meta = nullptr);
/// One row per method x wave x group ("all" for the whole cohort).
[[nodiscard]] std::string report_to_csv(const ReportDocument& report);
[[nodiscard]] std::string lower_bound_to_json(const LowerBoundReport& report, const ArtifactMeta& meta = {});

// --- Respondent ingestion ---------------------------------------------------

/// CSV with a header row holding respondent_id, one column per scheme
/// variable and one per survey question. Cells hold option labels.
/// Demographic labels must resolve (UnknownOptionLabel); answer labels that do
/// not resolve, including empty cells, "NA" and refusals, become missing.
/// Missing columns or duplicate ids raise SchemaError.
[[nodiscard]] std::vector<HumanRespondent> ingest_respondents(const std::filesystem::path& path,
                                                              const DemographicScheme& scheme, const Survey& survey);
[[nodiscard]] std::vector<HumanRespondent> parse_respondents_csv(std::string_view text,
                                                                 const DemographicScheme& scheme,
                                                                 const Survey& survey);

/// Inverse of parse_respondents_csv: option labels, empty cells for missing
/// answers, columns in scheme then survey order.
[[nodiscard]] std::string respondents_to_csv(std::span<const HumanRespondent> humans, const DemographicScheme& scheme,
                                             const Survey& survey);

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
[[nodiscard]] std::vector<std::vector<std::string>> parse_csv(std::string_view text);
[[nodiscard]] std::string csv_escape(std::string_view field);

} // namespace vpersona
