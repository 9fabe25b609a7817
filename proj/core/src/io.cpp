#include "vpersona/io.hpp"

#include "vpersona/error.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace vpersona {

using Json = nlohmann::ordered_json;

namespace {

Json parse_json(std::string_view text, std::string_view what) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::exception& e) {
        fail(ErrorCode::SchemaError, std::string(what) + ": invalid JSON: " + e.what());
    }
}

template <typename T>
T field(const Json& j, const char* key, std::string_view what) {
    if (!j.is_object() || !j.contains(key)) {
        fail(ErrorCode::SchemaError, std::string(what) + ": missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        fail(ErrorCode::SchemaError, std::string(what) + ": field '" + key + "' has the wrong type: " + e.what());
    }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback, std::string_view what) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    return field<T>(j, key, what);
}

std::string lower_trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out(s.substr(b, e - b));
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

Json meta_json(const ArtifactMeta& meta) {
    Json j = Json::object();
    for (const auto& [k, v] : meta) j[k] = v;
    return j;
}

ArtifactMeta meta_from(const Json& j) {
    ArtifactMeta meta;
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
    return meta;
}

Json optional_double(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

std::optional<double> read_optional_double(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

// --- traits, stories, personas ---

Json traits_json(const TraitTuple& traits) {
    Json arr = Json::array();
    for (const auto& t : traits) arr.push_back({{"variable_id", t.variable_id}, {"option_index", t.option_index}});
    return arr;
}

TraitTuple traits_from(const Json& j, std::string_view what) {
    TraitTuple traits;
    if (!j.is_array()) fail(ErrorCode::SchemaError, std::string(what) + ": traits must be an array");
    for (const auto& t : j) {
        traits.push_back({field<std::string>(t, "variable_id", what), field<std::size_t>(t, "option_index", what)});
    }
    return traits;
}

Json backstory_json(const Backstory& s) {
    Json j;
    j["id"] = s.id;
    j["text"] = s.text;
    j["provenance"] = {{"kind", to_string(s.provenance.kind)},
                       {"traits", traits_json(s.provenance.traits)},
                       {"style", to_string(s.provenance.style)}};
    const auto& g = s.generation_meta;
    j["generation_meta"] = {{"model_id", g.model_id},
                            {"temperature", g.temperature},
                            {"top_p", g.top_p},
                            {"template_id", g.template_id},
                            {"seed", g.seed ? Json(*g.seed) : Json(nullptr)}};
    return j;
}

Backstory backstory_from(const Json& j) {
    const std::string what = "anthology record";
    Backstory s;
    s.id = field<std::string>(j, "id", what);
    s.text = field<std::string>(j, "text", what);
    if (j.contains("provenance") && !j["provenance"].is_null()) {
        const auto& p = j["provenance"];
        s.provenance.kind = parse_provenance_kind(field_or<std::string>(p, "kind", "natural", what));
        if (p.contains("traits")) s.provenance.traits = traits_from(p["traits"], what);
        s.provenance.style = parse_preamble_style(field_or<std::string>(p, "style", "question_answer", what));
    }
    if (j.contains("generation_meta") && !j["generation_meta"].is_null()) {
        const auto& g = j["generation_meta"];
        s.generation_meta.model_id = field_or<std::string>(g, "model_id", "", what);
        s.generation_meta.temperature = field_or<double>(g, "temperature", 1.0, what);
        s.generation_meta.top_p = field_or<double>(g, "top_p", 1.0, what);
        s.generation_meta.template_id = field_or<std::string>(g, "template_id", "", what);
        if (g.contains("seed") && !g["seed"].is_null()) s.generation_meta.seed = g["seed"].get<std::uint64_t>();
    }
    s.validate();
    return s;
}

Json persona_json(const VirtualPersona& p) {
    Json j;
    j["backstory_id"] = p.backstory_id;
    Json dists = Json::array();
    for (const auto& d : p.distributions) {
        dists.push_back({{"variable_id", d.variable_id},
                         {"probs", d.probs},
                         {"source", to_string(d.source)},
                         {"n_samples", d.n_samples},
                         {"parse_failures", d.parse_failures}});
    }
    j["distributions"] = std::move(dists);
    j["assigned_traits"] = p.assigned_traits ? traits_json(*p.assigned_traits) : Json(nullptr);
    return j;
}

VirtualPersona persona_from(const Json& j) {
    const std::string what = "persona record";
    VirtualPersona p;
    p.backstory_id = field<std::string>(j, "backstory_id", what);
    for (const auto& d : field<Json>(j, "distributions", what)) {
        TraitDistribution dist;
        dist.variable_id = field<std::string>(d, "variable_id", what);
        dist.probs = field<std::vector<double>>(d, "probs", what);
        dist.source = parse_distribution_source(field_or<std::string>(d, "source", "sampled", what));
        dist.n_samples = field_or<std::size_t>(d, "n_samples", 0, what);
        dist.parse_failures = field_or<std::size_t>(d, "parse_failures", 0, what);
        dist.validate();
        p.distributions.push_back(std::move(dist));
    }
    if (j.contains("assigned_traits") && !j["assigned_traits"].is_null()) {
        p.assigned_traits = traits_from(j["assigned_traits"], what);
    }
    return p;
}

template <typename T, typename ToJson>
std::string to_jsonl(std::string_view artifact, std::span<const T> items, const ArtifactMeta& meta, ToJson to_json) {
    std::string out = Json{{"artifact", artifact}, {"meta", meta_json(meta)}}.dump() + "\n";
    for (const auto& item : items) out += to_json(item).dump() + "\n";
    return out;
}

template <typename T, typename FromJson>
Loaded<T> from_jsonl(std::string_view text, std::string_view what, FromJson from_json) {
    Loaded<T> loaded;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        const Json j = parse_json(line, std::string(what) + " line " + std::to_string(line_no));
        if (line_no == 1 && j.is_object() && j.contains("artifact")) {
            loaded.meta = meta_from(j.value("meta", Json::object()));
            continue;
        }
        try {
            loaded.items.push_back(from_json(j));
        } catch (const Error& e) {
            fail(e.code(), std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return loaded;
}

Json metrics_json(const MetricsReport& r) {
    Json per = Json::object();
    for (const auto& [id, wd] : r.per_question_wd) per[id] = wd;
    return {{"per_question_wd", per},
            {"avg_wd", r.avg_wd},
            {"frobenius_gap", r.frobenius_gap},
            {"cronbach_alpha_virtual", optional_double(r.cronbach_alpha_virtual)},
            {"cronbach_alpha_human", optional_double(r.cronbach_alpha_human)},
            {"n_effective", r.n_effective},
            {"n_effective_human", r.n_effective_human},
            {"n_virtual", r.n_virtual},
            {"n_human", r.n_human},
            {"warnings", r.warnings}};
}

MetricsReport metrics_from(const Json& j) {
    const std::string what = "metrics report";
    MetricsReport r;
    const Json per = field<Json>(j, "per_question_wd", what);
    for (const auto& [id, wd] : per.items()) {
        r.per_question_wd.emplace_back(id, wd.get<double>());
    }
    r.avg_wd = field<double>(j, "avg_wd", what);
    r.frobenius_gap = field<double>(j, "frobenius_gap", what);
    r.cronbach_alpha_virtual = read_optional_double(j, "cronbach_alpha_virtual");
    r.cronbach_alpha_human = read_optional_double(j, "cronbach_alpha_human");
    r.n_effective = field<std::size_t>(j, "n_effective", what);
    r.n_effective_human = field_or<std::size_t>(j, "n_effective_human", 0, what);
    r.n_virtual = field_or<std::size_t>(j, "n_virtual", 0, what);
    r.n_human = field_or<std::size_t>(j, "n_human", 0, what);
    r.warnings = field_or<std::vector<std::string>>(j, "warnings", {}, what);
    return r;
}

Json lower_bound_json(const LowerBoundReport& r) {
    return {{"iterations", r.iterations},
            {"respondents", r.respondents},
            {"avg_wd", r.avg_wd},
            {"frobenius_gap", r.frobenius_gap},
            {"alpha_split_mean", optional_double(r.alpha_split_mean)},
            {"alpha_full_cohort", optional_double(r.alpha_full_cohort)},
            {"undefined_alpha_halves", r.undefined_alpha_halves},
            {"seed", r.seed}};
}

LowerBoundReport lower_bound_from(const Json& j) {
    const std::string what = "lower bound";
    LowerBoundReport r;
    r.iterations = field<std::size_t>(j, "iterations", what);
    r.respondents = field<std::size_t>(j, "respondents", what);
    r.avg_wd = field<double>(j, "avg_wd", what);
    r.frobenius_gap = field<double>(j, "frobenius_gap", what);
    r.alpha_split_mean = read_optional_double(j, "alpha_split_mean");
    r.alpha_full_cohort = read_optional_double(j, "alpha_full_cohort");
    r.undefined_alpha_halves = field<std::size_t>(j, "undefined_alpha_halves", what);
    r.seed = field<std::uint64_t>(j, "seed", what);
    return r;
}

std::string format_double(std::optional<double> v) {
    if (!v) return "";
    return Json(*v).dump();
}

} // namespace

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) fail(ErrorCode::IoError, "short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::IoError, "cannot rename into '" + path.string() + "': " + ec.message());
}

DemographicScheme parse_scheme_json(std::string_view text) {
    const Json j = parse_json(text, "scheme");
    const std::string what = "scheme";
    DemographicScheme scheme;
    scheme.wave_tag = field_or<std::string>(j, "wave_tag", "", what);
    for (const auto& v : field<Json>(j, "variables", what)) {
        DemographicVariable var;
        var.id = field<std::string>(v, "id", what);
        var.question_text = v.contains("question") ? field<std::string>(v, "question", what)
                                                   : field<std::string>(v, "question_text", what);
        var.options = field<std::vector<std::string>>(v, "options", what);
        var.kind = parse_variable_kind(field_or<std::string>(v, "kind", "nominal", what));
        var.extraction_eligible = field_or<bool>(v, "extraction_eligible", false, what);
        var.bio_template = field_or<std::string>(v, "bio_template", "", what);
        scheme.variables.push_back(std::move(var));
    }
    scheme.validate();
    return scheme;
}

DemographicScheme load_scheme(const std::filesystem::path& path) { return parse_scheme_json(read_text_file(path)); }

std::string scheme_to_json(const DemographicScheme& scheme) {
    Json vars = Json::array();
    for (const auto& v : scheme.variables) {
        vars.push_back({{"id", v.id},
                        {"question", v.question_text},
                        {"options", v.options},
                        {"kind", to_string(v.kind)},
                        {"extraction_eligible", v.extraction_eligible},
                        {"bio_template", v.bio_template}});
    }
    return Json{{"wave_tag", scheme.wave_tag}, {"variables", vars}}.dump(2) + "\n";
}

Survey parse_survey_json(std::string_view text) {
    const Json j = parse_json(text, "survey");
    const std::string what = "survey";
    Survey survey;
    survey.id = field_or<std::string>(j, "id", "", what);
    for (const auto& q : field<Json>(j, "questions", what)) {
        SurveyQuestion question;
        question.id = field<std::string>(q, "id", what);
        question.text = field<std::string>(q, "text", what);
        question.options = field<std::vector<std::string>>(q, "options", what);
        question.scale = parse_question_scale(field_or<std::string>(q, "scale", "likert_reversible", what));
        if (q.contains("preamble") && !q["preamble"].is_null()) question.preamble = q["preamble"].get<std::string>();
        survey.questions.push_back(std::move(question));
    }
    survey.validate();
    return survey;
}

Survey load_survey(const std::filesystem::path& path) { return parse_survey_json(read_text_file(path)); }

std::string survey_to_json(const Survey& survey) {
    Json qs = Json::array();
    for (const auto& q : survey.questions) {
        Json jq = {{"id", q.id}, {"text", q.text}, {"options", q.options}, {"scale", to_string(q.scale)}};
        if (q.preamble) jq["preamble"] = *q.preamble;
        qs.push_back(std::move(jq));
    }
    return Json{{"id", survey.id}, {"questions", qs}}.dump(2) + "\n";
}

std::string anthology_to_jsonl(std::span<const Backstory> stories, const ArtifactMeta& meta) {
    return to_jsonl<Backstory>("anthology", stories, meta, backstory_json);
}

Loaded<Backstory> parse_anthology_jsonl(std::string_view text) {
    auto loaded = from_jsonl<Backstory>(text, "anthology", backstory_from);
    std::set<std::string> ids;
    for (const auto& s : loaded.items) {
        require(ids.insert(s.id).second, ErrorCode::SchemaError, "anthology: duplicate backstory id '" + s.id + "'");
    }
    return loaded;
}

void save_anthology(const std::filesystem::path& path, std::span<const Backstory> stories, const ArtifactMeta& meta) {
    write_text_file(path, anthology_to_jsonl(stories, meta));
}

Loaded<Backstory> load_anthology(const std::filesystem::path& path) {
    return parse_anthology_jsonl(read_text_file(path));
}

std::string personas_to_jsonl(std::span<const VirtualPersona> personas, const ArtifactMeta& meta) {
    return to_jsonl<VirtualPersona>("personas", personas, meta, persona_json);
}

Loaded<VirtualPersona> parse_personas_jsonl(std::string_view text) {
    return from_jsonl<VirtualPersona>(text, "personas", persona_from);
}

void save_personas(const std::filesystem::path& path, std::span<const VirtualPersona> personas,
                   const ArtifactMeta& meta) {
    write_text_file(path, personas_to_jsonl(personas, meta));
}

Loaded<VirtualPersona> load_personas(const std::filesystem::path& path) {
    return parse_personas_jsonl(read_text_file(path));
}

std::string matching_to_json(const MatchingResult& result, const ArtifactMeta& meta) {
    Json j = {{"artifact", "matching"},
              {"meta", meta_json(meta)},
              {"method", to_string(result.method)},
              {"assignment", result.assignment},
              {"pair_weights", result.pair_weights},
              {"total_weight", result.total_weight},
              {"warnings", result.warnings}};
    return j.dump(2) + "\n";
}

MatchingResult parse_matching_json(std::string_view text, ArtifactMeta* meta) {
    const Json j = parse_json(text, "matching");
    const std::string what = "matching";
    MatchingResult r;
    r.method = parse_matching_method(field<std::string>(j, "method", what));
    r.assignment = field<std::vector<std::size_t>>(j, "assignment", what);
    r.pair_weights = field<std::vector<double>>(j, "pair_weights", what);
    r.total_weight = field<double>(j, "total_weight", what);
    r.warnings = field_or<std::vector<std::string>>(j, "warnings", {}, what);
    if (meta) *meta = meta_from(j.value("meta", Json::object()));
    return r;
}

void save_matching(const std::filesystem::path& path, const MatchingResult& result, const ArtifactMeta& meta) {
    write_text_file(path, matching_to_json(result, meta));
}

MatchingResult load_matching(const std::filesystem::path& path, ArtifactMeta* meta) {
    return parse_matching_json(read_text_file(path), meta);
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        if (c == '"' && cell.empty()) {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(cell));
            cell.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !cell.empty()) {
                row.push_back(std::move(cell));
                rows.push_back(std::move(row));
            }
            row.clear();
            cell.clear();
            any = false;
        } else {
            cell += c;
            any = true;
        }
    }
    require(!quoted, ErrorCode::SchemaError, "csv: unterminated quoted field");
    if (any || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string response_matrix_to_csv(const ResponseMatrix& matrix, const ArtifactMeta& meta) {
    std::string out;
    if (!meta.empty()) {
        out += "# ";
        bool first = true;
        for (const auto& [k, v] : meta) {
            require(k.find_first_of(";=\n") == std::string::npos && v.find_first_of(";\n") == std::string::npos,
                    ErrorCode::InvalidArgument, "csv meta keys and values may not contain ';' or newlines");
            out += (first ? "" : ";") + k + "=" + v;
            first = false;
        }
        out += "\n";
    }
    out += "respondent_id";
    for (const auto& q : matrix.question_ids()) out += "," + csv_escape(q);
    out += "\n";
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        out += csv_escape(matrix.respondent_ids()[r]);
        for (std::size_t c = 0; c < matrix.cols(); ++c) {
            const Answer a = matrix.at(r, c);
            out += a.is_missing() ? ",NA" : "," + std::to_string(a.index());
        }
        out += "\n";
    }
    return out;
}

ResponseMatrix parse_response_matrix_csv(std::string_view text, ArtifactMeta* meta) {
    if (text.starts_with("#")) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(1, eol == std::string_view::npos ? std::string_view::npos : eol - 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty() && line.front() == ' ') line.remove_prefix(1);
        if (meta) {
            meta->clear();
            std::size_t start = 0;
            while (start <= line.size() && !line.empty()) {
                auto end = line.find(';', start);
                if (end == std::string_view::npos) end = line.size();
                const auto pair = line.substr(start, end - start);
                const auto eq = pair.find('=');
                if (eq != std::string_view::npos) (*meta)[std::string(pair.substr(0, eq))] = std::string(pair.substr(eq + 1));
                start = end + 1;
                if (end == line.size()) break;
            }
        }
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    } else if (meta) {
        meta->clear();
    }
    const auto rows = parse_csv(text);
    require(!rows.empty() && !rows[0].empty() && rows[0][0] == "respondent_id", ErrorCode::SchemaError,
            "response csv: header must start with respondent_id");
    std::vector<std::string> questions(rows[0].begin() + 1, rows[0].end());
    std::vector<std::string> ids;
    std::vector<Answer> cells;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        require(rows[r].size() == rows[0].size(), ErrorCode::SchemaError,
                "response csv: row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                    " fields, expected " + std::to_string(rows[0].size()));
        ids.push_back(rows[r][0]);
        for (std::size_t c = 1; c < rows[r].size(); ++c) {
            const std::string& cell = rows[r][c];
            if (cell.empty() || cell == "NA") {
                cells.push_back(Answer::missing());
                continue;
            }
            std::size_t value = 0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            require(ec == std::errc{} && ptr == cell.data() + cell.size(), ErrorCode::SchemaError,
                    "response csv: cell '" + cell + "' is neither an option index nor NA");
            cells.push_back(Answer::of(value));
        }
    }
    return ResponseMatrix(std::move(ids), std::move(questions), std::move(cells));
}

void save_response_matrix(const std::filesystem::path& path, const ResponseMatrix& matrix, const ArtifactMeta& meta) {
    write_text_file(path, response_matrix_to_csv(matrix, meta));
}

ResponseMatrix load_response_matrix(const std::filesystem::path& path, ArtifactMeta* meta) {
    return parse_response_matrix_csv(read_text_file(path), meta);
}

std::string audit_to_json(std::span<const AdministrationRecord> records, const ArtifactMeta& meta) {
    Json rs = Json::array();
    for (const auto& record : records) {
        Json entries = Json::array();
        for (const auto& e : record.transcript) {
            entries.push_back({{"question_id", e.rendered.question_id},
                               {"display_options", e.rendered.display_options},
                               {"index_map", e.rendered.index_map},
                               {"reversed", e.rendered.reversed},
                               {"shuffled", e.rendered.shuffled},
                               {"reply", e.reply},
                               {"display_position", e.display_position ? Json(*e.display_position) : Json(nullptr)},
                               {"answer", e.answer.is_missing() ? Json(nullptr) : Json(e.answer.index())},
                               {"attempts", e.attempts}});
        }
        rs.push_back({{"respondent_id", record.respondent_id},
                      {"prefix", record.prefix},
                      {"transcript", entries},
                      {"error", record.error ? Json(*record.error) : Json(nullptr)}});
    }
    return Json{{"artifact", "responses_audit"}, {"meta", meta_json(meta)}, {"records", rs}}.dump(2) + "\n";
}

std::vector<std::string> parse_audit_failures(std::string_view text, ArtifactMeta* meta) {
    const Json j = parse_json(text, "responses audit");
    std::vector<std::string> failures;
    for (const auto& r : field<Json>(j, "records", "responses audit")) {
        if (r.contains("error") && !r["error"].is_null()) {
            failures.push_back(field<std::string>(r, "respondent_id", "responses audit") + ": " +
                               r["error"].get<std::string>());
        }
    }
    if (meta) *meta = meta_from(j.value("meta", Json::object()));
    return failures;
}

std::string report_to_json(const ReportDocument& report, const ArtifactMeta& meta) {
    Json subgroups = Json::array();
    for (const auto& g : report.subgroups) {
        subgroups.push_back({{"group", g.group}, {"size", g.size}, {"report", metrics_json(g.report)}});
    }
    Json j = {{"artifact", "report"},
              {"meta", meta_json(meta)},
              {"method", report.method},
              {"wave", report.wave},
              {"overall", metrics_json(report.overall)},
              {"subgroups", subgroups},
              {"lower_bound", report.lower_bound ? lower_bound_json(*report.lower_bound) : Json(nullptr)},
              {"failures", report.failures}};
    return j.dump(2) + "\n";
}

ReportDocument parse_report_json(std::string_view text, ArtifactMeta* meta) {
    const Json j = parse_json(text, "report");
    const std::string what = "report";
    ReportDocument r;
    r.method = field_or<std::string>(j, "method", "", what);
    r.wave = field_or<std::string>(j, "wave", "", what);
    r.overall = metrics_from(field<Json>(j, "overall", what));
    for (const auto& g : field_or<Json>(j, "subgroups", Json::array(), what)) {
        r.subgroups.push_back({field<std::string>(g, "group", what), field<std::size_t>(g, "size", what),
                               metrics_from(field<Json>(g, "report", what))});
    }
    if (j.contains("lower_bound") && !j["lower_bound"].is_null()) r.lower_bound = lower_bound_from(j["lower_bound"]);
    r.failures = field_or<std::vector<std::string>>(j, "failures", {}, what);
    if (meta) *meta = meta_from(j.value("meta", Json::object()));
    return r;
}

std::string report_to_csv(const ReportDocument& report) {
    std::string out = "method,wave,group,n_virtual,n_human,n_effective,n_effective_human,avg_wd,frobenius_gap,"
                      "cronbach_alpha_virtual,cronbach_alpha_human\n";
    auto row = [&](std::string_view group, const MetricsReport& m) {
        out += csv_escape(report.method) + "," + csv_escape(report.wave) + "," + csv_escape(group) + "," +
               std::to_string(m.n_virtual) + "," + std::to_string(m.n_human) + "," + std::to_string(m.n_effective) +
               "," + std::to_string(m.n_effective_human) + "," + format_double(m.avg_wd) + "," +
               format_double(m.frobenius_gap) + "," + format_double(m.cronbach_alpha_virtual) + "," +
               format_double(m.cronbach_alpha_human) + "\n";
    };
    row("all", report.overall);
    for (const auto& g : report.subgroups) row(g.group, g.report);
    return out;
}

std::string lower_bound_to_json(const LowerBoundReport& report, const ArtifactMeta& meta) {
    return Json{{"artifact", "lower_bound"}, {"meta", meta_json(meta)}, {"lower_bound", lower_bound_json(report)}}
               .dump(2) +
           "\n";
}

std::vector<HumanRespondent> parse_respondents_csv(std::string_view text, const DemographicScheme& scheme,
                                                   const Survey& survey) {
    const auto rows = parse_csv(text);
    require(!rows.empty(), ErrorCode::SchemaError, "respondents csv: empty file");
    const auto& header = rows[0];
    std::map<std::string, std::size_t> column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        require(column.emplace(header[c], c).second, ErrorCode::SchemaError,
                "respondents csv: duplicate column '" + header[c] + "'");
    }
    std::vector<std::string> missing;
    auto need = [&](const std::string& name) {
        if (!column.count(name)) missing.push_back(name);
    };
    need("respondent_id");
    for (const auto& v : scheme.variables) need(v.id);
    for (const auto& q : survey.questions) need(q.id);
    if (!missing.empty()) {
        std::string names;
        for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
        fail(ErrorCode::SchemaError, "respondents csv: missing columns: " + names);
    }

    auto resolve = [](const std::vector<std::string>& options, const std::string& cell) -> std::optional<std::size_t> {
        for (std::size_t k = 0; k < options.size(); ++k) {
            if (options[k] == cell) return k;
        }
        const std::string key = lower_trim(cell);
        for (std::size_t k = 0; k < options.size(); ++k) {
            if (lower_trim(options[k]) == key) return k;
        }
        return std::nullopt;
    };

    std::vector<HumanRespondent> humans;
    std::set<std::string> ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        require(row.size() == header.size(), ErrorCode::SchemaError,
                "respondents csv: row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                    " fields, expected " + std::to_string(header.size()));
        HumanRespondent h;
        h.id = row[column["respondent_id"]];
        require(!h.id.empty(), ErrorCode::SchemaError, "respondents csv: empty respondent_id on row " + std::to_string(r + 1));
        require(ids.insert(h.id).second, ErrorCode::SchemaError, "respondents csv: duplicate respondent '" + h.id + "'");
        for (const auto& v : scheme.variables) {
            const std::string& cell = row[column[v.id]];
            const auto k = resolve(v.options, cell);
            if (!k) {
                fail(ErrorCode::UnknownOptionLabel,
                     "respondent '" + h.id + "', variable '" + v.id + "': unknown option label '" + cell + "'");
            }
            h.traits.push_back({v.id, *k});
        }
        for (const auto& q : survey.questions) {
            const auto k = resolve(q.options, row[column[q.id]]);
            h.answers[q.id] = k ? Answer::of(*k) : Answer::missing();
        }
        humans.push_back(std::move(h));
    }
    return humans;
}

std::vector<HumanRespondent> ingest_respondents(const std::filesystem::path& path, const DemographicScheme& scheme,
                                                const Survey& survey) {
    return parse_respondents_csv(read_text_file(path), scheme, survey);
}

std::string respondents_to_csv(std::span<const HumanRespondent> humans, const DemographicScheme& scheme,
                               const Survey& survey) {
    std::string out = "respondent_id";
    for (const auto& v : scheme.variables) out += "," + csv_escape(v.id);
    for (const auto& q : survey.questions) out += "," + csv_escape(q.id);
    out += "\n";
    for (const auto& h : humans) {
        out += csv_escape(h.id);
        for (const auto& v : scheme.variables) {
            const auto* t = find_trait(h.traits, v.id);
            require(t != nullptr, ErrorCode::InvalidArgument,
                    "respondent '" + h.id + "' has no value for '" + v.id + "'");
            out += "," + csv_escape(v.options.at(t->option_index));
        }
        for (const auto& q : survey.questions) {
            const auto it = h.answers.find(q.id);
            out += ",";
            if (it != h.answers.end() && !it->second.is_missing()) out += csv_escape(q.options.at(it->second.index()));
        }
        out += "\n";
    }
    return out;
}

} // namespace vpersona
