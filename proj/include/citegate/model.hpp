#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace citegate {

using Millis = std::chrono::milliseconds;

// Three-way severity vocabulary. Ordering: major < minor < exact.
enum class Label { major = 0, minor = 1, exact = 2 };

std::string to_string(Label label);
Label label_from_string(const std::string& s);

// Retrieval stages, in cascade order.
enum class Source {
    arxiv = 0,
    crossref = 1,
    semantic_scholar = 2,
    openalex = 3,
    web_search = 4,
};

std::string to_string(Source source);
Source source_from_string(const std::string& s);

enum class MatchMethod { arxiv_id_lookup, title_search, web_search, not_found };

std::string to_string(MatchMethod method);
MatchMethod match_method_from_string(const std::string& s);

enum class ParseMethod { rule_based, llm_fallback, failed };

std::string to_string(ParseMethod method);
ParseMethod parse_method_from_string(const std::string& s);

// A citation as it appears in a dataset: an opaque id, a topical collection
// id, and the normalized surface string "[Authors, Year, Title](URL)".
struct RawCitation {
    std::string id;
    std::string collection;
    std::string text;

    bool operator==(const RawCitation&) const = default;
};

// Bibliographic fields extracted from a citation string. Fields are optional;
// at least one of {title, url, doi, arxiv_id} is present unless parsing
// failed (a bare year or author string alone does not count as a parse).
struct ParsedCitation {
    std::optional<std::string> authors;
    std::optional<int> year;
    std::optional<std::string> title;
    std::optional<std::string> url;
    std::optional<std::string> doi;
    std::optional<std::string> arxiv_id;
    ParseMethod parse_method = ParseMethod::failed;

    bool has_core_field() const {
        return title.has_value() || url.has_value() || doi.has_value() ||
               arxiv_id.has_value();
    }

    bool operator==(const ParsedCitation&) const = default;
};

// One scholarly record returned by a retrieval stage.
struct CandidatePublication {
    std::string title;
    std::string authors;
    std::optional<int> year;
    std::optional<std::string> venue;
    std::optional<std::string> url;
    std::optional<std::string> doi;
    std::optional<std::string> arxiv_id;
    Source source = Source::crossref;
    double confidence = 0.0;  // 0..100

    bool operator==(const CandidatePublication&) const = default;
};

// Per-stage trace of one cascade run.
struct StageRecord {
    Source stage = Source::arxiv;
    bool attempted = false;
    bool accepted = false;
    std::optional<double> best_similarity;
    Millis elapsed{0};
    std::optional<std::string> error;  // SourceError kind, when the stage failed

    bool operator==(const StageRecord&) const = default;
};

// Outcome of the retrieval cascade: at most one candidate plus provenance.
struct MatchResult {
    std::optional<CandidatePublication> candidate;
    double title_similarity = 0.0;  // 0..100, 0 when no candidate
    MatchMethod match_method = MatchMethod::not_found;
    std::vector<StageRecord> stage_records;
    // Set when the returned candidate did not pass normal acceptance
    // (confidence-gate fallback, best web candidate, low-similarity
    // identifier hit).
    std::vector<std::string> fallback_flags;

    bool has_candidate() const { return candidate.has_value(); }

    bool operator==(const MatchResult&) const = default;
};

struct Thresholds {
    double tau_m = 1.25;
    double tau_e = 7.25;

    bool operator==(const Thresholds&) const = default;
};

// Final pipeline output for one citation.
struct LabeledVerdict {
    Label label = Label::major;
    double score = 0.0;  // 0..10
    std::string reasoning;
    std::vector<std::string> key_differences;
    bool reviewer_applied = false;
    bool reviewer_overrode = false;
    Thresholds thresholds;
    MatchResult match;
    std::vector<std::string> flags;

    bool operator==(const LabeledVerdict&) const = default;
};

// One provenance row of a corruption benchmark. label == exact means the
// citation was kept unchanged (valid gold).
struct BenchmarkRecord {
    std::int64_t index = 0;
    std::string collection;
    std::string original;
    std::string corrupted;
    Label label = Label::exact;
    std::string change_description;

    bool operator==(const BenchmarkRecord&) const = default;
};

// JSON bindings (nlohmann ADL). Optionals serialize as null.
void to_json(nlohmann::json& j, const RawCitation& v);
void from_json(const nlohmann::json& j, RawCitation& v);
void to_json(nlohmann::json& j, const ParsedCitation& v);
void from_json(const nlohmann::json& j, ParsedCitation& v);
void to_json(nlohmann::json& j, const CandidatePublication& v);
void from_json(const nlohmann::json& j, CandidatePublication& v);
void to_json(nlohmann::json& j, const StageRecord& v);
void from_json(const nlohmann::json& j, StageRecord& v);
void to_json(nlohmann::json& j, const MatchResult& v);
void from_json(const nlohmann::json& j, MatchResult& v);
void to_json(nlohmann::json& j, const Thresholds& v);
void from_json(const nlohmann::json& j, Thresholds& v);
void to_json(nlohmann::json& j, const LabeledVerdict& v);
void from_json(const nlohmann::json& j, LabeledVerdict& v);
void to_json(nlohmann::json& j, const BenchmarkRecord& v);
void from_json(const nlohmann::json& j, BenchmarkRecord& v);

}  // namespace citegate
