#include "citegate/model.hpp"

#include <stdexcept>

namespace citegate {

namespace {

template <typename T>
void put_opt(nlohmann::json& j, const char* key, const std::optional<T>& v) {
    if (v.has_value()) {
        j[key] = *v;
    } else {
        j[key] = nullptr;
    }
}

template <typename T>
void get_opt(const nlohmann::json& j, const char* key, std::optional<T>& v) {
    v.reset();
    if (j.contains(key) && !j.at(key).is_null()) {
        v = j.at(key).get<T>();
    }
}

}  // namespace

std::string to_string(Label label) {
    switch (label) {
        case Label::exact: return "exact";
        case Label::minor: return "minor";
        case Label::major: return "major";
    }
    throw std::logic_error("unreachable label");
}

Label label_from_string(const std::string& s) {
    if (s == "exact") return Label::exact;
    if (s == "minor") return Label::minor;
    if (s == "major") return Label::major;
    throw std::invalid_argument("unknown label: " + s);
}

std::string to_string(Source source) {
    switch (source) {
        case Source::arxiv: return "arxiv";
        case Source::crossref: return "crossref";
        case Source::semantic_scholar: return "semantic_scholar";
        case Source::openalex: return "openalex";
        case Source::web_search: return "web_search";
    }
    throw std::logic_error("unreachable source");
}

Source source_from_string(const std::string& s) {
    if (s == "arxiv") return Source::arxiv;
    if (s == "crossref") return Source::crossref;
    if (s == "semantic_scholar") return Source::semantic_scholar;
    if (s == "openalex") return Source::openalex;
    if (s == "web_search") return Source::web_search;
    throw std::invalid_argument("unknown source: " + s);
}

std::string to_string(MatchMethod method) {
    switch (method) {
        case MatchMethod::arxiv_id_lookup: return "arxiv_id_lookup";
        case MatchMethod::title_search: return "title_search";
        case MatchMethod::web_search: return "web_search";
        case MatchMethod::not_found: return "not_found";
    }
    throw std::logic_error("unreachable match method");
}

MatchMethod match_method_from_string(const std::string& s) {
    if (s == "arxiv_id_lookup") return MatchMethod::arxiv_id_lookup;
    if (s == "title_search") return MatchMethod::title_search;
    if (s == "web_search") return MatchMethod::web_search;
    if (s == "not_found") return MatchMethod::not_found;
    throw std::invalid_argument("unknown match method: " + s);
}

std::string to_string(ParseMethod method) {
    switch (method) {
        case ParseMethod::rule_based: return "rule_based";
        case ParseMethod::llm_fallback: return "llm_fallback";
        case ParseMethod::failed: return "failed";
    }
    throw std::logic_error("unreachable parse method");
}

ParseMethod parse_method_from_string(const std::string& s) {
    if (s == "rule_based") return ParseMethod::rule_based;
    if (s == "llm_fallback") return ParseMethod::llm_fallback;
    if (s == "failed") return ParseMethod::failed;
    throw std::invalid_argument("unknown parse method: " + s);
}

void to_json(nlohmann::json& j, const RawCitation& v) {
    j = nlohmann::json{{"id", v.id}, {"collection", v.collection}, {"text", v.text}};
}

void from_json(const nlohmann::json& j, RawCitation& v) {
    j.at("id").get_to(v.id);
    v.collection = j.value("collection", std::string{});
    j.at("text").get_to(v.text);
}

void to_json(nlohmann::json& j, const ParsedCitation& v) {
    j = nlohmann::json::object();
    put_opt(j, "authors", v.authors);
    put_opt(j, "year", v.year);
    put_opt(j, "title", v.title);
    put_opt(j, "url", v.url);
    put_opt(j, "doi", v.doi);
    put_opt(j, "arxiv_id", v.arxiv_id);
    j["parse_method"] = to_string(v.parse_method);
}

void from_json(const nlohmann::json& j, ParsedCitation& v) {
    get_opt(j, "authors", v.authors);
    get_opt(j, "year", v.year);
    get_opt(j, "title", v.title);
    get_opt(j, "url", v.url);
    get_opt(j, "doi", v.doi);
    get_opt(j, "arxiv_id", v.arxiv_id);
    v.parse_method = parse_method_from_string(j.value("parse_method", "failed"));
}

void to_json(nlohmann::json& j, const CandidatePublication& v) {
    j = nlohmann::json::object();
    j["title"] = v.title;
    j["authors"] = v.authors;
    put_opt(j, "year", v.year);
    put_opt(j, "venue", v.venue);
    put_opt(j, "url", v.url);
    put_opt(j, "doi", v.doi);
    put_opt(j, "arxiv_id", v.arxiv_id);
    j["source"] = to_string(v.source);
    j["confidence"] = v.confidence;
}

void from_json(const nlohmann::json& j, CandidatePublication& v) {
    j.at("title").get_to(v.title);
    v.authors = j.value("authors", std::string{});
    get_opt(j, "year", v.year);
    get_opt(j, "venue", v.venue);
    get_opt(j, "url", v.url);
    get_opt(j, "doi", v.doi);
    get_opt(j, "arxiv_id", v.arxiv_id);
    v.source = source_from_string(j.value("source", "crossref"));
    v.confidence = j.value("confidence", 0.0);
}

void to_json(nlohmann::json& j, const StageRecord& v) {
    j = nlohmann::json::object();
    j["stage"] = to_string(v.stage);
    j["attempted"] = v.attempted;
    j["accepted"] = v.accepted;
    put_opt(j, "best_similarity", v.best_similarity);
    j["elapsed_ms"] = v.elapsed.count();
    put_opt(j, "error", v.error);
}

void from_json(const nlohmann::json& j, StageRecord& v) {
    v.stage = source_from_string(j.at("stage").get<std::string>());
    v.attempted = j.value("attempted", false);
    v.accepted = j.value("accepted", false);
    get_opt(j, "best_similarity", v.best_similarity);
    v.elapsed = Millis{j.value("elapsed_ms", std::int64_t{0})};
    get_opt(j, "error", v.error);
}

void to_json(nlohmann::json& j, const MatchResult& v) {
    j = nlohmann::json::object();
    put_opt(j, "candidate", v.candidate);
    j["title_similarity"] = v.title_similarity;
    j["match_method"] = to_string(v.match_method);
    j["stage_records"] = v.stage_records;
    j["fallback_flags"] = v.fallback_flags;
}

void from_json(const nlohmann::json& j, MatchResult& v) {
    get_opt(j, "candidate", v.candidate);
    v.title_similarity = j.value("title_similarity", 0.0);
    v.match_method = match_method_from_string(j.at("match_method").get<std::string>());
    v.stage_records = j.value("stage_records", std::vector<StageRecord>{});
    v.fallback_flags = j.value("fallback_flags", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const Thresholds& v) {
    j = nlohmann::json{{"tau_m", v.tau_m}, {"tau_e", v.tau_e}};
}

void from_json(const nlohmann::json& j, Thresholds& v) {
    j.at("tau_m").get_to(v.tau_m);
    j.at("tau_e").get_to(v.tau_e);
}

void to_json(nlohmann::json& j, const LabeledVerdict& v) {
    j = nlohmann::json::object();
    j["label"] = to_string(v.label);
    j["score"] = v.score;
    j["reasoning"] = v.reasoning;
    j["key_differences"] = v.key_differences;
    j["reviewer_applied"] = v.reviewer_applied;
    j["reviewer_overrode"] = v.reviewer_overrode;
    j["thresholds"] = v.thresholds;
    j["match"] = v.match;
    j["flags"] = v.flags;
}

void from_json(const nlohmann::json& j, LabeledVerdict& v) {
    v.label = label_from_string(j.at("label").get<std::string>());
    v.score = j.at("score").get<double>();
    v.reasoning = j.value("reasoning", std::string{});
    v.key_differences = j.value("key_differences", std::vector<std::string>{});
    v.reviewer_applied = j.value("reviewer_applied", false);
    v.reviewer_overrode = j.value("reviewer_overrode", false);
    v.thresholds = j.value("thresholds", Thresholds{});
    j.at("match").get_to(v.match);
    v.flags = j.value("flags", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const BenchmarkRecord& v) {
    j = nlohmann::json::object();
    j["index"] = v.index;
    j["collection"] = v.collection;
    j["original"] = v.original;
    j["corrupted"] = v.corrupted;
    j["label"] = to_string(v.label);
    j["change_description"] = v.change_description;
}

void from_json(const nlohmann::json& j, BenchmarkRecord& v) {
    j.at("index").get_to(v.index);
    v.collection = j.value("collection", std::string{});
    j.at("original").get_to(v.original);
    j.at("corrupted").get_to(v.corrupted);
    v.label = label_from_string(j.at("label").get<std::string>());
    v.change_description = j.value("change_description", std::string{});
}

}  // namespace citegate
