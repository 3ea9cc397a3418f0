#include "citegate/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "citegate/parser.hpp"
#include "citegate/prompts.hpp"
#include "citegate/textnorm.hpp"

namespace citegate {

std::string to_string(VerdictClass c) {
    switch (c) {
        case VerdictClass::exact_match: return "exact_match";
        case VerdictClass::minor_hallucination: return "minor_hallucination";
        case VerdictClass::major_hallucination: return "major_hallucination";
    }
    throw std::logic_error("unreachable verdict class");
}

VerdictClass verdict_class_from_string(const std::string& s) {
    if (s == "exact_match") return VerdictClass::exact_match;
    if (s == "minor_hallucination") return VerdictClass::minor_hallucination;
    if (s == "major_hallucination") return VerdictClass::major_hallucination;
    throw std::invalid_argument("unknown verdict class: " + s);
}

Label label_of(VerdictClass c) {
    switch (c) {
        case VerdictClass::exact_match: return Label::exact;
        case VerdictClass::minor_hallucination: return Label::minor;
        case VerdictClass::major_hallucination: return Label::major;
    }
    throw std::logic_error("unreachable verdict class");
}

VerdictClass verdict_class_of(Label label) {
    switch (label) {
        case Label::exact: return VerdictClass::exact_match;
        case Label::minor: return VerdictClass::minor_hallucination;
        case Label::major: return VerdictClass::major_hallucination;
    }
    throw std::logic_error("unreachable label");
}

namespace {

constexpr const char* kAbsent = "N/A";

// Deterministic numeric rendering: integral values print without decimals,
// everything else with up to two, trailing zeros trimmed.
std::string fmt_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    std::string s{buf};
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

std::string opt_str(const std::optional<std::string>& v) { return v.value_or(kAbsent); }
std::string opt_int(const std::optional<int>& v) {
    return v.has_value() ? std::to_string(*v) : std::string{kAbsent};
}

void replace_placeholder(std::string& text, const std::string& name, const std::string& value) {
    const std::string token = "{" + name + "}";
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
}

std::string matched_info_listing(const CandidatePublication& cand) {
    std::ostringstream out;
    out << "Title: " << (cand.title.empty() ? kAbsent : cand.title) << '\n'
        << "Authors: " << (cand.authors.empty() ? kAbsent : cand.authors) << '\n'
        << "Year: " << opt_int(cand.year) << '\n'
        << "Venue: " << opt_str(cand.venue) << '\n'
        << "URL: " << opt_str(cand.url) << '\n'
        << "DOI: " << opt_str(cand.doi) << '\n'
        << "ArXiv ID: " << opt_str(cand.arxiv_id) << '\n'
        << "Source: " << to_string(cand.source) << '\n'
        << "Confidence: " << fmt_number(cand.confidence);
    return out.str();
}

}  // namespace

std::string render_verifier_prompt(const ParsedCitation& parsed, const RawCitation& raw,
                                   const MatchResult& match) {
    if (!match.has_candidate()) {
        throw std::invalid_argument("verifier prompt requires a retrieval candidate");
    }
    std::string prompt{prompts::kVerifierTemplate};
    replace_placeholder(prompt, "citation_authors", opt_str(parsed.authors));
    replace_placeholder(prompt, "citation_year", opt_int(parsed.year));
    replace_placeholder(prompt, "citation_title", opt_str(parsed.title));
    replace_placeholder(prompt, "citation_arxiv_id", opt_str(parsed.arxiv_id));
    replace_placeholder(prompt, "citation_url", opt_str(parsed.url));
    replace_placeholder(prompt, "match_method", to_string(match.match_method));
    replace_placeholder(prompt, "similarity_score", fmt_number(match.title_similarity));
    replace_placeholder(prompt, "matched_info", matched_info_listing(*match.candidate));
    replace_placeholder(prompt, "context", raw.text);
    return prompt;
}

std::string render_reviewer_prompt(const std::string& citation_raw_text,
                                   const ParsedCitation& parsed, const MatchResult& match,
                                   const VerifierVerdict& first, Label first_label) {
    if (!match.has_candidate()) {
        throw std::invalid_argument("reviewer prompt requires a retrieval candidate");
    }
    const CandidatePublication& cand = *match.candidate;
    std::string prompt{prompts::kReviewerTemplate};
    replace_placeholder(prompt, "citation_raw_text", citation_raw_text);
    replace_placeholder(prompt, "citation_authors", opt_str(parsed.authors));
    replace_placeholder(prompt, "citation_year", opt_int(parsed.year));
    replace_placeholder(prompt, "citation_title", opt_str(parsed.title));
    replace_placeholder(prompt, "match_source", to_string(cand.source));
    replace_placeholder(prompt, "source_authors",
                        cand.authors.empty() ? kAbsent : cand.authors);
    replace_placeholder(prompt, "source_year", opt_int(cand.year));
    replace_placeholder(prompt, "source_title", cand.title.empty() ? kAbsent : cand.title);
    replace_placeholder(prompt, "title_similarity", fmt_number(match.title_similarity));
    replace_placeholder(prompt, "verifier_label", to_string(verdict_class_of(first_label)));
    replace_placeholder(prompt, "verifier_score", fmt_number(first.score));
    replace_placeholder(prompt, "verifier_reasoning",
                        first.reasoning.empty() ? kAbsent : first.reasoning);
    return prompt;
}

namespace {

std::optional<VerifierVerdict> validate_verifier_schema(const nlohmann::json& j) {
    if (!j.is_object()) return std::nullopt;
    if (!j.contains("score") || !j["score"].is_number()) return std::nullopt;
    if (!j.contains("classification") || !j["classification"].is_string()) return std::nullopt;
    if (!j.contains("confidence") || !j["confidence"].is_string()) return std::nullopt;
    if (!j.contains("reasoning") || !j["reasoning"].is_string()) return std::nullopt;
    if (!j.contains("key_differences") || !j["key_differences"].is_array()) return std::nullopt;
    VerifierVerdict v;
    v.score = j["score"].get<double>();
    try {
        v.classification = verdict_class_from_string(j["classification"].get<std::string>());
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    v.confidence = j["confidence"].get<std::string>();
    if (v.confidence != "low" && v.confidence != "medium" && v.confidence != "high") {
        return std::nullopt;
    }
    v.reasoning = j["reasoning"].get<std::string>();
    for (const auto& d : j["key_differences"]) {
        if (!d.is_string()) return std::nullopt;
        v.key_differences.push_back(d.get<std::string>());
    }
    return v;
}

}  // namespace

std::variant<VerifyOutcome, VerificationError> verify(const ParsedCitation& parsed,
                                                      const RawCitation& raw,
                                                      const MatchResult& match,
                                                      VerifierBackend& backend) {
    const std::string prompt = render_verifier_prompt(parsed, raw, match);
    std::string last_raw;
    for (int attempt = 0; attempt < 2; ++attempt) {  // one retry on invalid output
        auto response = backend.judge(prompt, SchemaTag::verifier);
        if (response.index() == 1) {
            last_raw = std::get<1>(response).detail;
            continue;
        }
        const nlohmann::json& j = std::get<0>(response);
        last_raw = j.dump();
        if (auto verdict = validate_verifier_schema(j)) {
            VerifyOutcome outcome;
            outcome.verdict = *verdict;
            if (outcome.verdict.score < 0.0 || outcome.verdict.score > 10.0) {
                outcome.warnings.push_back(
                    "score " + fmt_number(outcome.verdict.score) + " clamped to [0,10]");
                outcome.verdict.score = std::clamp(outcome.verdict.score, 0.0, 10.0);
            }
            return outcome;
        }
    }
    return VerificationError{"backend failed or returned schema-invalid output", last_raw};
}

bool is_suspicious(const MatchResult& match, const SuspicionConfig& cfg) {
    if (!match.has_candidate()) return false;
    const bool identifier_based = match.match_method == MatchMethod::arxiv_id_lookup ||
                                  match.match_method == MatchMethod::web_search;
    return identifier_based && match.title_similarity < cfg.suspicion_similarity_gate;
}

double representative_score(Label label, const Thresholds& t) {
    switch (label) {
        case Label::exact: return (t.tau_e + 10.0) / 2.0;
        case Label::minor: return (t.tau_m + t.tau_e) / 2.0;
        case Label::major: return t.tau_m / 2.0;
    }
    throw std::logic_error("unreachable label");
}

ReviewOutcome review(const std::string& citation_raw_text, const ParsedCitation& parsed,
                     const MatchResult& match, const VerifierVerdict& first,
                     Label first_label, const Thresholds& thresholds,
                     VerifierBackend& backend) {
    ReviewOutcome outcome;
    outcome.final_label = first_label;
    outcome.final_score = first.score;
    outcome.overrode = false;

    const std::string prompt =
        render_reviewer_prompt(citation_raw_text, parsed, match, first, first_label);
    auto response = backend.judge(prompt, SchemaTag::reviewer);
    if (response.index() == 1) {  // reviewer failure: first pass stands
        outcome.backend_failed = true;
        return outcome;
    }
    const nlohmann::json& j = std::get<0>(response);
    if (!j.is_object() || !j.contains("classification") || !j["classification"].is_string()) {
        outcome.backend_failed = true;
        return outcome;
    }
    VerdictClass cls;
    try {
        cls = verdict_class_from_string(j["classification"].get<std::string>());
    } catch (const std::invalid_argument&) {
        outcome.backend_failed = true;
        return outcome;
    }
    outcome.reviewer_reasoning = j.value("reasoning", std::string{});
    const Label reviewed = label_of(cls);
    if (reviewed != first_label) {
        outcome.overrode = true;
        outcome.final_label = reviewed;
        outcome.final_score = representative_score(reviewed, thresholds);
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// RuleBasedVerifier
// ---------------------------------------------------------------------------

namespace {

struct PromptFields {
    std::optional<std::string> cit_authors, cit_title, cit_arxiv, cit_url, cit_doi;
    std::optional<int> cit_year;
    std::optional<std::string> src_authors, src_title, src_arxiv, src_url, src_doi;
    std::optional<int> src_year;
    double similarity = 0.0;
    std::string match_method;
    // reviewer-only
    std::string raw_text;
    std::string verifier_label;
};

std::optional<std::string> field_value(const std::string& line, const std::string& key) {
    if (line.rfind(key, 0) != 0) return std::nullopt;
    std::string v = line.substr(key.size());
    while (!v.empty() && v.front() == ' ') v.erase(v.begin());
    if (v == kAbsent || v.empty()) return std::string{};  // present marker, empty value
    return v;
}

std::optional<std::string> nonabsent(const std::optional<std::string>& v) {
    if (!v.has_value() || v->empty()) return std::nullopt;
    return v;
}

std::optional<int> parse_year_value(const std::optional<std::string>& v) {
    if (!v.has_value() || v->empty()) return std::nullopt;
    try {
        return std::stoi(*v);
    } catch (...) {
        return std::nullopt;
    }
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

PromptFields parse_verifier_prompt(const std::string& prompt) {
    PromptFields f;
    enum class Section { preamble, citation, source } section = Section::preamble;
    const std::regex header{R"(^Best matching source, matched by (\S+) with similarity score ([0-9.]+):$)"};
    for (const auto& line : split_lines(prompt)) {
        std::smatch m;
        if (line == "Citation from report:") {
            section = Section::citation;
            continue;
        }
        if (std::regex_match(line, m, header)) {
            f.match_method = m[1].str();
            f.similarity = std::stod(m[2].str());
            section = Section::source;
            continue;
        }
        if (line.rfind("Context:", 0) == 0) break;
        if (section == Section::citation) {
            if (auto v = field_value(line, "- Authors:")) f.cit_authors = nonabsent(v);
            if (auto v = field_value(line, "- Year:")) f.cit_year = parse_year_value(v);
            if (auto v = field_value(line, "- Title:")) f.cit_title = nonabsent(v);
            if (auto v = field_value(line, "- ArXiv ID:")) f.cit_arxiv = nonabsent(v);
            if (auto v = field_value(line, "- URL:")) f.cit_url = nonabsent(v);
        } else if (section == Section::source) {
            if (auto v = field_value(line, "Authors:")) f.src_authors = nonabsent(v);
            if (auto v = field_value(line, "Year:")) f.src_year = parse_year_value(v);
            if (auto v = field_value(line, "Title:")) f.src_title = nonabsent(v);
            if (auto v = field_value(line, "ArXiv ID:")) f.src_arxiv = nonabsent(v);
            if (auto v = field_value(line, "URL:")) f.src_url = nonabsent(v);
            if (auto v = field_value(line, "DOI:")) f.src_doi = nonabsent(v);
        }
    }
    return f;
}

PromptFields parse_reviewer_prompt(const std::string& prompt) {
    PromptFields f;
    enum class Section {
        preamble,
        raw_text,
        citation,
        source,
        verdict
    } section = Section::preamble;
    for (const auto& line : split_lines(prompt)) {
        if (line == "Citation from the report, raw text:") {
            section = Section::raw_text;
            continue;
        }
        if (line.rfind("Parsed citation fields", 0) == 0) {
            section = Section::citation;
            continue;
        }
        if (line.rfind("Closest matching source, found via ", 0) == 0) {
            section = Section::source;
            continue;
        }
        if (line == "First-pass verifier verdict:") {
            section = Section::verdict;
            continue;
        }
        if (line.rfind("Title similarity:", 0) == 0) {
            std::string v = line.substr(std::string{"Title similarity:"}.size());
            v.erase(std::remove(v.begin(), v.end(), ' '), v.end());
            if (!v.empty() && v.back() == '%') v.pop_back();
            try {
                f.similarity = std::stod(v);
            } catch (...) {
            }
            continue;
        }
        switch (section) {
            case Section::raw_text:
                if (!line.empty() && f.raw_text.empty()) f.raw_text = line;
                break;
            case Section::citation:
                if (auto v = field_value(line, "- Authors:")) f.cit_authors = nonabsent(v);
                if (auto v = field_value(line, "- Year:")) f.cit_year = parse_year_value(v);
                if (auto v = field_value(line, "- Title:")) f.cit_title = nonabsent(v);
                break;
            case Section::source:
                if (auto v = field_value(line, "- Authors:")) f.src_authors = nonabsent(v);
                if (auto v = field_value(line, "- Year:")) f.src_year = parse_year_value(v);
                if (auto v = field_value(line, "- Title:")) f.src_title = nonabsent(v);
                break;
            case Section::verdict:
                if (auto v = field_value(line, "- Label:")) f.verifier_label = v.value_or("");
                break;
            default:
                break;
        }
    }
    return f;
}

std::string strip_et_al(std::string s) {
    for (const char* marker : {"et al.", "et al"}) {
        const auto pos = s.find(marker);
        if (pos != std::string::npos) s.erase(pos);
    }
    return s;
}

bool has_et_al(const std::string& s) { return s.find("et al") != std::string::npos; }

std::string first_token(const std::string& s) {
    const auto pos = s.find(' ');
    return pos == std::string::npos ? s : s.substr(0, pos);
}

// Author strings agree when they normalize identically, one extends the
// other (initials, display truncation), or they share a first author under
// an "et al." marker.
bool authors_compatible(const std::string& a, const std::string& b) {
    const std::string na = normalize_for_compare(strip_et_al(a));
    const std::string nb = normalize_for_compare(strip_et_al(b));
    if (na.empty() || nb.empty()) return true;  // absent side: no evidence of mismatch
    if (na == nb) return true;
    if ((has_et_al(a) || has_et_al(b)) && first_token(na) == first_token(nb)) return true;
    if (na.find(nb) != std::string::npos || nb.find(na) != std::string::npos) return true;
    return false;
}

std::string normalize_url(std::string u) {
    std::transform(u.begin(), u.end(), u.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const char* prefix : {"https://", "http://"}) {
        if (u.rfind(prefix, 0) == 0) u.erase(0, std::string{prefix}.size());
    }
    if (u.rfind("www.", 0) == 0) u.erase(0, 4);
    while (!u.empty() && u.back() == '/') u.pop_back();
    if (u.size() > 4 && u.compare(u.size() - 4, 4, ".pdf") == 0) u.erase(u.size() - 4);
    const auto pdf_pos = u.find("/pdf/");
    if (pdf_pos != std::string::npos) u.replace(pdf_pos, 5, "/abs/");
    return u;
}

bool both_present_and_differ(const std::optional<std::string>& a,
                             const std::optional<std::string>& b) {
    return a.has_value() && b.has_value() && *a != *b;
}

struct AgreementScore {
    double score = 0.0;
    std::string reasoning;
    std::vector<std::string> differences;
    bool identifier_match = false;
};

AgreementScore score_agreement(const PromptFields& f) {
    AgreementScore out;
    double score = f.similarity / 10.0;
    std::ostringstream why;
    why << "base " << fmt_number(f.similarity / 10.0) << " from title similarity "
        << fmt_number(f.similarity);

    if (f.cit_year.has_value() && f.src_year.has_value() && *f.cit_year != *f.src_year) {
        const int delta = std::abs(*f.cit_year - *f.src_year);
        const double penalty = delta <= 2 ? 3.0 : 5.5;
        score -= penalty;
        out.differences.push_back("year: " + std::to_string(*f.cit_year) + " vs " +
                                  std::to_string(*f.src_year));
        why << "; year mismatch -" << fmt_number(penalty);
    }
    if (f.cit_authors.has_value() && f.src_authors.has_value() &&
        !authors_compatible(*f.cit_authors, *f.src_authors)) {
        score -= 3.0;
        out.differences.push_back("authors: " + *f.cit_authors + " vs " + *f.src_authors);
        why << "; author mismatch -3";
    }

    const bool arxiv_differs = both_present_and_differ(f.cit_arxiv, f.src_arxiv);
    const bool doi_differs = both_present_and_differ(f.cit_doi, f.src_doi);
    bool url_differs = false;
    if (f.cit_url.has_value() && f.src_url.has_value()) {
        url_differs = normalize_url(*f.cit_url) != normalize_url(*f.src_url);
    }
    if (arxiv_differs || doi_differs || url_differs) {
        score -= 3.0;
        if (arxiv_differs) {
            out.differences.push_back("arxiv id: " + *f.cit_arxiv + " vs " + *f.src_arxiv);
        } else if (doi_differs) {
            out.differences.push_back("doi: " + *f.cit_doi + " vs " + *f.src_doi);
        } else {
            out.differences.push_back("url: " + *f.cit_url + " vs " + *f.src_url);
        }
        why << "; identifier mismatch -3";
    }

    const bool arxiv_equal =
        f.cit_arxiv.has_value() && f.src_arxiv.has_value() && *f.cit_arxiv == *f.src_arxiv;
    const bool doi_equal =
        f.cit_doi.has_value() && f.src_doi.has_value() && *f.cit_doi == *f.src_doi;
    const bool url_equal = f.cit_url.has_value() && f.src_url.has_value() &&
                           normalize_url(*f.cit_url) == normalize_url(*f.src_url);
    out.identifier_match = arxiv_equal || doi_equal || url_equal;

    score = std::clamp(score, 0.0, 10.0);
    if (out.identifier_match && f.similarity < 70.0) {
        // Identical identifiers read as a near-perfect signal even when the
        // titles disagree; this is the over-reliance the reviewer corrects.
        score = std::max(score, 8.5);
        why << "; identical identifiers, trusting the match";
    }
    out.score = score;
    out.reasoning = why.str();
    return out;
}

}  // namespace

std::variant<nlohmann::json, BackendError> RuleBasedVerifier::judge(const std::string& prompt,
                                                                    SchemaTag tag) {
    if (tag == SchemaTag::verifier) {
        const PromptFields f = parse_verifier_prompt(prompt);
        const AgreementScore agreement = score_agreement(f);
        VerdictClass cls = VerdictClass::major_hallucination;
        if (agreement.score >= 8.0) {
            cls = VerdictClass::exact_match;
        } else if (agreement.score >= 4.0) {
            cls = VerdictClass::minor_hallucination;
        }
        nlohmann::json j;
        j["score"] = agreement.score;
        j["classification"] = to_string(cls);
        j["confidence"] = "high";
        j["reasoning"] = agreement.reasoning;
        j["key_differences"] = agreement.differences;
        return j;
    }

    // Reviewer: re-judge from the raw citation text on title and author
    // agreement alone; identifiers carry no weight here.
    const PromptFields f = parse_reviewer_prompt(prompt);
    const ParsedCitation reparsed = parse_rule_based(f.raw_text);
    const std::optional<std::string> cit_authors =
        reparsed.authors.has_value() ? reparsed.authors : f.cit_authors;

    std::string cls = f.verifier_label.empty() ? "major_hallucination" : f.verifier_label;
    std::string reasoning = "verifier verdict consistent with the raw citation text";
    if (f.similarity < 70.0) {
        const bool author_mismatch = cit_authors.has_value() && f.src_authors.has_value() &&
                                     !authors_compatible(*cit_authors, *f.src_authors);
        if (author_mismatch || f.similarity < 40.0) {
            cls = "major_hallucination";
            reasoning =
                "citation text describes a different work than the matched source; "
                "an identifier match does not make the citation correct";
        } else {
            cls = "minor_hallucination";
            reasoning = "titles diverge but the citation still identifies the source";
        }
    }
    nlohmann::json j;
    j["classification"] = cls;
    j["reasoning"] = reasoning;
    return j;
}

void ScriptedVerifier::enqueue(nlohmann::json response) { queue_.push_back(std::move(response)); }

void ScriptedVerifier::enqueue_error(std::string detail) {
    queue_.push_back(BackendError{std::move(detail), ""});
}

std::variant<nlohmann::json, BackendError> ScriptedVerifier::judge(const std::string& prompt,
                                                                   SchemaTag) {
    ++calls_;
    prompts_.push_back(prompt);
    if (next_ >= queue_.size()) {
        return BackendError{"scripted verifier exhausted", ""};
    }
    return queue_[next_++];
}

}  // namespace citegate
