#include "citegate/parser.hpp"

#include <cctype>
#include <regex>

#include "citegate/textnorm.hpp"

namespace citegate {

namespace {

const std::regex kModernArxivId{R"(^\d{4}\.\d{4,5}$)"};
const std::regex kLegacyArxivId{R"(^[a-z][a-z-]*(\.[A-Za-z-]+)?\/\d{7}$)"};

// arXiv URL paths: /abs/<id>, /pdf/<id>, optional version and .pdf suffix.
const std::regex kArxivUrl{
    R"(arxiv\.org\/(?:abs|pdf)\/((?:\d{4}\.\d{4,5})|(?:[a-z][a-z-]*(?:\.[A-Za-z-]+)?\/\d{7}))(?:v\d+)?(?:\.pdf)?)",
    std::regex::icase};
const std::regex kDoiOrgUrl{R"(doi\.org\/(10\.\d{4,9}\/[^\s\)\]]+))", std::regex::icase};
const std::regex kBareDoi{R"((10\.\d{4,9}\/[^\s\)\]]+))"};
const std::regex kUrlToken{R"((https?:\/\/[^\s\)\]]+|www\.[^\s\)\]]+))", std::regex::icase};

bool in_year_range(int y) { return y >= 1500 && y <= 2100; }

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Strips separator commas around a field, keeping periods of initials.
std::string strip_separators(std::string s) {
    s = trim(s);
    while (!s.empty() && s.back() == ',') {
        s.pop_back();
        s = trim(s);
    }
    while (!s.empty() && s.front() == ',') {
        s.erase(s.begin());
        s = trim(s);
    }
    return s;
}

// First standalone 4-digit token in [1500,2100]; returns (year, begin, end).
struct YearToken {
    int year = 0;
    std::size_t begin = std::string::npos;
    std::size_t end = std::string::npos;
};

std::optional<YearToken> find_year_token(const std::string& s) {
    for (std::size_t i = 0; i + 4 <= s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) continue;
        const bool left_ok = i == 0 || !std::isdigit(static_cast<unsigned char>(s[i - 1]));
        const bool right_ok =
            i + 4 == s.size() || !std::isdigit(static_cast<unsigned char>(s[i + 4]));
        if (!left_ok || !right_ok) continue;
        const int y = std::stoi(s.substr(i, 4));
        if (in_year_range(y)) return YearToken{y, i, i + 4};
    }
    return std::nullopt;
}

void extract_ids_from_url(const std::string& url, ParsedCitation& out) {
    if (!out.arxiv_id.has_value()) {
        if (auto id = arxiv_id_from_url(url)) out.arxiv_id = *id;
    }
    if (!out.doi.has_value()) {
        if (auto doi = doi_from_url(url)) out.doi = *doi;
    }
}

// Splits the markdown-link shape "[inner](target)". The bracketed text may
// itself contain brackets, so the split point is the last "](" pair.
struct LinkParts {
    std::string inner;
    std::string target;
};

std::optional<LinkParts> split_markdown_link(const std::string& text) {
    const std::string t = trim(text);
    if (t.size() < 4 || t.front() != '[' || t.back() != ')') return std::nullopt;
    const std::size_t sep = t.rfind("](");
    if (sep == std::string::npos || sep == 0) return std::nullopt;
    LinkParts parts;
    parts.inner = t.substr(1, sep - 1);
    parts.target = trim(t.substr(sep + 2, t.size() - sep - 3));
    if (parts.target.empty()) return std::nullopt;
    return parts;
}

}  // namespace

bool is_arxiv_id(const std::string& id) {
    return std::regex_match(id, kModernArxivId) || std::regex_match(id, kLegacyArxivId);
}

std::optional<std::string> arxiv_id_from_url(const std::string& url) {
    std::smatch m;
    if (std::regex_search(url, m, kArxivUrl)) return m[1].str();
    return std::nullopt;
}

std::optional<std::string> doi_from_url(const std::string& url) {
    std::smatch m;
    if (std::regex_search(url, m, kDoiOrgUrl)) return m[1].str();
    if (std::regex_search(url, m, kBareDoi)) return m[1].str();
    return std::nullopt;
}

ParsedCitation parse_rule_based(const std::string& text) {
    ParsedCitation out;

    if (auto link = split_markdown_link(text)) {
        out.url = link->target;
        const auto year_tok = find_year_token(link->inner);
        if (year_tok.has_value()) {
            out.year = year_tok->year;
            const std::string before = strip_separators(link->inner.substr(0, year_tok->begin));
            const std::string after = strip_separators(link->inner.substr(year_tok->end));
            if (!before.empty()) out.authors = clean_text(before);
            if (!after.empty()) out.title = clean_text(after);
        } else {
            // No year inside the brackets: treat the whole text as a title.
            const std::string inner = clean_text(strip_separators(link->inner));
            if (!inner.empty()) out.title = inner;
        }
        extract_ids_from_url(*out.url, out);
    } else {
        // Bare text: year token and URL-shaped token only, no title.
        if (auto year_tok = find_year_token(text)) out.year = year_tok->year;
        std::smatch m;
        if (std::regex_search(text, m, kUrlToken)) {
            out.url = m[1].str();
            extract_ids_from_url(*out.url, out);
        }
    }

    out.parse_method = out.has_core_field() ? ParseMethod::rule_based : ParseMethod::failed;
    return out;
}

ParsedCitation parse_with_fallback(const std::string& text, FallbackParser* fallback) {
    ParsedCitation rule = parse_rule_based(text);
    if (rule.parse_method == ParseMethod::rule_based) return rule;
    if (fallback != nullptr) {
        try {
            if (auto parsed = fallback->parse(text)) {
                parsed->parse_method =
                    parsed->has_core_field() ? ParseMethod::llm_fallback : ParseMethod::failed;
                return *parsed;
            }
        } catch (...) {
            // fallback failures never stop the pipeline; the raw text still
            // seeds retrieval
        }
    }
    return rule;
}

}  // namespace citegate
