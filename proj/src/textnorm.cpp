#include "citegate/textnorm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

namespace citegate {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string collapse_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (is_space(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> tokens;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    // Two-row DP over character edits.
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

std::string clean_text(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char c = raw[i];
        if (c == '{' || c == '}') continue;
        if (c == '~') {
            out.push_back(' ');
            continue;
        }
        if (c != '\\') {
            out.push_back(c);
            continue;
        }
        // Backslash sequence. "\&" is the escaped ampersand; "\word" with an
        // optional braced argument keeps the argument and drops the command.
        if (i + 1 < raw.size() && raw[i + 1] == '&') {
            out.push_back('&');
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < raw.size() && is_alpha(raw[j])) ++j;
        if (j == i + 1) continue;  // stray backslash or "\{" etc: drop the backslash
        i = j - 1;  // braces of the argument are stripped by the '{' rule above
    }
    return collapse_whitespace(out);
}

std::string normalize_for_compare(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (is_alnum(c)) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (is_space(c)) {
            out.push_back(' ');
        }
        // any other punctuation: stripped, no replacement
    }
    return collapse_whitespace(out);
}

double title_similarity(const std::string& a, const std::string& b) {
    const std::string na = normalize_for_compare(a);
    const std::string nb = normalize_for_compare(b);
    if (na.empty() && nb.empty()) return 100.0;
    const std::size_t max_len = std::max(na.size(), nb.size());
    const std::size_t dist = levenshtein(na, nb);
    const double sim = (1.0 - static_cast<double>(dist) / static_cast<double>(max_len)) * 100.0;
    return std::max(0.0, sim);
}

double word_overlap(const std::string& a, const std::string& b) {
    const auto ta = tokenize(normalize_for_compare(a));
    const auto tb = tokenize(normalize_for_compare(b));
    const std::set<std::string> wa(ta.begin(), ta.end());
    const std::set<std::string> wb(tb.begin(), tb.end());
    if (wa.empty() && wb.empty()) return 100.0;
    std::size_t common = 0;
    for (const auto& w : wa) common += wb.count(w);
    const std::size_t max_size = std::max(wa.size(), wb.size());
    return static_cast<double>(common) / static_cast<double>(max_size) * 100.0;
}

double ranking_score(const std::string& query_title, std::optional<int> query_year,
                     const CandidatePublication& cand, RankingMode mode,
                     const SimilarityConfig& cfg) {
    double score = mode == RankingMode::levenshtein
                       ? title_similarity(query_title, cand.title)
                       : word_overlap(query_title, cand.title);
    if (query_year.has_value() && cand.year.has_value()) {
        const int delta = std::abs(*query_year - *cand.year);
        if (delta == 0) {
            score += cfg.year_bonus_exact;
        } else if (delta <= cfg.ranking_year_window) {
            score += cfg.year_bonus_near;
        }
    }
    return score;
}

}  // namespace citegate
