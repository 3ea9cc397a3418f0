#pragma once

#include <optional>
#include <string>

#include "citegate/model.hpp"

namespace citegate {

// Knobs for cascade acceptance and intra-source ranking.
struct SimilarityConfig {
    double min_title_similarity = 70.0;  // acceptance gate, 0..100
    double year_bonus_exact = 10.0;
    double year_bonus_near = 5.0;
    int ranking_year_window = 2;  // years
};

// Strips LaTeX/BibTeX artifacts: braces, \word and \word{arg} commands
// (the argument is kept), "\&" -> "&", "~" -> space. Whitespace is
// collapsed and trimmed. Idempotent.
std::string clean_text(const std::string& raw);

// Lowercases, strips every non-alphanumeric non-space character (no
// replacement: hyphenated words join), collapses whitespace, trims.
// Idempotent.
std::string normalize_for_compare(const std::string& s);

// Normalized Levenshtein similarity in [0,100] between the two strings
// after normalize_for_compare:
//   sim(a,b) = max(0, (1 - lev(a,b)/max(|a|,|b|)) * 100)
// Both strings empty compares as identical (100).
double title_similarity(const std::string& a, const std::string& b);

// Unique-token overlap in [0,100] over normalized strings:
//   overlap(a,b) = |Wa ∩ Wb| / max(|Wa|,|Wb|) * 100
// Both token sets empty compares as identical (100).
double word_overlap(const std::string& a, const std::string& b);

enum class RankingMode { levenshtein, overlap };

// Intra-source ranking score: base similarity per mode plus a year bonus
// (exact match, or within the ranking window). Unclamped; ranking only,
// never used for cascade acceptance.
double ranking_score(const std::string& query_title, std::optional<int> query_year,
                     const CandidatePublication& cand, RankingMode mode,
                     const SimilarityConfig& cfg);

}  // namespace citegate
