#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "citegate/model.hpp"
#include "citegate/sources.hpp"
#include "citegate/textnorm.hpp"

namespace citegate {

struct CascadeConfig {
    bool enable_arxiv_direct = true;
    bool enable_web_search = true;
    double min_title_similarity = 70.0;  // shared with SimilarityConfig
    double crossref_confidence_gate = 75.0;
    double s2_confidence_bonus_cap = 5.0;
    double openalex_confidence_bonus_cap = 5.0;
    double arxiv_direct_confidence = 95.0;
    std::size_t per_stage_limit = 5;
};

// Flags attached to MatchResult when the returned candidate did not pass
// normal acceptance.
inline constexpr const char* kFlagCrossrefConfFailFallback = "crossref_conf_fail_fallback";
inline constexpr const char* kFlagBelowGateWebFallback = "below_gate_web_fallback";
inline constexpr const char* kFlagBelowGateIdentifierHit = "below_gate_identifier_hit";

using ClientMap = std::map<Source, SourceClient*>;

// Search query for a citation: the cleaned parsed title when available,
// otherwise the cleaned raw text; the parsed year rides along as a ranking
// signal.
std::pair<std::string, std::optional<int>> build_query(const ParsedCitation& parsed,
                                                       const RawCitation& raw);

// Waterfall over arXiv-direct, CrossRef, Semantic Scholar, OpenAlex and web
// search. Acceptance is gated on recomputed Levenshtein title similarity
// (CrossRef additionally on its confidence); later structured stages replace
// a provisional candidate only on strictly higher similarity; web search is
// the final fallback. Source failures are absorbed into stage records.
// The result always carries one stage record per stage, in cascade order.
MatchResult retrieve_best(const ParsedCitation& parsed, const RawCitation& raw,
                          const ClientMap& clients, const CascadeConfig& cfg,
                          const SimilarityConfig& sim_cfg);

}  // namespace citegate
