#pragma once

#include <memory>
#include <optional>
#include <string>

#include "citegate/model.hpp"

namespace citegate {

// Second-chance parser invoked only when the rule-based parser recovers no
// retrieval signal. Implementations must be total: return nullopt rather
// than throw, and must not mutate pipeline state.
class FallbackParser {
  public:
    virtual ~FallbackParser() = default;
    virtual std::optional<ParsedCitation> parse(const std::string& text) = 0;
};

// True for modern ("NNNN.NNNNN", 4-5 digits after the dot, optional vN) and
// legacy ("archive/NNNNNNN", optional subclass) arXiv identifiers.
bool is_arxiv_id(const std::string& id);

// Extracts an arXiv id from a URL (abs/pdf paths, ".pdf" and version
// suffixes stripped), or nullopt.
std::optional<std::string> arxiv_id_from_url(const std::string& url);

// Extracts a DOI from a URL ("doi.org/..." hosts or a "10.xxxx/..." path).
std::optional<std::string> doi_from_url(const std::string& url);

// Deterministic parse of the normalized "[Authors, Year, Title](URL)" shape,
// with identifier extraction from the URL and a bare-text fallback (first
// in-range year token, first URL-shaped token). parse_method is rule_based
// iff a title or an identifier was recovered; a bare year or author string
// alone is not a successful parse.
ParsedCitation parse_rule_based(const std::string& text);

// parse_rule_based, then the fallback parser when no retrieval signal was
// recovered. Fallback failures (nullopt or a thrown exception) are swallowed;
// the rule-based result is returned unchanged in that case.
ParsedCitation parse_with_fallback(const std::string& text, FallbackParser* fallback);

}  // namespace citegate
