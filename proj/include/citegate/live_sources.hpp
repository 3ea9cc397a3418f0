#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "citegate/sources.hpp"

namespace citegate {

// Field-mapping layer of each live adapter, split out so recorded response
// payloads can be replayed in tests without any network. Adapters never
// synthesize a year, DOI, or arXiv id that is not in the payload.
SourceOutcome<std::vector<CandidatePublication>> parse_crossref_response(
    const std::string& body);
SourceOutcome<std::vector<CandidatePublication>> parse_semantic_scholar_response(
    const std::string& body);
SourceOutcome<std::vector<CandidatePublication>> parse_openalex_response(
    const std::string& body);
// arXiv answers with an Atom feed; a minimal tag extractor recovers the
// fields the pipeline uses.
SourceOutcome<std::vector<CandidatePublication>> parse_arxiv_feed(const std::string& body);
// Web-search bridge endpoints answer with a JSON array of
// {title, authors?, year?, url?} objects.
SourceOutcome<std::vector<CandidatePublication>> parse_web_search_response(
    const std::string& body);

struct LiveSourceConfig {
    Millis timeout{10'000};
    RetryPolicy retry;
    std::size_t rate_limit_calls = 5;
    Millis rate_limit_window{1'000};
    // Polite-use identification / credentials, normally from the
    // CITEGATE_* environment variables.
    std::string crossref_mailto;
    std::string openalex_mailto;
    std::string s2_api_key;
    std::string search_api_key;
    // The web-search bridge: any endpoint accepting {"query": ...} POSTs and
    // answering with structured results.
    std::string web_search_endpoint;
};

// Reads CITEGATE_CROSSREF_MAILTO, CITEGATE_OPENALEX_MAILTO,
// CITEGATE_S2_API_KEY and CITEGATE_SEARCH_API_KEY into a config.
LiveSourceConfig live_config_from_env();

// Live adapter for one stage, wrapped in its own rate limiter with
// timeout/transport retries. Returns nullptr for Source::web_search when no
// endpoint is configured.
std::unique_ptr<SourceClient> make_live_client(Source source, const LiveSourceConfig& cfg);

}  // namespace citegate
